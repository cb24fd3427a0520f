#include <doctest.h>

#include <cmath>
#include <set>

#include "prism/cooccurrence.hpp"

using namespace prism;

namespace {

Corpus toy_corpus(const std::vector<std::vector<int>>& docs, int V) {
    std::vector<std::string> terms;
    for (int i = 0; i < V; ++i) terms.push_back("w" + std::to_string(i));
    return Corpus::from_docs(Vocabulary::from_terms(terms), docs);
}

// Independent PPMI oracle: enumerate every context/word incidence explicitly.
Eigen::MatrixXd ppmi_oracle(const std::vector<std::set<int>>& contexts, int V) {
    const double C = static_cast<double>(contexts.size());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(V, V);
    for (const auto& ctx : contexts)
        for (int i : ctx)
            for (int j : ctx) counts(i, j) += 1.0;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(V, V);
    for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j) {
            if (counts(i, j) <= 0.0) continue;
            const double pij = counts(i, j) / C;
            const double pi = counts(i, i) / C;
            const double pj = counts(j, j) / C;
            out(i, j) = std::max(0.0, std::log(pij / (pi * pj)));
        }
    return out;
}

std::vector<std::set<int>> document_contexts(const Corpus& c) {
    std::vector<std::set<int>> out;
    for (const auto& doc : c.docs) out.emplace_back(doc.begin(), doc.end());
    return out;
}

Corpus random_corpus(Rng& rng, int max_docs, int max_vocab) {
    const int V = 2 + static_cast<int>(uniform_below(rng, max_vocab - 1));
    const int D = 1 + static_cast<int>(uniform_below(rng, max_docs));
    std::vector<std::vector<int>> docs(D);
    std::set<int> seen;
    for (auto& doc : docs) {
        const int len = 1 + static_cast<int>(uniform_below(rng, 6));
        for (int i = 0; i < len; ++i) {
            doc.push_back(static_cast<int>(uniform_below(rng, V)));
            seen.insert(doc.back());
        }
    }
    // Every term must occur somewhere for the corpus invariant to hold.
    for (int w = 0; w < V; ++w)
        if (!seen.count(w)) docs[static_cast<std::size_t>(uniform_below(rng, D))].push_back(w);
    return toy_corpus(docs, V);
}

}  // namespace

TEST_CASE("document-window PPMI matches the hand-enumerated 3-context table") {
    Corpus c = toy_corpus({{0, 1}, {0, 1}, {2}}, 3);
    PpmiMatrix p = ppmi(c, WindowStrategy::document());
    CHECK(p.window_count == 3);
    CHECK(p.m(0, 1) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    CHECK(p.m(1, 0) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
}

TEST_CASE("independent pair has zero PPMI") {
    Corpus c = toy_corpus({{0, 1}, {0, 2}}, 3);
    PpmiMatrix p = ppmi(c, WindowStrategy::document());
    CHECK(p.m(0, 1) == 0.0);
    CHECK(p.m(0, 2) == 0.0);
}

TEST_CASE("pairs that never share a context score zero") {
    Corpus c = toy_corpus({{0, 1}, {2}}, 3);
    PpmiMatrix p = ppmi(c, WindowStrategy::document());
    CHECK(p.m(0, 2) == 0.0);
    CHECK(p.m(1, 2) == 0.0);
}

TEST_CASE("PPMI is exactly symmetric on random corpora") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        Corpus c = random_corpus(rng, 8, 7);
        PpmiMatrix p = ppmi(c, WindowStrategy::document());
        CHECK(p.m == p.m.transpose().eval());
    }
}

TEST_CASE("PPMI matches the exhaustive oracle on small corpora") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Corpus c = random_corpus(rng, 10, 8);
        PpmiMatrix p = ppmi(c, WindowStrategy::document());
        Eigen::MatrixXd expect = ppmi_oracle(document_contexts(c), c.vocab_size());
        CHECK((p.m - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("sliding windows reduce to the document window for short documents") {
    Corpus c = toy_corpus({{0, 1, 2}, {1, 2}}, 3);
    PpmiMatrix doc = ppmi(c, WindowStrategy::document());
    PpmiMatrix slide = ppmi(c, WindowStrategy::sliding(5));
    CHECK((doc.m - slide.m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(doc.window_count == slide.window_count);
}

TEST_CASE("sliding windows stride by one") {
    Corpus c = toy_corpus({{0, 1, 2, 3}}, 4);
    PpmiMatrix p = ppmi(c, WindowStrategy::sliding(2));
    CHECK(p.window_count == 3);  // (0,1), (1,2), (2,3)
    CHECK(p.m(0, 3) == 0.0);     // 0 and 3 never share a width-2 window
}

TEST_CASE("second-order graph has unit diagonal and [0,1] entries") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Corpus c = random_corpus(rng, 8, 7);
        SimilarityGraph g = second_order_graph(ppmi(c, WindowStrategy::document()));
        CHECK(g.w == g.w.transpose().eval());
        CHECK(g.w.minCoeff() >= 0.0);
        CHECK(g.w.maxCoeff() <= 1.0);
        for (int i = 0; i < g.w.rows(); ++i) CHECK(g.w(i, i) == 1.0);
    }
}

TEST_CASE("identical rows give cosine 1, disjoint rows give 0") {
    PpmiMatrix p;
    p.m.resize(4, 4);
    p.m << 1, 1, 0, 0,
           1, 1, 0, 0,
           0, 0, 2, 0,
           0, 0, 0, 3;
    SimilarityGraph g = second_order_graph(p);
    CHECK(g.w(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.w(2, 3) == 0.0);
}

TEST_CASE("cosine of [1,1,0] and [1,0,1] is 0.5") {
    PpmiMatrix p;
    p.m.resize(3, 3);
    p.m << 1, 1, 0,
           1, 0, 1,
           0, 1, 1;
    SimilarityGraph g = second_order_graph(p);
    CHECK(g.w(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("first-order graph passes PPMI through and repairs zero rows") {
    Corpus c = toy_corpus({{0, 1}, {0, 1}, {2}}, 3);
    PpmiMatrix p = ppmi(c, WindowStrategy::document());
    SimilarityGraph g = first_order_graph(p);
    CHECK(g.kind == SimilarityGraph::Kind::FirstOrderPpmi);
    CHECK(g.w(0, 1) == doctest::Approx(std::log(1.5)).epsilon(1e-12));

    PpmiMatrix zeros;
    zeros.m = Eigen::MatrixXd::Zero(3, 3);
    SimilarityGraph repaired = first_order_graph(zeros);
    CHECK(repaired.repaired_rows == 3);
    for (int i = 0; i < 3; ++i) CHECK(repaired.w(i, i) == 1.0);
}

TEST_CASE("symmetric input to first_order_graph is preserved bit-identically") {
    Corpus c = toy_corpus({{0, 1, 2}, {1, 2}, {0, 2}}, 3);
    PpmiMatrix p = ppmi(c, WindowStrategy::document());
    SimilarityGraph g = first_order_graph(p);
    CHECK(g.w == p.m);
}

TEST_CASE("neighborhood windows require the focal cell") {
    CHECK_THROWS_AS(WindowStrategy::neighborhood({{1}, {1}}), ConfigError);
}

TEST_CASE("neighborhood PPMI pools gene presence across member cells") {
    // One gene per cell; with every neighborhood covering all cells, each
    // pair co-occurs in every window, so all PMI values are zero.
    Corpus c = toy_corpus({{0}, {1}, {2}}, 3);
    auto strategy = WindowStrategy::neighborhood({{0, 1, 2}, {1, 0, 2}, {2, 0, 1}});
    PpmiMatrix p = ppmi(c, strategy);
    CHECK(p.window_count == 3);
    CHECK(p.m.maxCoeff() == 0.0);
}

TEST_CASE("knn neighborhoods break ties by lower cell id") {
    FeatureMatrix fm;
    fm.values = Eigen::MatrixXd::Ones(3, 2);
    fm.names = {"g1", "g2"};
    auto sets = knn_neighborhoods(fm, 1, 1);
    CHECK(sets[0] == std::vector<int>{0, 1});
    CHECK(sets[1] == std::vector<int>{1, 0});
    CHECK(sets[2] == std::vector<int>{2, 0});
}

TEST_CASE("knn neighborhoods follow Euclidean distance on a line") {
    FeatureMatrix fm;
    fm.values.resize(3, 2);
    fm.values << 0, 0, 1, 0, 10, 0;
    fm.names = {"g1", "g2"};
    auto sets = knn_neighborhoods(fm, 1, 1);
    CHECK(sets[0] == std::vector<int>{0, 1});
    CHECK(sets[1] == std::vector<int>{1, 0});
    CHECK(sets[2] == std::vector<int>{2, 1});
}

TEST_CASE("knn neighborhoods match a brute-force scan on random data") {
    Rng rng(19);
    FeatureMatrix fm;
    fm.values.resize(50, 20);
    for (Eigen::Index i = 0; i < fm.values.rows(); ++i)
        for (Eigen::Index j = 0; j < fm.values.cols(); ++j) fm.values(i, j) = normal_sample(rng);
    for (int j = 0; j < 20; ++j) fm.names.push_back("g" + std::to_string(j));

    const int k = 5, dims = 20;
    auto sets = knn_neighborhoods(fm, k, dims);

    // With dims == cols the projection is a rotation, so distances match the
    // standardized data directly.
    Eigen::MatrixXd x = fm.values;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        x.col(j).array() -= x.col(j).mean();
        const double sd = std::sqrt(x.col(j).squaredNorm() / (x.rows() - 1));
        if (sd > 0) x.col(j) /= sd;
    }
    for (int i = 0; i < 50; ++i) {
        std::vector<std::pair<double, int>> d;
        for (int j = 0; j < 50; ++j)
            if (j != i) d.emplace_back((x.row(i) - x.row(j)).squaredNorm(), j);
        std::sort(d.begin(), d.end());
        std::set<int> expect;
        for (int r = 0; r < k; ++r) expect.insert(d[static_cast<std::size_t>(r)].second);
        std::set<int> got(sets[static_cast<std::size_t>(i)].begin() + 1,
                          sets[static_cast<std::size_t>(i)].end());
        CHECK(got == expect);
        CHECK(sets[static_cast<std::size_t>(i)][0] == i);
    }
}

TEST_CASE("knn rejects k >= number of cells") {
    FeatureMatrix fm;
    fm.values = Eigen::MatrixXd::Ones(3, 2);
    fm.names = {"g1", "g2"};
    CHECK_THROWS_AS(knn_neighborhoods(fm, 3, 1), ConfigError);
}

TEST_CASE("dense binary matrix round-trips") {
    Rng rng(5);
    Eigen::MatrixXd m(4, 7);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal_sample(rng);
    const auto path = "/tmp/prism_matrix_rt.bin";
    save_matrix_binary(m, path);
    Eigen::MatrixXd r = load_matrix_binary(path);
    CHECK(r == m);
}

TEST_CASE("neighborhood sets round-trip through the text format") {
    std::vector<std::vector<int>> sets = {{0, 2, 1}, {1, 0}, {2, 1}};
    save_neighborhoods(sets, "/tmp/prism_nb_rt.txt");
    CHECK(load_neighborhoods("/tmp/prism_nb_rt.txt") == sets);
}

TEST_CASE("vocabulary cap is enforced") {
    Corpus c = toy_corpus({{0, 1, 2}}, 3);
    CHECK_THROWS_AS(ppmi(c, WindowStrategy::document(), 2), ConfigError);
}
