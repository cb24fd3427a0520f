#include "prism/cooccurrence.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace prism {

WindowStrategy WindowStrategy::document() { return {}; }

WindowStrategy WindowStrategy::sliding(int w) {
    if (w < 2) throw ConfigError("sliding window width must be >= 2");
    WindowStrategy s;
    s.kind = Kind::Sliding;
    s.width = w;
    return s;
}

WindowStrategy WindowStrategy::neighborhood(std::vector<std::vector<int>> sets,
                                            NeighborhoodWeighting weighting) {
    WindowStrategy s;
    s.kind = Kind::Neighborhood;
    s.neighborhoods = std::move(sets);
    s.weighting = weighting;
    for (std::size_t c = 0; c < s.neighborhoods.size(); ++c) {
        const auto& nb = s.neighborhoods[c];
        if (std::find(nb.begin(), nb.end(), static_cast<int>(c)) == nb.end())
            throw ConfigError("neighborhood " + std::to_string(c) + " does not contain its focal cell");
    }
    return s;
}

namespace {

// Accumulates joint presence weights for one window given the distinct
// (word, weight) pairs present in it. joint(i,i) doubles as the marginal.
void accumulate_window(const std::vector<std::pair<int, double>>& present, Eigen::MatrixXd& joint) {
    for (std::size_t a = 0; a < present.size(); ++a) {
        const auto [wa, va] = present[a];
        joint(wa, wa) += va;
        for (std::size_t b = a + 1; b < present.size(); ++b) {
            const auto [wb, vb] = present[b];
            const double v = std::min(va, vb);
            joint(wa, wb) += v;
            joint(wb, wa) += v;
        }
    }
}

std::vector<std::pair<int, double>> distinct_words(const std::vector<int>& tokens, std::size_t begin,
                                                   std::size_t end) {
    std::vector<int> ids(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                         tokens.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<std::pair<int, double>> out;
    out.reserve(ids.size());
    for (int w : ids) out.emplace_back(w, 1.0);
    return out;
}

}  // namespace

void for_each_window(const Corpus& corpus, const WindowStrategy& strategy,
                     const std::function<void(const std::vector<int>&)>& fn) {
    auto emit = [&fn](const std::vector<std::pair<int, double>>& present) {
        std::vector<int> ids;
        ids.reserve(present.size());
        for (const auto& [w, v] : present) ids.push_back(w);
        fn(ids);
    };
    switch (strategy.kind) {
        case WindowStrategy::Kind::Document:
            for (const auto& doc : corpus.docs) emit(distinct_words(doc, 0, doc.size()));
            break;
        case WindowStrategy::Kind::Sliding: {
            const auto w = static_cast<std::size_t>(strategy.width);
            for (const auto& doc : corpus.docs) {
                if (doc.size() <= w) {
                    emit(distinct_words(doc, 0, doc.size()));
                    continue;
                }
                for (std::size_t start = 0; start + w <= doc.size(); ++start)
                    emit(distinct_words(doc, start, start + w));
            }
            break;
        }
        case WindowStrategy::Kind::Neighborhood: {
            if (strategy.neighborhoods.size() != corpus.docs.size())
                throw ConfigError("neighborhood count does not match the number of cells");
            std::vector<int> ids;
            for (const auto& nb : strategy.neighborhoods) {
                ids.clear();
                for (int cell : nb) {
                    if (cell < 0 || cell >= corpus.num_docs())
                        throw ConfigError("neighborhood member out of range");
                    for (const auto& [w, c] : corpus.counts[static_cast<std::size_t>(cell)])
                        ids.push_back(w);
                }
                std::sort(ids.begin(), ids.end());
                ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
                fn(ids);
            }
            break;
        }
    }
}

PpmiMatrix ppmi(const Corpus& corpus, const WindowStrategy& strategy, int v_cap) {
    const int V = corpus.vocab_size();
    if (V > v_cap)
        throw ConfigError("vocabulary size " + std::to_string(V) + " exceeds the dense cap " +
                          std::to_string(v_cap) + "; raise the cap explicitly to proceed");

    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(V, V);
    long long windows = 0;

    switch (strategy.kind) {
        case WindowStrategy::Kind::Document:
            for (const auto& doc : corpus.docs) {
                accumulate_window(distinct_words(doc, 0, doc.size()), joint);
                ++windows;
            }
            break;
        case WindowStrategy::Kind::Sliding: {
            const auto w = static_cast<std::size_t>(strategy.width);
            for (const auto& doc : corpus.docs) {
                if (doc.size() <= w) {
                    accumulate_window(distinct_words(doc, 0, doc.size()), joint);
                    ++windows;
                    continue;
                }
                for (std::size_t start = 0; start + w <= doc.size(); ++start) {
                    accumulate_window(distinct_words(doc, start, start + w), joint);
                    ++windows;
                }
            }
            break;
        }
        case WindowStrategy::Kind::Neighborhood: {
            if (strategy.neighborhoods.size() != corpus.docs.size())
                throw ConfigError("neighborhood count does not match the number of cells");
            const bool presence = strategy.weighting == WindowStrategy::NeighborhoodWeighting::Presence;
            std::vector<double> weight(static_cast<std::size_t>(V));
            for (const auto& nb : strategy.neighborhoods) {
                std::fill(weight.begin(), weight.end(), 0.0);
                for (int cell : nb) {
                    if (cell < 0 || cell >= corpus.num_docs())
                        throw ConfigError("neighborhood member out of range");
                    for (const auto& [w, c] : corpus.counts[static_cast<std::size_t>(cell)]) {
                        if (presence)
                            weight[static_cast<std::size_t>(w)] = 1.0;
                        else
                            weight[static_cast<std::size_t>(w)] += static_cast<double>(c);
                    }
                }
                std::vector<std::pair<int, double>> present;
                for (int w = 0; w < V; ++w)
                    if (weight[static_cast<std::size_t>(w)] > 0.0)
                        present.emplace_back(w, weight[static_cast<std::size_t>(w)]);
                accumulate_window(present, joint);
                ++windows;
            }
            break;
        }
    }
    if (windows == 0) throw DataError("no context windows produced");

    // Presence mode: p(w_i) = joint(i,i)/C and p(w_i,w_j) = joint(i,j)/C.
    // The same normalizer is used for the weighted neighborhood variant.
    const double C = strategy.kind == WindowStrategy::Kind::Neighborhood &&
                             strategy.weighting == WindowStrategy::NeighborhoodWeighting::Counts
                         ? joint.diagonal().sum()
                         : static_cast<double>(windows);

    PpmiMatrix out;
    out.window_count = windows;
    out.m = Eigen::MatrixXd::Zero(V, V);
    for (int i = 0; i < V; ++i) {
        if (joint(i, i) <= 0.0)
            throw StageError("vocabulary term " + std::to_string(i) +
                             " never appears in any context window");
        for (int j = i; j < V; ++j) {
            if (joint(i, j) <= 0.0) continue;
            const double pmi = std::log(joint(i, j) * C / (joint(i, i) * joint(j, j)));
            const double v = std::max(0.0, pmi);
            out.m(i, j) = v;
            out.m(j, i) = v;
        }
    }
    return out;
}

namespace {

int repair_zero_rows(Eigen::MatrixXd& w) {
    int repaired = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if (w.row(i).cwiseAbs().sum() == 0.0) {
            w(i, i) = 1.0;
            ++repaired;
            log_warn("similarity row " + std::to_string(i) + " is all-zero; self-loop injected");
        }
    }
    return repaired;
}

}  // namespace

SimilarityGraph second_order_graph(const PpmiMatrix& ppmi) {
    const Eigen::Index V = ppmi.m.rows();
    Eigen::VectorXd norms(V);
    for (Eigen::Index i = 0; i < V; ++i) norms[i] = ppmi.m.row(i).norm();

    SimilarityGraph g;
    g.kind = SimilarityGraph::Kind::SecondOrderCosine;
    g.w = Eigen::MatrixXd::Zero(V, V);
    Eigen::MatrixXd gram = ppmi.m * ppmi.m.transpose();
    for (Eigen::Index i = 0; i < V; ++i) {
        if (norms[i] == 0.0) continue;
        for (Eigen::Index j = i + 1; j < V; ++j) {
            if (norms[j] == 0.0) continue;
            const double c = std::clamp(gram(i, j) / (norms[i] * norms[j]), 0.0, 1.0);
            g.w(i, j) = c;
            g.w(j, i) = c;
        }
        g.w(i, i) = 1.0;
    }
    g.repaired_rows = repair_zero_rows(g.w);
    return g;
}

SimilarityGraph first_order_graph(const PpmiMatrix& ppmi) {
    SimilarityGraph g;
    g.kind = SimilarityGraph::Kind::FirstOrderPpmi;
    g.w = ppmi.m;
    g.repaired_rows = repair_zero_rows(g.w);
    return g;
}

std::vector<std::vector<int>> knn_neighborhoods(const FeatureMatrix& features, int k, int pca_dims) {
    const Eigen::Index n = features.values.rows();
    const Eigen::Index d = features.values.cols();
    if (k < 1) throw ConfigError("k must be positive");
    if (static_cast<Eigen::Index>(k) >= n) throw ConfigError("k must be smaller than the number of cells");
    if (pca_dims < 1 || static_cast<Eigen::Index>(pca_dims) > std::min(n, d))
        throw ConfigError("pca_dims must lie in [1, min(cells, genes)]");

    Eigen::MatrixXd x = features.values;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double mean = x.col(j).mean();
        x.col(j).array() -= mean;
        const double sd = n > 1 ? std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n - 1)) : 0.0;
        if (sd > 0.0) x.col(j) /= sd;
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::MatrixXd proj = x * svd.matrixV().leftCols(pca_dims);

    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            dist[static_cast<std::size_t>(j)] = {(proj.row(i) - proj.row(j)).squaredNorm(),
                                                 static_cast<int>(j)};
        dist[static_cast<std::size_t>(i)].first = -1.0;  // focal sorts first
        std::sort(dist.begin(), dist.end());
        auto& nb = out[static_cast<std::size_t>(i)];
        nb.reserve(static_cast<std::size_t>(k) + 1);
        for (int r = 0; r <= k; ++r) nb.push_back(dist[static_cast<std::size_t>(r)].second);
    }
    return out;
}

void save_neighborhoods(const std::vector<std::vector<int>>& sets, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& nb : sets) {
        for (std::size_t i = 0; i < nb.size(); ++i) out << (i ? " " : "") << nb[i];
        out << "\n";
    }
}

std::vector<std::vector<int>> load_neighborhoods(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::vector<int>> sets;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<int> nb;
        int v;
        while (ss >> v) nb.push_back(v);
        sets.push_back(std::move(nb));
    }
    return sets;
}

namespace {
constexpr char kMatrixMagic[8] = {'P', 'R', 'I', 'S', 'M', 'D', 'N', 'S'};
}

void save_matrix_binary(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(kMatrixMagic, 8);
    const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
}

Eigen::MatrixXd load_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0)
        throw DataError("bad matrix magic in " + path);
    std::uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    Eigen::MatrixXd m(rows, cols);
    std::vector<double> row(cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!in) throw DataError("truncated matrix file " + path);
        for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = row[j];
    }
    return m;
}

void save_matrix_tsv(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "\t" : "") << m(i, j);
        out << "\n";
    }
}

}  // namespace prism
