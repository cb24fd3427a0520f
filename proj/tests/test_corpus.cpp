#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "prism/corpus.hpp"

using namespace prism;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("octis ingest tokenizes tab-separated lines") {
    const auto path = write_temp("prism_octis_basic.tsv", "a b a\ttrain\nb c\ttrain\n");
    Corpus c = ingest_octis(path);
    CHECK(c.num_docs() == 2);
    CHECK(c.vocab_size() == 3);
    // vocabulary is sorted: a, b, c
    CHECK(c.count(0, c.vocab.id("a")) == 2);
    CHECK(c.count(0, c.vocab.id("b")) == 1);
    CHECK(c.count(0, c.vocab.id("c")) == 0);
    CHECK(c.count(1, c.vocab.id("b")) == 1);
    CHECK(c.count(1, c.vocab.id("c")) == 1);
    CHECK(c.total_tokens == 5);
    CHECK(c.nnz == 4);
    CHECK(c.partitions[0] == "train");
}

TEST_CASE("octis ingest respects a supplied vocabulary") {
    const auto path = write_temp("prism_octis_vocab.tsv", "a b a\ttrain\nb c\ttrain\n");
    const auto vocab = write_temp("prism_octis_vocab.txt", "a\nb\n");
    Corpus c = ingest_octis(path, vocab);
    CHECK(c.vocab_size() == 2);
    CHECK(c.vocab.terms[0] == "a");
    CHECK(c.count(0, 0) == 2);
    CHECK(c.count(0, 1) == 1);
    CHECK(c.count(1, 1) == 1);
}

TEST_CASE("octis ingest drops blank documents, errors when all drop") {
    const auto path = write_temp("prism_octis_blank.tsv", "a b\ttrain\n\nc\ttest\n");
    Corpus c = ingest_octis(path);
    CHECK(c.num_docs() == 2);
    CHECK(c.dropped_docs == 1);

    const auto empty = write_temp("prism_octis_allblank.tsv", "\n\n");
    CHECK_THROWS_AS(ingest_octis(empty), DataError);
}

TEST_CASE("octis ingest prunes vocabulary terms that never occur") {
    const auto path = write_temp("prism_octis_prune.tsv", "a b\t\n");
    const auto vocab = write_temp("prism_octis_prune_vocab.txt", "a\nb\nz\n");
    Corpus c = ingest_octis(path, vocab);
    CHECK(c.vocab_size() == 2);
    CHECK_FALSE(c.vocab.contains("z"));
}

TEST_CASE("plaintext ingest applies the vocabulary filters") {
    // 100 one-line docs over a rotating 6-term pool (df 0.5 each); "common"
    // appears in 95 (df 0.95 > 0.9 excluded), "ab" is too short.
    const std::vector<std::string> pool = {"table", "chair", "lamp", "door", "floor", "wall"};
    std::string text;
    for (int i = 0; i < 100; ++i) {
        text += pool[i % 6] + " " + pool[(i + 1) % 6] + " " + pool[(i + 2) % 6] + " ab";
        if (i < 95) text += " common";
        text += "\n";
    }
    const auto path = write_temp("prism_plain.txt", text);
    VocabFilters f;
    f.min_df = 0.01;
    f.max_df = 0.9;
    Corpus c = ingest_plaintext(path, f);
    CHECK_FALSE(c.vocab.contains("common"));
    CHECK_FALSE(c.vocab.contains("ab"));
    CHECK(c.vocab.contains("table"));
    CHECK(c.vocab_size() == 6);
    CHECK(c.num_docs() == 100);
}

TEST_CASE("plaintext ingest caps the vocabulary by document frequency") {
    // alpha in 3 docs, bravo in 2, charlie and delta in 1 each; cap at 2.
    const auto path = write_temp("prism_plain_cap.txt",
                                 "alpha bravo charlie\nalpha bravo delta\nalpha echo foxtrot\n");
    VocabFilters f;
    f.min_df = 0.0;
    f.max_df = 1.0;
    f.max_features = 2;
    f.min_words_docs = 1;
    Corpus c = ingest_plaintext(path, f);
    CHECK(c.vocab_size() == 2);
    CHECK(c.vocab.contains("alpha"));
    CHECK(c.vocab.contains("bravo"));
}

TEST_CASE("plaintext ingest breaks document-frequency ties lexicographically") {
    const auto path = write_temp("prism_plain_ties.txt", "zebra yankee xray whiskey\n");
    VocabFilters f;
    f.min_df = 0.0;
    f.max_df = 1.0;
    f.max_features = 2;
    f.min_words_docs = 1;
    Corpus c = ingest_plaintext(path, f);
    CHECK(c.vocab.contains("whiskey"));
    CHECK(c.vocab.contains("xray"));
    CHECK_FALSE(c.vocab.contains("zebra"));
}

TEST_CASE("plaintext ingest rejects contradictory filters") {
    const auto path = write_temp("prism_plain_bad.txt", "alpha bravo\n");
    VocabFilters f;
    f.max_features = 0;
    CHECK_THROWS_AS(ingest_plaintext(path, f), ConfigError);
    VocabFilters g;
    g.min_df = 0.9;
    g.max_df = 0.1;
    CHECK_THROWS_AS(ingest_plaintext(path, g), ConfigError);
}

TEST_CASE("unigram matches hand counts and sums to one") {
    const auto path = write_temp("prism_octis_uni.tsv", "a b a\t\nb c\t\n");
    Corpus c = ingest_octis(path);
    UnigramDistribution u = unigram(c);
    CHECK(u.p[c.vocab.id("a")] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(u.p[c.vocab.id("b")] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(u.p[c.vocab.id("c")] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(u.p.sum() - 1.0) < 1e-12);
}

TEST_CASE("unigram handles the single-term corpus") {
    Corpus c = Corpus::from_docs(Vocabulary::from_terms({"a"}), {{0}});
    UnigramDistribution u = unigram(c);
    CHECK(u.p.size() == 1);
    CHECK(u.p[0] == 1.0);
}

TEST_CASE("unigram is uniform when every word appears once") {
    Corpus c = Corpus::from_docs(Vocabulary::from_terms({"a", "b", "c", "d"}), {{0, 1}, {2, 3}});
    UnigramDistribution u = unigram(c);
    for (int w = 0; w < 4; ++w) CHECK(u.p[w] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("expression ingest maps cells to documents") {
    const auto path = write_temp("prism_expr.tsv", "1\t0\n0\t2\n1\t1\n");
    const auto genes = write_temp("prism_expr_genes.txt", "g1\ng2\n");
    auto [c, fm] = ingest_expression_matrix(path, genes);
    CHECK(c.num_docs() == 3);
    CHECK(c.vocab_size() == 2);
    CHECK(c.total_tokens == 5);
    CHECK(fm.values.rows() == 3);
    CHECK(fm.names == std::vector<std::string>{"g1", "g2"});
}

TEST_CASE("expression ingest drops zero cells and rounds half up") {
    const auto path = write_temp("prism_expr_zero.tsv", "1.6\t0\n0\t0\n0\t2\n");
    const auto genes = write_temp("prism_expr_zero_genes.txt", "g1\ng2\n");
    auto [c, fm] = ingest_expression_matrix(path, genes);
    CHECK(c.num_docs() == 2);
    CHECK(c.dropped_docs == 1);
    CHECK(c.count(0, 0) == 2);  // 1.6 rounds half-up to 2
    CHECK(fm.values(0, 0) == doctest::Approx(1.6));
}

TEST_CASE("expression ingest rejects negatives and dimension mismatch") {
    const auto bad = write_temp("prism_expr_neg.tsv", "1\t-2\n");
    const auto genes = write_temp("prism_expr_neg_genes.txt", "g1\ng2\n");
    CHECK_THROWS_AS(ingest_expression_matrix(bad, genes), DataError);

    const auto ok = write_temp("prism_expr_dim.tsv", "1\t2\n");
    const auto genes3 = write_temp("prism_expr_dim_genes.txt", "g1\ng2\ng3\n");
    CHECK_THROWS_AS(ingest_expression_matrix(ok, genes3), DataError);
}

TEST_CASE("expression ingest reads MatrixMarket input") {
    const auto path = write_temp("prism_expr_mm.mtx",
                                 "%%MatrixMarket matrix coordinate real general\n"
                                 "% comment\n3 2 3\n1 1 1\n2 2 2\n3 1 1\n");
    const auto genes = write_temp("prism_expr_mm_genes.txt", "g1\ng2\n");
    auto [c, fm] = ingest_expression_matrix(path, genes);
    CHECK(c.num_docs() == 3);
    CHECK(c.count(1, c.vocab.id("g2")) == 2);
}

TEST_CASE("corpus round-trips through the canonical directory format") {
    const auto path = write_temp("prism_octis_rt.tsv", "a b a\ttrain\nb c\ttest\n");
    Corpus c = ingest_octis(path);
    const auto dir = (fs::temp_directory_path() / "prism_corpus_rt").string();
    save_corpus(c, dir);
    Corpus r = load_corpus(dir);
    CHECK(r.vocab.terms == c.vocab.terms);
    CHECK(r.nnz == c.nnz);
    CHECK(r.total_tokens == c.total_tokens);
    for (int d = 0; d < c.num_docs(); ++d)
        for (int w = 0; w < c.vocab_size(); ++w) CHECK(r.count(d, w) == c.count(d, w));
    CHECK(r.partitions == c.partitions);
}

TEST_CASE("document drop rule is idempotent") {
    const auto path = write_temp("prism_octis_idem.tsv", "a b\t\n\nc c c\t\n");
    Corpus once = ingest_octis(path);
    // Re-serialize and re-load: nothing further drops.
    const auto dir = (fs::temp_directory_path() / "prism_corpus_idem").string();
    save_corpus(once, dir);
    Corpus twice = load_corpus(dir);
    CHECK(twice.num_docs() == once.num_docs());
    CHECK(twice.nnz == once.nnz);
}

TEST_CASE("vocabulary rejects duplicates") {
    CHECK_THROWS_AS(Vocabulary::from_terms({"a", "a"}), DataError);
}
