#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prism/common.hpp"

namespace prism {

struct Vocabulary {
    std::vector<std::string> terms;
    std::unordered_map<std::string, int> index;

    int size() const { return static_cast<int>(terms.size()); }
    bool contains(const std::string& t) const { return index.count(t) != 0; }
    int id(const std::string& t) const;

    // Validates: no duplicates, V >= 1; ids are assigned densely in `t` order.
    static Vocabulary from_terms(std::vector<std::string> t);
};

// Immutable bag-of-words corpus. `counts` stores per-document sparse rows as
// (word_id, count) pairs sorted by word_id; it always equals the tally of `docs`.
struct Corpus {
    Vocabulary vocab;
    std::vector<std::vector<int>> docs;
    std::vector<std::vector<std::pair<int, int>>> counts;
    long long total_tokens = 0;
    long long nnz = 0;
    int dropped_docs = 0;                  // documents dropped at ingest
    std::vector<std::string> partitions;   // OCTIS extra columns, kept as metadata

    int num_docs() const { return static_cast<int>(docs.size()); }
    int vocab_size() const { return vocab.size(); }
    int count(int d, int w) const;

    static Corpus from_docs(Vocabulary vocab, std::vector<std::vector<int>> docs);
};

struct UnigramDistribution {
    Eigen::VectorXd p;
};

// Raw (unrounded) cells x genes values kept for PCA/kNN and expression metrics.
// Column order matches the corpus vocabulary produced alongside it.
struct FeatureMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> names;

    int gene_column(const std::string& name) const;
};

struct VocabFilters {
    bool lowercase = true;
    bool remove_numbers = true;
    bool remove_punctuation = true;
    int min_chars = 3;
    int min_words_docs = 3;
    double min_df = 0.01;
    double max_df = 0.9;
    int max_features = 2000;
    std::string stopword_file;  // empty: bundled English list
};

Corpus ingest_octis(const std::string& corpus_file, const std::string& vocab_file = "");
Corpus ingest_plaintext(const std::string& dir_or_file, const VocabFilters& filters);
UnigramDistribution unigram(const Corpus& corpus);
std::pair<Corpus, FeatureMatrix> ingest_expression_matrix(const std::string& matrix_file,
                                                          const std::string& gene_names_file);

// Canonical on-disk corpus: vocabulary.txt + counts.tsv triplets (+ optional
// partitions.txt / features.tsv).
void save_corpus(const Corpus& corpus, const std::string& dir,
                 const FeatureMatrix* features = nullptr);
Corpus load_corpus(const std::string& dir);
std::optional<FeatureMatrix> load_features(const std::string& dir);

const std::vector<std::string>& builtin_stopwords();

}  // namespace prism
