#include "prism/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace prism {

void log_warn(const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; }

std::string digest_string(const std::string& s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(s.data(), s.size())));
    return buf;
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for digest: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

int Vocabulary::id(const std::string& t) const {
    auto it = index.find(t);
    if (it == index.end()) throw DataError("term not in vocabulary: " + t);
    return it->second;
}

Vocabulary Vocabulary::from_terms(std::vector<std::string> t) {
    if (t.empty()) throw DataError("vocabulary is empty");
    Vocabulary v;
    v.terms = std::move(t);
    v.index.reserve(v.terms.size());
    for (std::size_t i = 0; i < v.terms.size(); ++i) {
        auto [it, inserted] = v.index.emplace(v.terms[i], static_cast<int>(i));
        if (!inserted) throw DataError("duplicate vocabulary term: " + v.terms[i]);
    }
    return v;
}

int Corpus::count(int d, int w) const {
    const auto& row = counts.at(static_cast<std::size_t>(d));
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(w, 0));
    if (it != row.end() && it->first == w) return it->second;
    return 0;
}

Corpus Corpus::from_docs(Vocabulary vocab, std::vector<std::vector<int>> docs) {
    Corpus c;
    c.vocab = std::move(vocab);
    c.docs = std::move(docs);
    if (c.docs.empty()) throw DataError("corpus has no documents");
    const int V = c.vocab.size();
    c.counts.resize(c.docs.size());
    for (std::size_t d = 0; d < c.docs.size(); ++d) {
        if (c.docs[d].empty()) throw DataError("document " + std::to_string(d) + " is empty");
        std::map<int, int> tally;
        for (int w : c.docs[d]) {
            if (w < 0 || w >= V)
                throw DataError("token id out of range in document " + std::to_string(d));
            ++tally[w];
        }
        c.counts[d].assign(tally.begin(), tally.end());
        c.nnz += static_cast<long long>(tally.size());
        c.total_tokens += static_cast<long long>(c.docs[d].size());
    }
    return c;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

// Builds a corpus from tokenized documents, pruning vocabulary terms that never
// occur, dropping empty documents (warn; error only if everything drops).
Corpus build_from_token_docs(const std::vector<std::vector<std::string>>& raw_docs,
                             const std::vector<std::string>& vocab_order,
                             const std::vector<std::string>& partitions,
                             int min_doc_len) {
    std::unordered_map<std::string, int> candidate;
    candidate.reserve(vocab_order.size());
    for (std::size_t i = 0; i < vocab_order.size(); ++i)
        candidate.emplace(vocab_order[i], static_cast<int>(i));

    std::vector<long long> occur(vocab_order.size(), 0);
    for (const auto& doc : raw_docs)
        for (const auto& tok : doc) {
            auto it = candidate.find(tok);
            if (it != candidate.end()) ++occur[static_cast<std::size_t>(it->second)];
        }

    std::vector<std::string> kept;
    std::vector<int> remap(vocab_order.size(), -1);
    for (std::size_t i = 0; i < vocab_order.size(); ++i) {
        if (occur[i] > 0) {
            remap[i] = static_cast<int>(kept.size());
            kept.push_back(vocab_order[i]);
        }
    }
    if (kept.size() < vocab_order.size())
        log_warn(std::to_string(vocab_order.size() - kept.size()) +
                 " vocabulary term(s) never occur and were pruned");
    if (kept.empty()) throw DataError("no vocabulary term occurs in the corpus");

    std::vector<std::vector<int>> docs;
    std::vector<std::string> kept_partitions;
    int dropped = 0;
    for (std::size_t d = 0; d < raw_docs.size(); ++d) {
        std::vector<int> ids;
        ids.reserve(raw_docs[d].size());
        for (const auto& tok : raw_docs[d]) {
            auto it = candidate.find(tok);
            if (it != candidate.end() && remap[static_cast<std::size_t>(it->second)] >= 0)
                ids.push_back(remap[static_cast<std::size_t>(it->second)]);
        }
        if (static_cast<int>(ids.size()) < std::max(1, min_doc_len)) {
            ++dropped;
            continue;
        }
        docs.push_back(std::move(ids));
        if (d < partitions.size()) kept_partitions.push_back(partitions[d]);
    }
    if (docs.empty()) throw DataError("all documents were dropped during filtering");
    if (dropped > 0) log_warn(std::to_string(dropped) + " document(s) dropped during filtering");

    Corpus c = Corpus::from_docs(Vocabulary::from_terms(std::move(kept)), std::move(docs));
    c.dropped_docs = dropped;
    c.partitions = std::move(kept_partitions);
    return c;
}

}  // namespace

Corpus ingest_octis(const std::string& corpus_file, const std::string& vocab_file) {
    std::ifstream in(corpus_file);
    if (!in) throw DataError("cannot open corpus file: " + corpus_file);

    std::vector<std::vector<std::string>> raw_docs;
    std::vector<std::string> partitions;
    std::string line;
    bool any_line = false;
    while (std::getline(in, line)) {
        any_line = true;
        std::string text = line;
        std::string meta;
        if (auto tab = line.find('\t'); tab != std::string::npos) {
            text = line.substr(0, tab);
            meta = line.substr(tab + 1);
        }
        raw_docs.push_back(split_ws(text));
        partitions.push_back(meta);
    }
    if (!any_line) throw DataError("empty corpus file: " + corpus_file);

    std::vector<std::string> vocab_order;
    if (!vocab_file.empty()) {
        std::ifstream vin(vocab_file);
        if (!vin) throw DataError("cannot open vocabulary file: " + vocab_file);
        std::string term;
        std::set<std::string> seen;
        while (std::getline(vin, term)) {
            while (!term.empty() && (term.back() == '\r' || term.back() == ' ')) term.pop_back();
            if (term.empty()) continue;
            if (seen.insert(term).second) vocab_order.push_back(term);
        }
        if (vocab_order.empty()) throw DataError("empty vocabulary file: " + vocab_file);
    } else {
        std::set<std::string> observed;
        for (const auto& d : raw_docs) observed.insert(d.begin(), d.end());
        vocab_order.assign(observed.begin(), observed.end());
    }
    return build_from_token_docs(raw_docs, vocab_order, partitions, 1);
}

const std::vector<std::string>& builtin_stopwords() {
    static const std::vector<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
        "are", "aren't", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can", "can't", "cannot", "could", "couldn't", "did",
        "didn't", "do", "does", "doesn't", "doing", "don't", "down", "during", "each", "few",
        "for", "from", "further", "had", "hadn't", "has", "hasn't", "have", "haven't", "having",
        "he", "he'd", "he'll", "he's", "her", "here", "here's", "hers", "herself", "him",
        "himself", "his", "how", "how's", "i", "i'd", "i'll", "i'm", "i've", "if", "in", "into",
        "is", "isn't", "it", "it's", "its", "itself", "let's", "me", "more", "most", "mustn't",
        "my", "myself", "no", "nor", "not", "of", "off", "on", "once", "only", "or", "other",
        "ought", "our", "ours", "ourselves", "out", "over", "own", "same", "shan't", "she",
        "she'd", "she'll", "she's", "should", "shouldn't", "so", "some", "such", "than", "that",
        "that's", "the", "their", "theirs", "them", "themselves", "then", "there", "there's",
        "these", "they", "they'd", "they'll", "they're", "they've", "this", "those", "through",
        "to", "too", "under", "until", "up", "very", "was", "wasn't", "we", "we'd", "we'll",
        "we're", "we've", "were", "weren't", "what", "what's", "when", "when's", "where",
        "where's", "which", "while", "who", "who's", "whom", "why", "why's", "with", "won't",
        "would", "wouldn't", "you", "you'd", "you'll", "you're", "you've", "your", "yours",
        "yourself", "yourselves"};
    return words;
}

namespace {

std::vector<std::string> normalize_tokens(const std::string& text, const VocabFilters& f,
                                          const std::set<std::string>& stopwords) {
    std::vector<std::string> out;
    for (std::string tok : split_ws(text)) {
        if (f.lowercase)
            for (char& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (f.remove_punctuation) {
            std::string clean;
            for (char ch : tok)
                if (!std::ispunct(static_cast<unsigned char>(ch))) clean.push_back(ch);
            tok = clean;
        }
        if (tok.empty()) continue;
        if (f.remove_numbers &&
            std::any_of(tok.begin(), tok.end(),
                        [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
            continue;
        if (static_cast<int>(tok.size()) < f.min_chars) continue;
        if (stopwords.count(tok)) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

}  // namespace

Corpus ingest_plaintext(const std::string& dir_or_file, const VocabFilters& filters) {
    if (!(filters.min_df >= 0.0 && filters.min_df < filters.max_df && filters.max_df <= 1.0))
        throw ConfigError("vocabulary filters require 0 <= min_df < max_df <= 1");
    if (filters.max_features <= 0) throw ConfigError("max_features must be positive");

    std::set<std::string> stopwords;
    if (!filters.stopword_file.empty()) {
        std::ifstream sin(filters.stopword_file);
        if (!sin) throw DataError("cannot open stopword file: " + filters.stopword_file);
        std::string w;
        while (sin >> w) stopwords.insert(w);
    } else {
        stopwords.insert(builtin_stopwords().begin(), builtin_stopwords().end());
    }

    std::vector<std::vector<std::string>> raw_docs;
    if (fs::is_directory(dir_or_file)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir_or_file))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) {
            std::ifstream in(p);
            std::stringstream buf;
            buf << in.rdbuf();
            raw_docs.push_back(normalize_tokens(buf.str(), filters, stopwords));
        }
    } else {
        std::ifstream in(dir_or_file);
        if (!in) throw DataError("cannot open input: " + dir_or_file);
        std::string line;
        while (std::getline(in, line))
            raw_docs.push_back(normalize_tokens(line, filters, stopwords));
    }
    if (raw_docs.empty()) throw DataError("no documents found in " + dir_or_file);

    // Document frequencies over normalized docs decide the vocabulary.
    std::map<std::string, int> df;
    for (const auto& doc : raw_docs) {
        std::set<std::string> uniq(doc.begin(), doc.end());
        for (const auto& t : uniq) ++df[t];
    }
    const double D = static_cast<double>(raw_docs.size());
    std::vector<std::pair<std::string, int>> candidates;
    for (const auto& [term, n] : df) {
        const double frac = n / D;
        if (frac >= filters.min_df && frac <= filters.max_df) candidates.emplace_back(term, n);
    }
    if (candidates.empty()) throw DataError("vocabulary is empty after df filtering");

    // Ties on equal document frequency break lexicographically.
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(candidates.size()) > filters.max_features)
        candidates.resize(static_cast<std::size_t>(filters.max_features));

    std::vector<std::string> vocab_order;
    vocab_order.reserve(candidates.size());
    for (const auto& [term, n] : candidates) vocab_order.push_back(term);
    std::sort(vocab_order.begin(), vocab_order.end());

    return build_from_token_docs(raw_docs, vocab_order, {}, filters.min_words_docs);
}

UnigramDistribution unigram(const Corpus& corpus) {
    const int V = corpus.vocab_size();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(V);
    for (const auto& row : corpus.counts)
        for (const auto& [w, c] : row) p[w] += static_cast<double>(c);
    p /= static_cast<double>(corpus.total_tokens);
    return {p};
}

namespace {

Eigen::MatrixXd read_dense_numeric(std::ifstream& in, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        for (char& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (row.empty()) continue;
        if (!rows.empty() && rows.back().size() != row.size())
            throw DataError("ragged rows in matrix file: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty matrix file: " + path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Eigen::MatrixXd read_matrix_market(std::ifstream& in, const std::string& path) {
    std::string line;
    // Header already consumed by the caller; skip comments.
    while (std::getline(in, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream hdr(line);
    long long rows = 0, cols = 0, entries = 0;
    if (!(hdr >> rows >> cols >> entries))
        throw DataError("bad MatrixMarket size line in " + path);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    long long seen = 0;
    long long r, c;
    double v;
    while (in >> r >> c >> v) {
        if (r < 1 || r > rows || c < 1 || c > cols)
            throw DataError("MatrixMarket index out of range in " + path);
        m(r - 1, c - 1) = v;
        ++seen;
    }
    if (seen != entries)
        throw DataError("MatrixMarket entry count mismatch in " + path);
    return m;
}

}  // namespace

std::pair<Corpus, FeatureMatrix> ingest_expression_matrix(const std::string& matrix_file,
                                                          const std::string& gene_names_file) {
    std::ifstream in(matrix_file);
    if (!in) throw DataError("cannot open matrix file: " + matrix_file);
    Eigen::MatrixXd values;
    {
        // Peek the first line to detect MatrixMarket input.
        std::string first;
        if (!std::getline(in, first)) throw DataError("empty matrix file: " + matrix_file);
        if (first.rfind("%%MatrixMarket", 0) == 0) {
            values = read_matrix_market(in, matrix_file);
        } else {
            in.seekg(0);
            values = read_dense_numeric(in, matrix_file);
        }
    }
    if ((values.array() < 0.0).any()) throw DataError("negative entries in expression matrix");

    std::vector<std::string> genes;
    {
        std::ifstream gin(gene_names_file);
        if (!gin) throw DataError("cannot open gene name file: " + gene_names_file);
        std::string g;
        while (std::getline(gin, g)) {
            while (!g.empty() && (g.back() == '\r' || g.back() == ' ')) g.pop_back();
            if (!g.empty()) genes.push_back(g);
        }
    }
    if (static_cast<Eigen::Index>(genes.size()) != values.cols())
        throw DataError("gene name count does not match matrix columns");

    // Round-half-up for the sampler; keep raw values for kNN/PCA.
    Eigen::MatrixXd rounded = (values.array() + 0.5).floor().matrix();

    std::vector<int> kept_cells;
    for (Eigen::Index i = 0; i < rounded.rows(); ++i)
        if (rounded.row(i).sum() > 0.0) kept_cells.push_back(static_cast<int>(i));
    if (kept_cells.empty()) throw DataError("all cells have zero rounded counts");
    if (static_cast<Eigen::Index>(kept_cells.size()) < rounded.rows())
        log_warn(std::to_string(rounded.rows() - static_cast<Eigen::Index>(kept_cells.size())) +
                 " zero cell(s) dropped");

    std::vector<int> kept_genes;
    for (Eigen::Index j = 0; j < rounded.cols(); ++j) {
        double tot = 0.0;
        for (int i : kept_cells) tot += rounded(i, j);
        if (tot > 0.0) kept_genes.push_back(static_cast<int>(j));
    }
    if (kept_genes.empty()) throw DataError("no gene has nonzero rounded counts");
    if (kept_genes.size() < genes.size())
        log_warn(std::to_string(genes.size() - kept_genes.size()) +
                 " zero-count gene(s) pruned from vocabulary");

    std::vector<std::string> vocab_terms;
    vocab_terms.reserve(kept_genes.size());
    for (int j : kept_genes) vocab_terms.push_back(genes[static_cast<std::size_t>(j)]);

    std::vector<std::vector<int>> docs(kept_cells.size());
    for (std::size_t di = 0; di < kept_cells.size(); ++di) {
        for (std::size_t wj = 0; wj < kept_genes.size(); ++wj) {
            const auto c = static_cast<long long>(rounded(kept_cells[di], kept_genes[wj]));
            for (long long r = 0; r < c; ++r) docs[di].push_back(static_cast<int>(wj));
        }
    }

    Corpus corpus = Corpus::from_docs(Vocabulary::from_terms(std::move(vocab_terms)), std::move(docs));
    corpus.dropped_docs = static_cast<int>(rounded.rows()) - static_cast<int>(kept_cells.size());

    FeatureMatrix fm;
    fm.values.resize(static_cast<Eigen::Index>(kept_cells.size()),
                     static_cast<Eigen::Index>(kept_genes.size()));
    for (std::size_t i = 0; i < kept_cells.size(); ++i)
        for (std::size_t j = 0; j < kept_genes.size(); ++j)
            fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                values(kept_cells[i], kept_genes[j]);
    fm.names = corpus.vocab.terms;
    return {std::move(corpus), std::move(fm)};
}

int FeatureMatrix::gene_column(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] == name) return static_cast<int>(j);
    throw DataError("gene not present in expression matrix: " + name);
}

void save_corpus(const Corpus& corpus, const std::string& dir, const FeatureMatrix* features) {
    fs::create_directories(dir);
    {
        std::ofstream v(fs::path(dir) / "vocabulary.txt");
        for (const auto& t : corpus.vocab.terms) v << t << "\n";
    }
    {
        std::ofstream c(fs::path(dir) / "counts.tsv");
        for (std::size_t d = 0; d < corpus.counts.size(); ++d)
            for (const auto& [w, n] : corpus.counts[d])
                c << d << "\t" << w << "\t" << n << "\n";
    }
    bool any_meta = false;
    for (const auto& p : corpus.partitions) any_meta |= !p.empty();
    if (any_meta) {
        std::ofstream p(fs::path(dir) / "partitions.txt");
        for (const auto& s : corpus.partitions) p << s << "\n";
    }
    if (features != nullptr) {
        std::ofstream f(fs::path(dir) / "features.tsv");
        f.precision(17);
        for (Eigen::Index i = 0; i < features->values.rows(); ++i) {
            for (Eigen::Index j = 0; j < features->values.cols(); ++j)
                f << (j ? "\t" : "") << features->values(i, j);
            f << "\n";
        }
    }
}

Corpus load_corpus(const std::string& dir) {
    std::vector<std::string> terms;
    {
        std::ifstream v(fs::path(dir) / "vocabulary.txt");
        if (!v) throw DataError("missing vocabulary.txt in " + dir);
        std::string t;
        while (std::getline(v, t)) {
            while (!t.empty() && t.back() == '\r') t.pop_back();
            if (!t.empty()) terms.push_back(t);
        }
    }
    std::ifstream c(fs::path(dir) / "counts.tsv");
    if (!c) throw DataError("missing counts.tsv in " + dir);
    std::vector<std::vector<int>> docs;
    long long d, w, n;
    while (c >> d >> w >> n) {
        if (d < 0 || n <= 0) throw DataError("bad counts triplet in " + dir);
        if (static_cast<std::size_t>(d) >= docs.size()) docs.resize(static_cast<std::size_t>(d) + 1);
        for (long long r = 0; r < n; ++r) docs[static_cast<std::size_t>(d)].push_back(static_cast<int>(w));
    }
    Corpus corpus = Corpus::from_docs(Vocabulary::from_terms(std::move(terms)), std::move(docs));
    std::ifstream p(fs::path(dir) / "partitions.txt");
    if (p) {
        std::string line;
        corpus.partitions.clear();
        while (std::getline(p, line)) corpus.partitions.push_back(line);
    }
    return corpus;
}

std::optional<FeatureMatrix> load_features(const std::string& dir) {
    const auto path = fs::path(dir) / "features.tsv";
    std::ifstream f(path);
    if (!f) return std::nullopt;
    FeatureMatrix fm;
    fm.values = read_dense_numeric(f, path.string());
    Corpus corpus = load_corpus(dir);
    if (static_cast<Eigen::Index>(corpus.vocab.terms.size()) != fm.values.cols())
        throw DataError("features.tsv column count does not match vocabulary in " + dir);
    fm.names = corpus.vocab.terms;
    return fm;
}

}  // namespace prism
