#pragma once

#include <memory>
#include <optional>

#include "prism/cooccurrence.hpp"
#include "prism/sampler.hpp"

namespace prism {

struct TopicWordLists {
    std::vector<std::vector<std::string>> topics;  // ranked, no duplicates within a topic
    int n = 0;

    static TopicWordLists from_model(const TopicModel& model, const Vocabulary& vocab, int n);
};

struct CoherenceScores {
    Eigen::VectorXd per_topic;
    double mean = 0.0;
};

// Pairwise NPMI averaged over unordered top-word pairs. Pairs that never share
// a window score -1; a 1e-12 smoothing is applied inside logs otherwise.
CoherenceScores npmi_score(const TopicWordLists& lists, const Corpus& reference,
                           const WindowStrategy& window);

// Mean over unordered pairs of NPMI(w_i,w_j) * cos(v_i,v_j), where v are NPMI
// context vectors from sliding-window co-occurrence (one-set segmentation).
CoherenceScores cv_score(const TopicWordLists& lists, const Corpus& reference,
                         int sliding_window = 110);

struct WidInstance {
    int id = 0;
    int topic_id = 0;
    std::vector<std::string> displayed_words;  // n topic words + 1 intruder, shuffled
    int intruder_index = 0;                    // 0-based position in displayed_words
    std::uint64_t seed = 0;
};

// Intruders are drawn (seeded) from other topics' top-n words, excluding words
// ranked in the target topic's top `high_rank_fraction` of the vocabulary.
std::vector<WidInstance> build_wid_instances(const TopicModel& model, const Vocabulary& vocab,
                                             int n, std::uint64_t seed,
                                             double high_rank_fraction = 0.5);

// Prompt with instructions, two worked examples and the 1-based numbered list.
std::string render_wid_prompt(const WidInstance& instance);

// Wire line: "<id>\t<prompt with \t,\n,\\ escaped>". Replies are
// "<id>\t<1-based index into the numbered list>".
std::string wid_request_line(const WidInstance& instance);

// Judges answer with the 1-based list position, or nullopt on failure.
class JudgeEndpoint {
  public:
    virtual ~JudgeEndpoint() = default;
    virtual std::optional<int> judge(const WidInstance& instance) = 0;
};

class ScriptedJudge : public JudgeEndpoint {
  public:
    explicit ScriptedJudge(std::unordered_map<int, int> answers) : answers_(std::move(answers)) {}
    std::optional<int> judge(const WidInstance& instance) override;

    // Always-correct script for calibrating the harness.
    static ScriptedJudge oracle(const std::vector<WidInstance>& instances);

  private:
    std::unordered_map<int, int> answers_;
};

class UniformRandomJudge : public JudgeEndpoint {
  public:
    explicit UniformRandomJudge(std::uint64_t seed) : rng_(seed) {}
    std::optional<int> judge(const WidInstance& instance) override;

  private:
    Rng rng_;
};

// Deterministic synthetic judge: answers the word whose mean cosine similarity
// to the rest of the list is smallest under a supplied embedding.
class EmbeddingJudge : public JudgeEndpoint {
  public:
    explicit EmbeddingJudge(std::unordered_map<std::string, Eigen::VectorXd> vectors)
        : vectors_(std::move(vectors)) {}
    static EmbeddingJudge from_file(const std::string& path);
    std::optional<int> judge(const WidInstance& instance) override;

  private:
    std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

// Line-delimited request/response against a subprocess (one per judge).
class PipeJudge : public JudgeEndpoint {
  public:
    explicit PipeJudge(const std::string& command, double timeout_seconds = 10.0);
    ~PipeJudge() override;
    std::optional<int> judge(const WidInstance& instance) override;

    PipeJudge(const PipeJudge&) = delete;
    PipeJudge& operator=(const PipeJudge&) = delete;

  private:
    int in_fd_ = -1;   // judge stdout
    int out_fd_ = -1;  // judge stdin
    long pid_ = -1;
    double timeout_seconds_;
    std::string buffer_;
};

struct WidOptions {
    bool exclude_failures = false;  // default: failures count as incorrect
};

struct WidResult {
    double accuracy = 0.0;
    int correct = 0;
    int scored = 0;
    int failed = 0;
};

WidResult wid_accuracy(const std::vector<WidInstance>& instances, JudgeEndpoint& judge,
                       const WidOptions& opts = {});

struct PathwayDB {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> members;

    // One pathway per line: "name<TAB>gene1,gene2,...".
    static PathwayDB load(const std::string& path);
};

struct TopicGeneSetStats {
    double coherence = 0.0;
    std::vector<std::pair<std::string, double>> enriched;  // q < threshold, ascending q
    double coverage = 0.0;
    std::optional<double> strength;  // -log10(min q); absent if nothing significant
};

struct GeneSetReport {
    std::vector<TopicGeneSetStats> per_topic;
    double mean_coherence = 0.0;
    double mean_coverage = 0.0;
    std::optional<double> mean_strength;
};

GeneSetReport gene_set_metrics(const TopicWordLists& lists, const FeatureMatrix& expression,
                               const PathwayDB& pathways, long long universe_size,
                               double q_threshold = 0.05, bool size_weighted_coverage = false);

std::string gene_set_report_text(const GeneSetReport& report);

double spearman_coherence(const std::vector<std::string>& genes, const FeatureMatrix& expression);

// One-sided tail P[X >= x] for overlap x of a size-K draw against an
// M-member pathway in a universe of N genes.
double hypergeom_upper_tail(long long x, long long N, long long M, long long K);

// Benjamini-Hochberg step-up; preserves input order.
std::vector<double> bh_adjust(const std::vector<double>& p);

}  // namespace prism
