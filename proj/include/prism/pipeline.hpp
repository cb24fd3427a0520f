#pragma once

#include "json.hpp"
#include "prism/evaluation.hpp"
#include "prism/prior.hpp"
#include "prism/sampler.hpp"

namespace prism {

enum class PipelineMode { Prism, RandomPrior, NoSoc, Svd, ExternalEmbedding, PlainSymmetric };

PipelineMode parse_mode(const std::string& name);
std::string mode_name(PipelineMode mode);

struct PipelineConfig {
    std::string corpus_dir;          // canonical corpus directory
    PipelineMode mode = PipelineMode::Prism;
    std::string external_embedding;  // required for external_embedding mode

    std::string window = "document";  // document | sliding:<w> | neighborhood:<k>[:pca_dims]
    std::string neighborhood_weighting = "presence";  // presence | counts
    int v_cap = 6000;

    int embed_m = 100;
    int embed_t = 1;
    std::vector<int> grid_m;  // optional coherence-driven grid search over m

    double beta_floor = 1e-4;
    double beta_cap = 1e4;
    double symmetric_beta = 0.01;  // plain_symmetric constant

    std::vector<int> k_list = {5};
    std::vector<std::uint64_t> seeds = {1};
    int iterations = 1000;
    int burn_in = 200;
    int optimize_interval = 10;
    double alpha_sum = 5.0;
    bool optimize_beta_scale = false;

    int top_n = 10;
    int cv_window = 110;
    std::vector<std::string> metrics = {"npmi", "cv"};

    std::string out_dir = "runs";

    static PipelineConfig from_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    void validate() const;
    nlohmann::json resolved() const;
};

struct RunManifest {
    nlohmann::json j;

    void save(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

RunManifest run_pipeline(const PipelineConfig& config);

struct SyntheticData {
    Corpus corpus;
    Eigen::MatrixXd phi_star;    // K x V over the retained vocabulary
    Eigen::MatrixXd theta_star;  // D x K
};

// Documents drawn by the standard generative process; each topic's support is
// a contiguous (wrapping) block of round(topic_sparsity * V) words.
SyntheticData generate_synthetic(int K, int V, int D, int doc_len, double alpha,
                                 double topic_sparsity, std::uint64_t seed);

std::string compare_runs(const std::vector<RunManifest>& manifests);

// Greedy topic-to-truth matching; returns the mean cosine over matched pairs.
double matched_topic_cosine(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& phi_star);

}  // namespace prism
