#pragma once

#include <functional>

#include "prism/corpus.hpp"
#include "prism/prior.hpp"

namespace prism {

struct LdaConfig {
    int K = 0;
    Eigen::VectorXd alpha;   // length K, document-topic Dirichlet
    DirichletParam beta;     // length V, topic-word Dirichlet
    int iterations = 1000;
    int burn_in = 200;
    int optimize_interval = 10;  // 0 disables alpha re-estimation
    std::uint64_t seed = 0;
    // Off by default: beta_hat stays fixed; when set, a single concentration
    // scalar multiplying beta_hat is re-estimated on the alpha schedule.
    bool optimize_beta_scale = false;

    // MALLET-style defaults: symmetric alpha with sum 5.
    static LdaConfig defaults(int K, DirichletParam beta, std::uint64_t seed);
    void validate(int vocab_size) const;
};

struct LdaState {
    std::vector<std::vector<int>> z;  // per-document topic assignment per token
    Eigen::MatrixXi ndk;              // D x K
    Eigen::MatrixXi nkw;              // K x V
    Eigen::VectorXi nk;               // K
};

struct TopicModel {
    Eigen::MatrixXd phi;    // K x V, row-stochastic
    Eigen::MatrixXd theta;  // D x K, row-stochastic

    // Ranked by phi descending, ties by term id.
    std::vector<std::vector<int>> top_words(int n) const;
};

using SweepObserver = std::function<void(int sweep, const LdaState&)>;

TopicModel train(const Corpus& corpus, const LdaConfig& config, LdaState* final_state = nullptr,
                 const SweepObserver& observer = nullptr);

// One Minka fixed-point update on the document-topic Dirichlet given the
// current count table; result clamped to >= 1e-6.
Eigen::VectorXd optimize_alpha(const LdaState& state, const Eigen::VectorXd& alpha,
                               const std::vector<int>& doc_lengths);

// Collapsed joint log p(w, z | alpha, beta) via log-gamma identities.
double log_joint(const LdaState& state, const LdaConfig& config);

}  // namespace prism
