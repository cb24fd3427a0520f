#pragma once

#include "prism/corpus.hpp"
#include "prism/spectral.hpp"

namespace prism {

struct GmmOptions {
    int max_iterations = 500;
    double rel_tol = 1e-5;       // relative log-likelihood change
    double cov_floor = 1e-6;     // diagonal covariance floor
    double weight_floor = 1e-8;  // below this a component counts as collapsed
    int max_reinits = 3;
};

struct GmmModel {
    int K = 0;
    Eigen::MatrixXd means;             // K x m
    Eigen::MatrixXd covariances;       // K x m diagonal entries
    Eigen::VectorXd weights;           // p(z)
    Eigen::MatrixXd responsibilities;  // V x K, rows sum to 1
    std::vector<double> ll_history;    // one entry per EM iteration
    double log_likelihood = 0.0;
};

struct TopicWordMatrix {
    Eigen::MatrixXd x;  // K x V, rows sum to 1
};

struct DirichletParam {
    Eigen::VectorXd beta;
};

struct PriorOptions {
    double beta_floor = 1e-4;
    double beta_cap = 1e4;
};

GmmModel fit_gmm(const Eigen::MatrixXd& points, int K, std::uint64_t seed,
                 const GmmOptions& opts = {});
GmmModel fit_gmm(const DiffusionEmbedding& embedding, int K, std::uint64_t seed,
                 const GmmOptions& opts = {});

TopicWordMatrix invert_to_topic_word(const GmmModel& gmm, const UnigramDistribution& unigram);

// Per-word moment matching over the K rows of X (unbiased variance):
// beta_i = mu_i * (mu_i (1 - mu_i) / s2_i - 1), clamped into [floor, cap].
DirichletParam estimate_beta(const TopicWordMatrix& x, const PriorOptions& opts = {});

DirichletParam random_prior(int V, std::uint64_t seed, const PriorOptions& opts = {});

DirichletParam external_embedding_prior(const std::string& embedding_file, const Vocabulary& vocab,
                                        const UnigramDistribution& unigram, int K, std::uint64_t seed,
                                        double min_coverage = 0.9, const GmmOptions& gmm_opts = {},
                                        const PriorOptions& prior_opts = {});

// One positive decimal per line, ordered by vocabulary id.
void save_beta(const DirichletParam& beta, const std::string& path);
DirichletParam load_beta(const std::string& path);

}  // namespace prism
