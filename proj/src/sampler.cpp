#include "prism/sampler.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace prism {

LdaConfig LdaConfig::defaults(int K, DirichletParam beta, std::uint64_t seed) {
    LdaConfig c;
    c.K = K;
    c.alpha = Eigen::VectorXd::Constant(K, 5.0 / K);
    c.beta = std::move(beta);
    c.seed = seed;
    return c;
}

void LdaConfig::validate(int vocab_size) const {
    if (K < 1) throw ConfigError("K must be positive");
    if (alpha.size() != K || (alpha.array() <= 0.0).any())
        throw ConfigError("alpha must be a positive vector of length K");
    if (beta.beta.size() != vocab_size)
        throw ConfigError("beta length " + std::to_string(beta.beta.size()) +
                          " does not match vocabulary size " + std::to_string(vocab_size));
    if ((beta.beta.array() <= 0.0).any()) throw ConfigError("beta must be strictly positive");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) throw ConfigError("burn_in must lie in [0, iterations)");
    if (optimize_interval < 0) throw ConfigError("optimize_interval must be >= 0");
}

Eigen::VectorXd optimize_alpha(const LdaState& state, const Eigen::VectorXd& alpha,
                               const std::vector<int>& doc_lengths) {
    const int D = static_cast<int>(state.ndk.rows());
    const int K = static_cast<int>(state.ndk.cols());
    if (static_cast<int>(doc_lengths.size()) != D) throw ConfigError("doc_lengths size mismatch");

    const double alpha0 = alpha.sum();
    double denom = 0.0;
    for (int d = 0; d < D; ++d)
        denom += digamma(doc_lengths[static_cast<std::size_t>(d)] + alpha0) - digamma(alpha0);

    Eigen::VectorXd out(K);
    for (int k = 0; k < K; ++k) {
        double num = 0.0;
        for (int d = 0; d < D; ++d) {
            const int n = state.ndk(d, k);
            if (n > 0) num += digamma(n + alpha[k]) - digamma(alpha[k]);
        }
        const double v = denom > 0.0 ? alpha[k] * num / denom : alpha[k];
        out[k] = std::max(v, 1e-6);
    }
    return out;
}

namespace {

// Fixed-point update for a concentration scalar s on the fixed direction b:
// the Minka update applied to beta = s*b with all coordinates moved jointly.
double optimize_beta_scale_once(const LdaState& state, const Eigen::VectorXd& b, double s) {
    const int K = static_cast<int>(state.nkw.rows());
    const int V = static_cast<int>(state.nkw.cols());
    const double b0 = b.sum();
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += digamma(state.nk[k] + s * b0) - digamma(s * b0);
    denom *= b0;
    double num = 0.0;
    for (int k = 0; k < K; ++k)
        for (int w = 0; w < V; ++w) {
            const int n = state.nkw(k, w);
            if (n > 0) num += b[w] * (digamma(n + s * b[w]) - digamma(s * b[w]));
        }
    if (denom <= 0.0 || num <= 0.0) return s;
    return std::max(s * num / denom, 1e-8);
}

}  // namespace

TopicModel train(const Corpus& corpus, const LdaConfig& config, LdaState* final_state,
                 const SweepObserver& observer) {
    config.validate(corpus.vocab_size());
    const int D = corpus.num_docs();
    const int V = corpus.vocab_size();
    const int K = config.K;

    LdaState state;
    state.z.resize(static_cast<std::size_t>(D));
    state.ndk = Eigen::MatrixXi::Zero(D, K);
    state.nkw = Eigen::MatrixXi::Zero(K, V);
    state.nk = Eigen::VectorXi::Zero(K);

    Rng rng(config.seed);
    for (int d = 0; d < D; ++d) {
        const auto& doc = corpus.docs[static_cast<std::size_t>(d)];
        auto& zd = state.z[static_cast<std::size_t>(d)];
        zd.resize(doc.size());
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const int k = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(K)));
            zd[i] = k;
            ++state.ndk(d, k);
            ++state.nkw(k, doc[i]);
            ++state.nk[k];
        }
    }

    std::vector<int> doc_lengths(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d)
        doc_lengths[static_cast<std::size_t>(d)] = static_cast<int>(corpus.docs[static_cast<std::size_t>(d)].size());

    Eigen::VectorXd alpha = config.alpha;
    Eigen::VectorXd beta = config.beta.beta;
    double beta_scale = 1.0;
    double beta_sum = beta.sum();
    std::vector<double> weights(static_cast<std::size_t>(K));

    for (int sweep = 1; sweep <= config.iterations; ++sweep) {
        for (int d = 0; d < D; ++d) {
            const auto& doc = corpus.docs[static_cast<std::size_t>(d)];
            auto& zd = state.z[static_cast<std::size_t>(d)];
            for (std::size_t i = 0; i < doc.size(); ++i) {
                const int w = doc[i];
                const int old_k = zd[i];
                --state.ndk(d, old_k);
                --state.nkw(old_k, w);
                --state.nk[old_k];
                for (int k = 0; k < K; ++k) {
                    weights[static_cast<std::size_t>(k)] =
                        (state.ndk(d, k) + alpha[k]) * (state.nkw(k, w) + beta[w]) /
                        (state.nk[k] + beta_sum);
                }
                const int new_k = sample_discrete(rng, weights);
                zd[i] = new_k;
                ++state.ndk(d, new_k);
                ++state.nkw(new_k, w);
                ++state.nk[new_k];
            }
        }
#ifndef NDEBUG
        for (int k = 0; k < K; ++k)
            assert(std::isfinite((state.nk[k] + beta_sum)) && state.nk[k] >= 0);
#endif
        if (config.optimize_interval > 0 && sweep > config.burn_in &&
            sweep % config.optimize_interval == 0) {
            alpha = optimize_alpha(state, alpha, doc_lengths);
            if (config.optimize_beta_scale) {
                beta_scale = optimize_beta_scale_once(state, config.beta.beta, beta_scale);
                beta = beta_scale * config.beta.beta;
                beta_sum = beta.sum();
            }
        }
        if (observer) observer(sweep, state);
    }

    TopicModel model;
    model.phi.resize(K, V);
    for (int k = 0; k < K; ++k) {
        const double denom = state.nk[k] + beta_sum;
        for (int w = 0; w < V; ++w) model.phi(k, w) = (state.nkw(k, w) + beta[w]) / denom;
    }
    model.theta.resize(D, K);
    const double alpha_sum = alpha.sum();
    for (int d = 0; d < D; ++d) {
        const double denom = doc_lengths[static_cast<std::size_t>(d)] + alpha_sum;
        for (int k = 0; k < K; ++k) model.theta(d, k) = (state.ndk(d, k) + alpha[k]) / denom;
    }
    if (final_state != nullptr) *final_state = std::move(state);
    return model;
}

std::vector<std::vector<int>> TopicModel::top_words(int n) const {
    const int K = static_cast<int>(phi.rows());
    const int V = static_cast<int>(phi.cols());
    std::vector<std::vector<int>> out(static_cast<std::size_t>(K));
    std::vector<int> order(static_cast<std::size_t>(V));
    for (int k = 0; k < K; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (phi(k, a) != phi(k, b)) return phi(k, a) > phi(k, b);
            return a < b;
        });
        order.resize(static_cast<std::size_t>(std::min(n, V)));
        out[static_cast<std::size_t>(k)] = order;
        order.resize(static_cast<std::size_t>(V));
    }
    return out;
}

double log_joint(const LdaState& state, const LdaConfig& config) {
    const int D = static_cast<int>(state.ndk.rows());
    const int K = static_cast<int>(state.ndk.cols());
    const int V = static_cast<int>(state.nkw.cols());
    const Eigen::VectorXd& alpha = config.alpha;
    const Eigen::VectorXd& beta = config.beta.beta;
    const double alpha0 = alpha.sum();
    const double beta0 = beta.sum();

    double total = 0.0;
    for (int d = 0; d < D; ++d) {
        int len = 0;
        for (int k = 0; k < K; ++k) {
            const int n = state.ndk(d, k);
            len += n;
            if (n > 0) total += std::lgamma(n + alpha[k]) - std::lgamma(alpha[k]);
        }
        total += std::lgamma(alpha0) - std::lgamma(len + alpha0);
    }
    for (int k = 0; k < K; ++k) {
        total += std::lgamma(beta0) - std::lgamma(state.nk[k] + beta0);
        for (int w = 0; w < V; ++w) {
            const int n = state.nkw(k, w);
            if (n > 0) total += std::lgamma(n + beta[w]) - std::lgamma(beta[w]);
        }
    }
    return total;
}

}  // namespace prism
