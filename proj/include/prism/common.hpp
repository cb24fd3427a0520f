#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prism {

// Exit-code categories used by the CLI (config=2, data=3, stage=4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void log_warn(const std::string& msg);

// mt19937_64 is bit-exact across standard libraries; the distributions below
// are hand-rolled so seeded streams do not depend on the stdlib either.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= bound);
    return v % n;
}

// Marsaglia polar method; the second variate is discarded to keep the
// draw count a pure function of the accept/reject history.
inline double normal_sample(Rng& rng) {
    for (;;) {
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

// Marsaglia-Tsang; shapes below 1 use the boost gamma(a) = gamma(a+1) u^{1/a}.
inline double gamma_sample(Rng& rng, double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma_sample: shape must be positive");
    if (shape < 1.0) {
        const double u = uniform01(rng);
        return gamma_sample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = normal_sample(rng);
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline Eigen::VectorXd dirichlet_sample(Rng& rng, const Eigen::VectorXd& alpha) {
    Eigen::VectorXd out(alpha.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        out[i] = gamma_sample(rng, alpha[i]);
        total += out[i];
    }
    if (total <= 0.0) {
        // All gammas underflowed (tiny shapes); fall back to the argmax trick.
        out.setZero();
        out[static_cast<Eigen::Index>(uniform_below(rng, alpha.size()))] = 1.0;
        return out;
    }
    return out / total;
}

// Linear-scan categorical draw over unnormalized nonnegative weights.
inline int sample_discrete(Rng& rng, std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01(rng) * total;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
        u -= weights[k];
        if (u < 0.0) return static_cast<int>(k);
    }
    return static_cast<int>(weights.size() - 1);
}

inline double digamma(double x) {
    double r = 0.0;
    while (x < 6.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    const double f = 1.0 / (x * x);
    return r + std::log(x) - 0.5 / x -
           f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
}

// FNV-1a; used for content-addressing pipeline artifacts, not security.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string digest_file(const std::string& path);
std::string digest_string(const std::string& s);

}  // namespace prism
