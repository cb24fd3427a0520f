#include "prism/prior.hpp"

#include <fstream>
#include <sstream>

namespace prism {

namespace {

// k-means++ seeding; every center is a data point.
Eigen::MatrixXd kmeanspp_centers(const Eigen::MatrixXd& x, int K, Rng& rng) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd centers(K, x.cols());
    centers.row(0) = x.row(static_cast<Eigen::Index>(uniform_below(rng, static_cast<std::uint64_t>(n))));
    Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int k = 1; k < K; ++k) {
        const double total = d2.sum();
        Eigen::Index pick;
        if (total <= 0.0) {
            pick = static_cast<Eigen::Index>(uniform_below(rng, static_cast<std::uint64_t>(n)));
        } else {
            double u = uniform01(rng) * total;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                u -= d2[i];
                if (u < 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(k) = x.row(pick);
        d2 = d2.cwiseMin((x.rowwise() - centers.row(k)).rowwise().squaredNorm());
    }
    return centers;
}

// Row-wise log density of a diagonal Gaussian, up to nothing (full constant kept).
void log_gaussian(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& var,
                  Eigen::VectorXd& out) {
    const double c = -0.5 * static_cast<double>(x.cols()) * std::log(2.0 * M_PI) -
                     0.5 * var.array().log().sum();
    out = c - 0.5 * (((x.rowwise() - mean.transpose()).array().square()).rowwise() *
                     var.cwiseInverse().transpose().array())
                  .rowwise()
                  .sum();
}

}  // namespace

GmmModel fit_gmm(const Eigen::MatrixXd& points, int K, std::uint64_t seed, const GmmOptions& opts) {
    const Eigen::Index n = points.rows();
    const Eigen::Index dim = points.cols();
    if (K < 2) throw ConfigError("GMM requires K >= 2");
    if (static_cast<Eigen::Index>(K) > n) throw ConfigError("GMM requires K <= number of points");

    Rng rng(seed);
    GmmModel model;
    model.K = K;
    model.means = kmeanspp_centers(points, K, rng);
    model.covariances.resize(K, dim);
    model.weights.resize(K);

    // Hard-assign to the seeded centers for initial weights/covariances.
    {
        std::vector<std::vector<int>> members(static_cast<std::size_t>(K));
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = (points.row(i) - model.means.row(0)).squaredNorm();
            for (int k = 1; k < K; ++k) {
                const double d = (points.row(i) - model.means.row(k)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = k;
                }
            }
            members[static_cast<std::size_t>(best)].push_back(static_cast<int>(i));
        }
        for (int k = 0; k < K; ++k) {
            const auto& mem = members[static_cast<std::size_t>(k)];
            model.weights[k] = (static_cast<double>(mem.size()) + 1.0) / (static_cast<double>(n) + K);
            Eigen::VectorXd var = Eigen::VectorXd::Constant(dim, opts.cov_floor);
            if (mem.size() > 1) {
                Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
                for (int i : mem) mean += points.row(i).transpose();
                mean /= static_cast<double>(mem.size());
                var.setZero();
                for (int i : mem) var += (points.row(i).transpose() - mean).array().square().matrix();
                var /= static_cast<double>(mem.size());
                var = var.cwiseMax(opts.cov_floor);
            }
            model.covariances.row(k) = var.transpose();
        }
        model.weights /= model.weights.sum();
    }

    Eigen::MatrixXd log_resp(n, K);
    Eigen::VectorXd col(n);
    int reinits = 0;
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        // E-step.
        for (int k = 0; k < K; ++k) {
            log_gaussian(points, model.means.row(k), model.covariances.row(k), col);
            log_resp.col(k) = col.array() + std::log(model.weights[k]);
        }
        Eigen::VectorXd row_max = log_resp.rowwise().maxCoeff();
        Eigen::VectorXd log_norm =
            ((log_resp.colwise() - row_max).array().exp().rowwise().sum().log() + row_max.array())
                .matrix();
        const double ll = log_norm.sum();
        model.responsibilities = (log_resp.colwise() - log_norm).array().exp();
        model.ll_history.push_back(ll);
        model.log_likelihood = ll;

        // M-step.
        Eigen::VectorXd nk = model.responsibilities.colwise().sum();
        bool collapsed = false;
        for (int k = 0; k < K; ++k) {
            if (nk[k] / static_cast<double>(n) < opts.weight_floor) {
                if (++reinits > opts.max_reinits)
                    throw StageError("GMM component " + std::to_string(k) +
                                     " collapsed repeatedly; giving up");
                // Restart the component at the point farthest from all means.
                Eigen::Index far = 0;
                double best = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    double dmin = std::numeric_limits<double>::infinity();
                    for (int kk = 0; kk < K; ++kk)
                        dmin = std::min(dmin, (points.row(i) - model.means.row(kk)).squaredNorm());
                    if (dmin > best) {
                        best = dmin;
                        far = i;
                    }
                }
                log_warn("GMM component " + std::to_string(k) + " collapsed; reseeding");
                model.means.row(k) = points.row(far);
                model.covariances.row(k).setConstant(
                    std::max(opts.cov_floor, points.array().square().mean()));
                model.weights[k] = 1.0 / static_cast<double>(n);
                collapsed = true;
                continue;
            }
            model.weights[k] = nk[k] / static_cast<double>(n);
            Eigen::VectorXd mean =
                (model.responsibilities.col(k).transpose() * points).transpose() / nk[k];
            model.means.row(k) = mean.transpose();
            Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
            Eigen::VectorXd var =
                (centered.array().square().colwise() * model.responsibilities.col(k).array())
                    .colwise()
                    .sum()
                    .transpose() /
                nk[k];
            model.covariances.row(k) = var.cwiseMax(opts.cov_floor).transpose();
        }
        model.weights /= model.weights.sum();
        if (collapsed) {
            prev_ll = -std::numeric_limits<double>::infinity();
            continue;
        }
        if (iter > 0 && std::abs(ll - prev_ll) < opts.rel_tol * std::abs(prev_ll)) break;
        prev_ll = ll;
    }

    // Final E-step so the returned responsibilities match the returned parameters.
    for (int k = 0; k < K; ++k) {
        log_gaussian(points, model.means.row(k), model.covariances.row(k), col);
        log_resp.col(k) = col.array() + std::log(model.weights[k]);
    }
    Eigen::VectorXd row_max = log_resp.rowwise().maxCoeff();
    Eigen::VectorXd log_norm =
        ((log_resp.colwise() - row_max).array().exp().rowwise().sum().log() + row_max.array()).matrix();
    model.responsibilities = (log_resp.colwise() - log_norm).array().exp();
    model.log_likelihood = log_norm.sum();
    model.ll_history.push_back(model.log_likelihood);
    return model;
}

GmmModel fit_gmm(const DiffusionEmbedding& embedding, int K, std::uint64_t seed,
                 const GmmOptions& opts) {
    return fit_gmm(embedding.coords, K, seed, opts);
}

TopicWordMatrix invert_to_topic_word(const GmmModel& gmm, const UnigramDistribution& unigram) {
    const Eigen::Index V = gmm.responsibilities.rows();
    if (unigram.p.size() != V) throw DataError("unigram length does not match responsibilities");

    // x[z][w] proportional to p(z|w) p(w); rows renormalized explicitly so X is
    // a valid set of simplex samples regardless of the p(z) convention.
    TopicWordMatrix out;
    out.x = (gmm.responsibilities.transpose().array().rowwise() * unigram.p.transpose().array());
    for (int z = 0; z < gmm.K; ++z) {
        const double total = out.x.row(z).sum();
        if (total <= 0.0)
            throw StageError("topic " + std::to_string(z) + " has zero mass under Bayes inversion");
        out.x.row(z) /= total;
    }
    return out;
}

DirichletParam estimate_beta(const TopicWordMatrix& x, const PriorOptions& opts) {
    const Eigen::Index K = x.x.rows();
    const Eigen::Index V = x.x.cols();
    if (K < 2) throw ConfigError("estimate_beta requires K >= 2 simplex samples");

    DirichletParam out;
    out.beta.resize(V);
    for (Eigen::Index i = 0; i < V; ++i) {
        const double mu = x.x.col(i).mean();
        const double s2 = (x.x.col(i).array() - mu).square().sum() / static_cast<double>(K - 1);
        double beta;
        if (s2 < 1e-12) {
            beta = opts.beta_floor;
        } else {
            beta = mu * (mu * (1.0 - mu) / s2 - 1.0);
            if (!(beta > 0.0)) beta = opts.beta_floor;
        }
        out.beta[i] = std::clamp(beta, opts.beta_floor, opts.beta_cap);
    }
    return out;
}

DirichletParam random_prior(int V, std::uint64_t seed, const PriorOptions& opts) {
    if (V < 2) throw ConfigError("random_prior requires V >= 2");
    Rng rng(seed);
    DirichletParam out;
    out.beta.resize(V);
    for (int i = 0; i < V; ++i)
        out.beta[i] = opts.beta_floor + (1.0 - opts.beta_floor) * uniform01(rng);
    return out;
}

DirichletParam external_embedding_prior(const std::string& embedding_file, const Vocabulary& vocab,
                                        const UnigramDistribution& unigram, int K, std::uint64_t seed,
                                        double min_coverage, const GmmOptions& gmm_opts,
                                        const PriorOptions& prior_opts) {
    std::ifstream in(embedding_file);
    if (!in) throw DataError("cannot open embedding file: " + embedding_file);

    std::unordered_map<std::string, Eigen::VectorXd> vectors;
    std::string line;
    Eigen::Index dim = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string term;
        ss >> term;
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (dim < 0) {
            dim = static_cast<Eigen::Index>(vals.size());
            if (dim < 2) throw DataError("embedding dimension must be >= 2");
        } else if (static_cast<Eigen::Index>(vals.size()) != dim) {
            throw DataError("inconsistent embedding dimensions in " + embedding_file);
        }
        Eigen::VectorXd vec(dim);
        for (Eigen::Index i = 0; i < dim; ++i) vec[i] = vals[static_cast<std::size_t>(i)];
        vectors.emplace(term, std::move(vec));
    }
    if (vectors.empty()) throw DataError("embedding file has no vectors: " + embedding_file);

    const int V = vocab.size();
    int covered = 0;
    for (const auto& t : vocab.terms) covered += vectors.count(t) ? 1 : 0;
    const double coverage = static_cast<double>(covered) / V;
    if (coverage < min_coverage)
        throw DataError("embedding covers " + std::to_string(covered) + "/" + std::to_string(V) +
                        " vocabulary terms, below the required coverage");

    Eigen::VectorXd mean_vec = Eigen::VectorXd::Zero(dim);
    for (const auto& t : vocab.terms) {
        auto it = vectors.find(t);
        if (it != vectors.end()) mean_vec += it->second;
    }
    mean_vec /= static_cast<double>(covered);

    Eigen::MatrixXd points(V, dim);
    for (int i = 0; i < V; ++i) {
        auto it = vectors.find(vocab.terms[static_cast<std::size_t>(i)]);
        if (it == vectors.end()) {
            log_warn("term '" + vocab.terms[static_cast<std::size_t>(i)] +
                     "' missing from embedding; using the mean vector");
            points.row(i) = mean_vec.transpose();
        } else {
            points.row(i) = it->second.transpose();
        }
    }

    GmmModel gmm = fit_gmm(points, K, seed, gmm_opts);
    TopicWordMatrix x = invert_to_topic_word(gmm, unigram);
    return estimate_beta(x, prior_opts);
}

void save_beta(const DirichletParam& beta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < beta.beta.size(); ++i) out << beta.beta[i] << "\n";
}

DirichletParam load_beta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<double> vals;
    double v;
    while (in >> v) {
        if (!(v > 0.0)) throw DataError("beta file must contain strictly positive values");
        vals.push_back(v);
    }
    if (vals.empty()) throw DataError("beta file is empty: " + path);
    DirichletParam out;
    out.beta = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    return out;
}

}  // namespace prism
