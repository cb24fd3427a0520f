#include "prism/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace prism {

PipelineMode parse_mode(const std::string& name) {
    if (name == "prism") return PipelineMode::Prism;
    if (name == "random_prior") return PipelineMode::RandomPrior;
    if (name == "no_soc") return PipelineMode::NoSoc;
    if (name == "svd") return PipelineMode::Svd;
    if (name == "external_embedding") return PipelineMode::ExternalEmbedding;
    if (name == "plain_symmetric") return PipelineMode::PlainSymmetric;
    throw ConfigError("unknown mode: " + name);
}

std::string mode_name(PipelineMode mode) {
    switch (mode) {
        case PipelineMode::Prism: return "prism";
        case PipelineMode::RandomPrior: return "random_prior";
        case PipelineMode::NoSoc: return "no_soc";
        case PipelineMode::Svd: return "svd";
        case PipelineMode::ExternalEmbedding: return "external_embedding";
        case PipelineMode::PlainSymmetric: return "plain_symmetric";
    }
    throw ConfigError("unknown mode");
}

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("expected a boolean, got: " + v);
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    try {
        if (key == "corpus") corpus_dir = value;
        else if (key == "mode") mode = parse_mode(value);
        else if (key == "external_embedding") external_embedding = value;
        else if (key == "window") window = value;
        else if (key == "neighborhood_weighting") neighborhood_weighting = value;
        else if (key == "v_cap") v_cap = std::stoi(value);
        else if (key == "embed_m") embed_m = std::stoi(value);
        else if (key == "embed_t") embed_t = std::stoi(value);
        else if (key == "grid_m") {
            grid_m.clear();
            for (const auto& s : split_csv(value)) grid_m.push_back(std::stoi(s));
        } else if (key == "beta_floor") beta_floor = std::stod(value);
        else if (key == "beta_cap") beta_cap = std::stod(value);
        else if (key == "symmetric_beta") symmetric_beta = std::stod(value);
        else if (key == "k_list") {
            k_list.clear();
            for (const auto& s : split_csv(value)) k_list.push_back(std::stoi(s));
        } else if (key == "seeds") {
            seeds.clear();
            for (const auto& s : split_csv(value)) seeds.push_back(std::stoull(s));
        } else if (key == "iterations") iterations = std::stoi(value);
        else if (key == "burn_in") burn_in = std::stoi(value);
        else if (key == "optimize_interval") optimize_interval = std::stoi(value);
        else if (key == "alpha_sum") alpha_sum = std::stod(value);
        else if (key == "optimize_beta_scale") optimize_beta_scale = parse_bool(value);
        else if (key == "top_n") top_n = std::stoi(value);
        else if (key == "cv_window") cv_window = std::stoi(value);
        else if (key == "metrics") metrics = split_csv(value);
        else if (key == "out") out_dir = value;
        else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw ConfigError("value out of range for " + key + ": " + value);
    }
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key = value");
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

void PipelineConfig::validate() const {
    if (corpus_dir.empty()) throw ConfigError("config is missing 'corpus'");
    if (k_list.empty()) throw ConfigError("k_list must be nonempty");
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (seeds.empty() || distinct.size() != seeds.size())
        throw ConfigError("seeds must be nonempty and distinct");
    if (mode == PipelineMode::ExternalEmbedding && external_embedding.empty())
        throw ConfigError("external_embedding mode needs the external_embedding path");
    if (iterations < 1 || burn_in < 0 || burn_in >= iterations)
        throw ConfigError("need iterations >= 1 and burn_in in [0, iterations)");
    for (const auto& m : metrics)
        if (m != "npmi" && m != "cv") throw ConfigError("unknown metric: " + m);
    if (metrics.empty()) throw ConfigError("metrics must be nonempty");
    if (neighborhood_weighting != "presence" && neighborhood_weighting != "counts")
        throw ConfigError("neighborhood_weighting must be presence or counts");
}

json PipelineConfig::resolved() const {
    json c;
    c["corpus"] = corpus_dir;
    c["mode"] = mode_name(mode);
    c["external_embedding"] = external_embedding;
    c["window"] = window;
    c["neighborhood_weighting"] = neighborhood_weighting;
    c["v_cap"] = v_cap;
    c["embed_m"] = embed_m;
    c["embed_t"] = embed_t;
    c["grid_m"] = grid_m;
    c["beta_floor"] = beta_floor;
    c["beta_cap"] = beta_cap;
    c["symmetric_beta"] = symmetric_beta;
    c["k_list"] = k_list;
    c["seeds"] = seeds;
    c["iterations"] = iterations;
    c["burn_in"] = burn_in;
    c["optimize_interval"] = optimize_interval;
    c["alpha_sum"] = alpha_sum;
    c["optimize_beta_scale"] = optimize_beta_scale;
    c["top_n"] = top_n;
    c["cv_window"] = cv_window;
    c["metrics"] = metrics;
    c["out"] = out_dir;
    return c;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    RunManifest m;
    in >> m.j;
    return m;
}

namespace {

struct StageTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

WindowStrategy make_window_strategy(const PipelineConfig& cfg, const Corpus& corpus,
                                    const std::string& out_dir) {
    if (cfg.window == "document") return WindowStrategy::document();
    if (cfg.window.rfind("sliding:", 0) == 0)
        return WindowStrategy::sliding(std::stoi(cfg.window.substr(8)));
    if (cfg.window.rfind("neighborhood:", 0) == 0) {
        auto rest = cfg.window.substr(13);
        int k = 0, pca_dims = 50;
        if (auto colon = rest.find(':'); colon != std::string::npos) {
            k = std::stoi(rest.substr(0, colon));
            pca_dims = std::stoi(rest.substr(colon + 1));
        } else {
            k = std::stoi(rest);
        }
        auto features = load_features(cfg.corpus_dir);
        if (!features.has_value())
            throw DataError("neighborhood window needs features.tsv in the corpus directory");
        pca_dims = std::min<int>(pca_dims, static_cast<int>(std::min(features->values.rows(),
                                                                     features->values.cols())));
        auto sets = knn_neighborhoods(*features, k, pca_dims);
        save_neighborhoods(sets, (fs::path(out_dir) / "neighborhoods.txt").string());
        const auto weighting = cfg.neighborhood_weighting == "counts"
                                   ? WindowStrategy::NeighborhoodWeighting::Counts
                                   : WindowStrategy::NeighborhoodWeighting::Presence;
        return WindowStrategy::neighborhood(std::move(sets), weighting);
    }
    throw ConfigError("unknown window spec: " + cfg.window);
}

// Content-addressed artifact path for a stage output.
std::string cache_path(const std::string& out_dir, const std::string& stage,
                       const std::string& key_material, const std::string& ext) {
    fs::create_directories(fs::path(out_dir) / "artifacts");
    const std::string key = digest_string(stage + "|" + key_material);
    return (fs::path(out_dir) / "artifacts" / (stage + "-" + key + ext)).string();
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir);

    RunManifest manifest;
    manifest.j["config"] = config.resolved();
    manifest.j["mode"] = mode_name(config.mode);
    json& stages = manifest.j["stages"];

    const bool needs_embedding = config.mode == PipelineMode::Prism ||
                                 config.mode == PipelineMode::NoSoc ||
                                 config.mode == PipelineMode::Svd;

    // --- ingestion ---
    StageTimer t_corpus;
    Corpus corpus = [&] {
        try {
            return load_corpus(config.corpus_dir);
        } catch (const DataError& e) {
            throw StageError(std::string("stage corpus failed: ") + e.what());
        }
    }();
    const std::string corpus_digest =
        digest_string(digest_file((fs::path(config.corpus_dir) / "vocabulary.txt").string()) +
                      digest_file((fs::path(config.corpus_dir) / "counts.tsv").string()));
    stages["corpus"]["digest"] = corpus_digest;
    stages["corpus"]["path"] = config.corpus_dir;
    stages["corpus"]["seconds"] = t_corpus.seconds();

    StageTimer t_unigram;
    UnigramDistribution uni = unigram(corpus);
    const std::string unigram_path = cache_path(config.out_dir, "unigram", corpus_digest, ".bin");
    if (!fs::exists(unigram_path)) save_matrix_binary(uni.p, unigram_path);
    stages["unigram"]["digest"] = digest_file(unigram_path);
    stages["unigram"]["path"] = unigram_path;
    stages["unigram"]["seconds"] = t_unigram.seconds();

    const int V = corpus.vocab_size();

    // --- shared embedding-side stages ---
    DiffusionEmbedding embedding;
    std::string embedding_digest;
    double embedding_seconds = 0.0;
    if (needs_embedding) {
        try {
            StageTimer t_ppmi;
            WindowStrategy strategy = make_window_strategy(config, corpus, config.out_dir);
            const std::string ppmi_key = corpus_digest + "|" + config.window + "|" +
                                         config.neighborhood_weighting + "|" +
                                         std::to_string(config.v_cap);
            const std::string ppmi_path = cache_path(config.out_dir, "ppmi", ppmi_key, ".bin");
            PpmiMatrix pp;
            if (fs::exists(ppmi_path)) {
                pp.m = load_matrix_binary(ppmi_path);
            } else {
                pp = ppmi(corpus, strategy, config.v_cap);
                save_matrix_binary(pp.m, ppmi_path);
            }
            stages["ppmi"]["digest"] = digest_file(ppmi_path);
            stages["ppmi"]["path"] = ppmi_path;
            stages["ppmi"]["seconds"] = t_ppmi.seconds();

            StageTimer t_graph;
            const bool second_order = config.mode != PipelineMode::NoSoc;
            const std::string graph_key =
                stages["ppmi"]["digest"].get<std::string>() + "|" + (second_order ? "soc" : "ppmi");
            const std::string graph_path = cache_path(config.out_dir, "graph", graph_key, ".bin");
            SimilarityGraph graph;
            graph.kind = second_order ? SimilarityGraph::Kind::SecondOrderCosine
                                      : SimilarityGraph::Kind::FirstOrderPpmi;
            if (fs::exists(graph_path)) {
                graph.w = load_matrix_binary(graph_path);
            } else {
                graph = second_order ? second_order_graph(pp) : first_order_graph(pp);
                save_matrix_binary(graph.w, graph_path);
            }
            stages["graph"]["digest"] = digest_file(graph_path);
            stages["graph"]["path"] = graph_path;
            stages["graph"]["seconds"] = t_graph.seconds();

            StageTimer t_embed;
            const int m_eff = std::min(config.embed_m, V - 2);
            if (m_eff < 1) throw ConfigError("vocabulary too small for an embedding");
            const bool use_svd = config.mode == PipelineMode::Svd;
            const std::string embed_key = stages["graph"]["digest"].get<std::string>() + "|" +
                                          (use_svd ? "svd" : "dm") + "|m=" + std::to_string(m_eff) +
                                          "|t=" + std::to_string(config.embed_t);
            const std::string embed_path = cache_path(config.out_dir, "embedding", embed_key, ".bin");
            if (fs::exists(embed_path)) {
                embedding.coords = load_matrix_binary(embed_path);
                embedding.m = static_cast<int>(embedding.coords.cols());
                embedding.t = config.embed_t;
            } else {
                embedding = use_svd ? svd_embed(graph, m_eff)
                                    : diffusion_embed(graph, m_eff, config.embed_t);
                save_matrix_binary(embedding.coords, embed_path);
            }
            embedding_seconds = t_embed.seconds();
            embedding_digest = digest_file(embed_path);
            stages["embedding"]["digest"] = embedding_digest;
            stages["embedding"]["path"] = embed_path;
            stages["embedding"]["seconds"] = embedding_seconds;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(std::string("embedding stages failed: ") + e.what());
        }
    }

    // --- per-(K, seed) grid ---
    PriorOptions prior_opts{config.beta_floor, config.beta_cap};
    json runs = json::array();
    std::map<std::string, std::vector<double>> metric_values;
    std::map<std::string, std::map<int, std::vector<double>>> metric_by_k;

    for (int K : config.k_list) {
        for (std::uint64_t seed : config.seeds) {
            json run;
            run["K"] = K;
            run["seed"] = seed;
            StageTimer t_cell;

            DirichletParam beta;
            StageTimer t_prior;
            try {
                switch (config.mode) {
                    case PipelineMode::Prism:
                    case PipelineMode::NoSoc:
                    case PipelineMode::Svd: {
                        GmmModel gmm = fit_gmm(embedding, K, seed);
                        beta = estimate_beta(invert_to_topic_word(gmm, uni), prior_opts);
                        break;
                    }
                    case PipelineMode::ExternalEmbedding:
                        beta = external_embedding_prior(config.external_embedding, corpus.vocab, uni,
                                                        K, seed, 0.9, {}, prior_opts);
                        break;
                    case PipelineMode::RandomPrior:
                        beta = random_prior(V, seed, prior_opts);
                        break;
                    case PipelineMode::PlainSymmetric:
                        beta.beta = Eigen::VectorXd::Constant(V, config.symmetric_beta);
                        break;
                }
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw StageError("stage prior failed for K=" + std::to_string(K) +
                                 " seed=" + std::to_string(seed) + ": " + e.what());
            }
            run["prior_seconds"] = t_prior.seconds();

            const std::string beta_path =
                (fs::path(config.out_dir) /
                 ("beta-" + mode_name(config.mode) + "-K" + std::to_string(K) + "-s" +
                  std::to_string(seed) + ".txt"))
                    .string();
            save_beta(beta, beta_path);
            run["beta_digest"] = digest_file(beta_path);
            run["beta_path"] = beta_path;

            StageTimer t_train;
            TopicModel model;
            try {
                LdaConfig lda = LdaConfig::defaults(K, beta, seed);
                lda.iterations = config.iterations;
                lda.burn_in = config.burn_in;
                lda.optimize_interval = config.optimize_interval;
                lda.alpha = Eigen::VectorXd::Constant(K, config.alpha_sum / K);
                lda.optimize_beta_scale = config.optimize_beta_scale;
                model = train(corpus, lda);
            } catch (const std::exception& e) {
                throw StageError("stage train failed for K=" + std::to_string(K) +
                                 " seed=" + std::to_string(seed) + ": " + e.what());
            }
            run["train_seconds"] = t_train.seconds();

            const std::string cell =
                mode_name(config.mode) + "-K" + std::to_string(K) + "-s" + std::to_string(seed);
            const std::string phi_path = (fs::path(config.out_dir) / ("phi-" + cell + ".bin")).string();
            const std::string theta_path =
                (fs::path(config.out_dir) / ("theta-" + cell + ".bin")).string();
            save_matrix_binary(model.phi, phi_path);
            save_matrix_binary(model.theta, theta_path);
            run["phi_digest"] = digest_file(phi_path);
            run["theta_digest"] = digest_file(theta_path);

            const std::string topics_path =
                (fs::path(config.out_dir) / ("topics-" + cell + ".tsv")).string();
            {
                std::ofstream t(topics_path);
                t.precision(17);
                const auto tops = model.top_words(config.top_n);
                for (std::size_t k = 0; k < tops.size(); ++k) {
                    t << k;
                    for (int w : tops[k])
                        t << "\t" << corpus.vocab.terms[static_cast<std::size_t>(w)] << " "
                          << model.phi(static_cast<Eigen::Index>(k), w);
                    t << "\n";
                }
            }
            run["topics_digest"] = digest_file(topics_path);

            StageTimer t_eval;
            try {
                TopicWordLists lists = TopicWordLists::from_model(model, corpus.vocab, config.top_n);
                for (const auto& metric : config.metrics) {
                    if (metric == "npmi")
                        run["metrics"]["npmi"] =
                            npmi_score(lists, corpus, WindowStrategy::document()).mean;
                    else if (metric == "cv")
                        run["metrics"]["cv"] = cv_score(lists, corpus, config.cv_window).mean;
                }
            } catch (const std::exception& e) {
                throw StageError("stage eval failed for K=" + std::to_string(K) +
                                 " seed=" + std::to_string(seed) + ": " + e.what());
            }
            run["eval_seconds"] = t_eval.seconds();
            run["seconds"] = t_cell.seconds();

            for (const auto& metric : config.metrics) {
                const double v = run["metrics"][metric].get<double>();
                metric_values[metric].push_back(v);
                metric_by_k[metric][K].push_back(v);
            }
            runs.push_back(std::move(run));
        }
    }
    manifest.j["runs"] = runs;
    manifest.j["embedding_seconds"] = embedding_seconds;

    json agg;
    for (const auto& [metric, values] : metric_values) {
        agg[metric]["mean"] = mean_of(values);
        agg[metric]["std"] = std_of(values);
        for (const auto& [K, kv] : metric_by_k[metric]) {
            agg[metric]["per_k"][std::to_string(K)]["mean"] = mean_of(kv);
            agg[metric]["per_k"][std::to_string(K)]["std"] = std_of(kv);
        }
    }
    manifest.j["aggregate"] = agg;

    manifest.save((fs::path(config.out_dir) / ("manifest-" + mode_name(config.mode) + ".json")).string());
    return manifest;
}

SyntheticData generate_synthetic(int K, int V, int D, int doc_len, double alpha,
                                 double topic_sparsity, std::uint64_t seed) {
    if (K < 1 || V < 2 || D < 1 || doc_len < 1 || alpha <= 0.0)
        throw ConfigError("synthetic parameters must be positive");
    if (!(topic_sparsity > 0.0 && topic_sparsity <= 1.0))
        throw ConfigError("topic_sparsity must lie in (0, 1]");
    const int support = static_cast<int>(std::llround(topic_sparsity * V));
    if (support < 1) throw ConfigError("topic_sparsity * V is below one word");

    Rng rng(seed);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(K, V);
    const int offset = std::max(1, V / K);
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd draw = dirichlet_sample(rng, Eigen::VectorXd::Ones(support));
        for (int s = 0; s < support; ++s) phi(k, (k * offset + s) % V) = draw[s];
    }

    Eigen::MatrixXd theta(D, K);
    const Eigen::VectorXd alpha_vec = Eigen::VectorXd::Constant(K, alpha);
    std::vector<std::vector<int>> docs(static_cast<std::size_t>(D));
    std::vector<Eigen::VectorXd> phi_cdf(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXd cdf(V);
        double acc = 0.0;
        for (int w = 0; w < V; ++w) {
            acc += phi(k, w);
            cdf[w] = acc;
        }
        phi_cdf[static_cast<std::size_t>(k)] = cdf;
    }
    for (int d = 0; d < D; ++d) {
        theta.row(d) = dirichlet_sample(rng, alpha_vec).transpose();
        Eigen::VectorXd tcdf(K);
        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
            acc += theta(d, k);
            tcdf[k] = acc;
        }
        auto& doc = docs[static_cast<std::size_t>(d)];
        doc.reserve(static_cast<std::size_t>(doc_len));
        for (int i = 0; i < doc_len; ++i) {
            const double uz = uniform01(rng) * tcdf[K - 1];
            int z = 0;
            while (z < K - 1 && tcdf[z] <= uz) ++z;
            const auto& cdf = phi_cdf[static_cast<std::size_t>(z)];
            const double uw = uniform01(rng) * cdf[V - 1];
            int w = 0;
            while (w < V - 1 && cdf[w] <= uw) ++w;
            doc.push_back(w);
        }
    }

    // Words never sampled are pruned so the corpus keeps its no-zero-count
    // invariant; ground-truth matrices follow the same column subset.
    std::vector<bool> used(static_cast<std::size_t>(V), false);
    for (const auto& doc : docs)
        for (int w : doc) used[static_cast<std::size_t>(w)] = true;
    std::vector<int> remap(static_cast<std::size_t>(V), -1);
    std::vector<std::string> terms;
    for (int w = 0; w < V; ++w) {
        if (!used[static_cast<std::size_t>(w)]) continue;
        remap[static_cast<std::size_t>(w)] = static_cast<int>(terms.size());
        char buf[16];
        std::snprintf(buf, sizeof buf, "w%05d", w);
        terms.emplace_back(buf);
    }
    for (auto& doc : docs)
        for (int& w : doc) w = remap[static_cast<std::size_t>(w)];

    SyntheticData out;
    out.theta_star = theta;
    out.phi_star.resize(K, static_cast<Eigen::Index>(terms.size()));
    for (int w = 0, col = 0; w < V; ++w) {
        if (remap[static_cast<std::size_t>(w)] < 0) continue;
        out.phi_star.col(col++) = phi.col(w);
    }
    for (int k = 0; k < K; ++k) out.phi_star.row(k) /= out.phi_star.row(k).sum();
    out.corpus = Corpus::from_docs(Vocabulary::from_terms(std::move(terms)), std::move(docs));
    return out;
}

double matched_topic_cosine(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& phi_star) {
    if (phi.cols() != phi_star.cols()) throw ConfigError("topic matrices have different vocabularies");
    const int K = static_cast<int>(phi.rows());
    const int Kt = static_cast<int>(phi_star.rows());
    Eigen::MatrixXd cos(K, Kt);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < Kt; ++b) {
            const double na = phi.row(a).norm(), nb = phi_star.row(b).norm();
            cos(a, b) = na > 0.0 && nb > 0.0 ? phi.row(a).dot(phi_star.row(b)) / (na * nb) : 0.0;
        }
    std::vector<bool> used_a(static_cast<std::size_t>(K), false), used_b(static_cast<std::size_t>(Kt), false);
    const int pairs = std::min(K, Kt);
    double total = 0.0;
    for (int p = 0; p < pairs; ++p) {
        double best = -2.0;
        int ba = -1, bb = -1;
        for (int a = 0; a < K; ++a) {
            if (used_a[static_cast<std::size_t>(a)]) continue;
            for (int b = 0; b < Kt; ++b) {
                if (used_b[static_cast<std::size_t>(b)]) continue;
                if (cos(a, b) > best) {
                    best = cos(a, b);
                    ba = a;
                    bb = b;
                }
            }
        }
        used_a[static_cast<std::size_t>(ba)] = true;
        used_b[static_cast<std::size_t>(bb)] = true;
        total += best;
    }
    return total / pairs;
}

std::string compare_runs(const std::vector<RunManifest>& manifests) {
    if (manifests.size() < 2) throw ConfigError("compare needs at least two manifests");

    std::vector<std::string> metrics;
    for (const auto& [metric, v] : manifests[0].j.at("aggregate").items()) metrics.push_back(metric);
    for (const auto& m : manifests) {
        std::vector<std::string> got;
        for (const auto& [metric, v] : m.j.at("aggregate").items()) got.push_back(metric);
        if (got != metrics) throw ConfigError("manifests have mismatched metric sets");
    }

    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    for (const auto& metric : metrics) {
        out << "metric " << metric << "\n";
        std::vector<std::pair<double, std::size_t>> means;
        for (std::size_t i = 0; i < manifests.size(); ++i) {
            const auto& agg = manifests[i].j.at("aggregate").at(metric);
            means.emplace_back(agg.at("mean").get<double>(), i);
        }
        auto ranked = means;
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; i < manifests.size(); ++i) {
            const auto& m = manifests[i];
            const auto& agg = m.j.at("aggregate").at(metric);
            std::string flag;
            if (ranked[0].second == i) flag = " [best]";
            else if (manifests.size() > 1 && ranked[1].second == i) flag = " [second]";
            out << "  " << m.j.at("mode").get<std::string>() << "\t" << agg.at("mean").get<double>()
                << " (" << agg.at("std").get<double>() << ")" << flag << "\n";
        }
        for (std::size_t a = 0; a < manifests.size(); ++a)
            for (std::size_t b = a + 1; b < manifests.size(); ++b) {
                const double diff = means[a].first - means[b].first;
                out << "  diff " << manifests[a].j.at("mode").get<std::string>() << " - "
                    << manifests[b].j.at("mode").get<std::string>() << " = " << diff
                    << (diff > 0 ? " (+)" : diff < 0 ? " (-)" : " (=)") << "\n";
            }
    }
    return out.str();
}

}  // namespace prism
