#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "prism/pipeline.hpp"

namespace fs = std::filesystem;
using namespace prism;
using nlohmann::json;

namespace {

TopicWordLists load_topics_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open topics file: " + path);
    TopicWordLists lists;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, '\t');  // topic id
        std::vector<std::string> words;
        while (std::getline(ss, field, '\t')) {
            const auto space = field.find(' ');
            words.push_back(space == std::string::npos ? field : field.substr(0, space));
        }
        if (words.empty()) throw DataError("topics line has no words: " + line);
        lists.topics.push_back(std::move(words));
    }
    if (lists.topics.empty()) throw DataError("topics file is empty: " + path);
    lists.n = static_cast<int>(lists.topics[0].size());
    return lists;
}

std::unique_ptr<JudgeEndpoint> make_judge(const std::string& spec,
                                          const std::vector<WidInstance>& instances) {
    if (spec == "oracle") return std::make_unique<ScriptedJudge>(ScriptedJudge::oracle(instances));
    if (spec.rfind("random:", 0) == 0)
        return std::make_unique<UniformRandomJudge>(std::stoull(spec.substr(7)));
    if (spec.rfind("embed:", 0) == 0)
        return std::make_unique<EmbeddingJudge>(EmbeddingJudge::from_file(spec.substr(6)));
    if (spec.rfind("pipe:", 0) == 0) return std::make_unique<PipeJudge>(spec.substr(5));
    throw ConfigError("unknown judge spec: " + spec +
                      " (expected oracle | random:SEED | embed:FILE | pipe:CMD)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus-intrinsic topic modeling toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string g_config, g_out, g_mode = "prism";
    std::uint64_t g_seed = 1;
    app.add_option("--config", g_config, "Pipeline config file (key = value lines)");
    app.add_option("--seed", g_seed, "Seed override");
    app.add_option("--out", g_out, "Output path override");
    app.add_option("--mode", g_mode, "Pipeline mode override");

    // --- ingest ---
    auto* ingest = app.add_subcommand("ingest", "Ingest a corpus into the canonical directory format");
    std::string in_kind = "octis", in_input, in_vocab, in_genes;
    VocabFilters filters;
    ingest->add_option("--kind", in_kind, "octis | plaintext | expression")->capture_default_str();
    ingest->add_option("--input", in_input, "Corpus file or directory")->required();
    ingest->add_option("--vocab", in_vocab, "Vocabulary file (octis)");
    ingest->add_option("--genes", in_genes, "Gene name file (expression)");
    ingest->add_option("--min-chars", filters.min_chars)->capture_default_str();
    ingest->add_option("--min-words-docs", filters.min_words_docs)->capture_default_str();
    ingest->add_option("--min-df", filters.min_df)->capture_default_str();
    ingest->add_option("--max-df", filters.max_df)->capture_default_str();
    ingest->add_option("--max-features", filters.max_features)->capture_default_str();
    ingest->add_option("--stopwords", filters.stopword_file, "Stopword file override");
    ingest->callback([&] {
        if (g_out.empty()) throw ConfigError("ingest needs --out <dir>");
        if (in_kind == "octis") {
            save_corpus(ingest_octis(in_input, in_vocab), g_out);
        } else if (in_kind == "plaintext") {
            save_corpus(ingest_plaintext(in_input, filters), g_out);
        } else if (in_kind == "expression") {
            if (in_genes.empty()) throw ConfigError("expression ingest needs --genes");
            auto [corpus, features] = ingest_expression_matrix(in_input, in_genes);
            save_corpus(corpus, g_out, &features);
        } else {
            throw ConfigError("unknown ingest kind: " + in_kind);
        }
        std::cout << "corpus written to " << g_out << "\n";
    });

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted topics");
    int s_k = 5, s_v = 300, s_d = 500, s_len = 40;
    double s_alpha = 0.5, s_sparsity = 0.25;
    synth->add_option("--k", s_k)->capture_default_str();
    synth->add_option("--v", s_v)->capture_default_str();
    synth->add_option("--d", s_d)->capture_default_str();
    synth->add_option("--doc-len", s_len)->capture_default_str();
    synth->add_option("--alpha", s_alpha)->capture_default_str();
    synth->add_option("--sparsity", s_sparsity)->capture_default_str();
    synth->callback([&] {
        if (g_out.empty()) throw ConfigError("synth needs --out <dir>");
        SyntheticData data = generate_synthetic(s_k, s_v, s_d, s_len, s_alpha, s_sparsity, g_seed);
        save_corpus(data.corpus, g_out);
        save_matrix_binary(data.phi_star, (fs::path(g_out) / "phi_star.bin").string());
        save_matrix_binary(data.theta_star, (fs::path(g_out) / "theta_star.bin").string());
        std::cout << "synthetic corpus written to " << g_out << " (V=" << data.corpus.vocab_size()
                  << ", D=" << data.corpus.num_docs() << ")\n";
    });

    // --- prior ---
    auto* prior = app.add_subcommand("prior", "Derive a topic-word Dirichlet parameter file");
    std::string p_corpus, p_window = "document", p_embedding;
    int p_k = 10, p_m = 100, p_t = 1, p_vcap = 6000;
    double p_symmetric = 0.01;
    prior->add_option("--corpus", p_corpus, "Canonical corpus directory")->required();
    prior->add_option("--k", p_k, "Topic count for the GMM")->capture_default_str();
    prior->add_option("--m", p_m, "Embedding dimension")->capture_default_str();
    prior->add_option("--t", p_t, "Diffusion time")->capture_default_str();
    prior->add_option("--window", p_window, "document | sliding:<w> | neighborhood:<k>[:dims]")
        ->capture_default_str();
    prior->add_option("--v-cap", p_vcap)->capture_default_str();
    prior->add_option("--embedding", p_embedding, "External embedding file");
    prior->add_option("--symmetric-beta", p_symmetric)->capture_default_str();
    prior->callback([&] {
        if (g_out.empty()) throw ConfigError("prior needs --out <file>");
        PipelineConfig cfg;
        cfg.corpus_dir = p_corpus;
        cfg.mode = parse_mode(g_mode);
        cfg.window = p_window;
        cfg.embed_m = p_m;
        cfg.embed_t = p_t;
        cfg.v_cap = p_vcap;
        cfg.symmetric_beta = p_symmetric;
        cfg.external_embedding = p_embedding;

        Corpus corpus = load_corpus(p_corpus);
        UnigramDistribution uni = unigram(corpus);
        DirichletParam beta;
        switch (cfg.mode) {
            case PipelineMode::RandomPrior:
                beta = random_prior(corpus.vocab_size(), g_seed);
                break;
            case PipelineMode::PlainSymmetric:
                beta.beta = Eigen::VectorXd::Constant(corpus.vocab_size(), p_symmetric);
                break;
            case PipelineMode::ExternalEmbedding:
                beta = external_embedding_prior(p_embedding, corpus.vocab, uni, p_k, g_seed);
                break;
            default: {
                WindowStrategy strategy = WindowStrategy::document();
                if (p_window.rfind("sliding:", 0) == 0)
                    strategy = WindowStrategy::sliding(std::stoi(p_window.substr(8)));
                else if (p_window.rfind("neighborhood:", 0) == 0) {
                    auto features = load_features(p_corpus);
                    if (!features.has_value())
                        throw DataError("neighborhood window needs features.tsv in the corpus dir");
                    auto rest = p_window.substr(13);
                    int k = 0, dims = 50;
                    if (auto c = rest.find(':'); c != std::string::npos) {
                        k = std::stoi(rest.substr(0, c));
                        dims = std::stoi(rest.substr(c + 1));
                    } else {
                        k = std::stoi(rest);
                    }
                    dims = std::min<int>(dims, static_cast<int>(std::min(
                                                   features->values.rows(), features->values.cols())));
                    strategy = WindowStrategy::neighborhood(knn_neighborhoods(*features, k, dims));
                }
                PpmiMatrix pp = ppmi(corpus, strategy, p_vcap);
                SimilarityGraph graph = cfg.mode == PipelineMode::NoSoc ? first_order_graph(pp)
                                                                        : second_order_graph(pp);
                const int m_eff = std::min(p_m, corpus.vocab_size() - 2);
                DiffusionEmbedding emb = cfg.mode == PipelineMode::Svd
                                             ? svd_embed(graph, m_eff)
                                             : diffusion_embed(graph, m_eff, p_t);
                GmmModel gmm = fit_gmm(emb, p_k, g_seed);
                beta = estimate_beta(invert_to_topic_word(gmm, uni));
            }
        }
        save_beta(beta, g_out);
        std::cout << "beta written to " << g_out << " (V=" << beta.beta.size() << ")\n";
    });

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "Run the collapsed Gibbs sampler");
    std::string t_corpus, t_beta;
    int t_k = 10, t_iters = 1000, t_burn = 200, t_opt = 10, t_topn = 10;
    double t_alpha_sum = 5.0;
    bool t_opt_beta = false;
    train_cmd->add_option("--corpus", t_corpus)->required();
    train_cmd->add_option("--beta", t_beta, "Beta file (one value per line)")->required();
    train_cmd->add_option("--k", t_k)->capture_default_str();
    train_cmd->add_option("--iterations", t_iters)->capture_default_str();
    train_cmd->add_option("--burn-in", t_burn)->capture_default_str();
    train_cmd->add_option("--optimize-interval", t_opt)->capture_default_str();
    train_cmd->add_option("--alpha-sum", t_alpha_sum)->capture_default_str();
    train_cmd->add_option("--top-n", t_topn)->capture_default_str();
    train_cmd->add_flag("--optimize-beta-scale", t_opt_beta);
    train_cmd->callback([&] {
        if (g_out.empty()) throw ConfigError("train needs --out <dir>");
        fs::create_directories(g_out);
        Corpus corpus = load_corpus(t_corpus);
        LdaConfig cfg = LdaConfig::defaults(t_k, load_beta(t_beta), g_seed);
        cfg.iterations = t_iters;
        cfg.burn_in = t_burn;
        cfg.optimize_interval = t_opt;
        cfg.alpha = Eigen::VectorXd::Constant(t_k, t_alpha_sum / t_k);
        cfg.optimize_beta_scale = t_opt_beta;
        TopicModel model = train(corpus, cfg);
        save_matrix_binary(model.phi, (fs::path(g_out) / "phi.bin").string());
        save_matrix_binary(model.theta, (fs::path(g_out) / "theta.bin").string());
        std::ofstream topics(fs::path(g_out) / "topics.tsv");
        topics.precision(17);
        const auto tops = model.top_words(t_topn);
        for (std::size_t k = 0; k < tops.size(); ++k) {
            topics << k;
            for (int w : tops[k])
                topics << "\t" << corpus.vocab.terms[static_cast<std::size_t>(w)] << " "
                       << model.phi(static_cast<Eigen::Index>(k), w);
            topics << "\n";
        }
        json run;
        run["K"] = t_k;
        run["seed"] = g_seed;
        run["iterations"] = t_iters;
        run["beta_file"] = t_beta;
        std::ofstream mf(fs::path(g_out) / "run.json");
        mf << run.dump(2) << "\n";
        std::cout << "model written to " << g_out << "\n";
    });

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "Score topics (coherence, intrusion, gene sets)");
    std::string e_corpus, e_topics, e_metrics = "npmi,cv", e_phi, e_judge = "oracle", e_pathways;
    int e_cv_window = 110, e_wid_n = 10;
    long long e_universe = 0;
    bool e_wid = false, e_exclude_failures = false, e_size_weighted = false;
    eval_cmd->add_option("--corpus", e_corpus, "Reference corpus directory")->required();
    eval_cmd->add_option("--topics", e_topics, "topics.tsv from train");
    eval_cmd->add_option("--metrics", e_metrics)->capture_default_str();
    eval_cmd->add_option("--cv-window", e_cv_window)->capture_default_str();
    eval_cmd->add_flag("--wid", e_wid, "Run the word-intrusion harness");
    eval_cmd->add_option("--phi", e_phi, "phi.bin from train (needed for --wid)");
    eval_cmd->add_option("--wid-n", e_wid_n, "Top-word list size for intrusion")->capture_default_str();
    eval_cmd->add_option("--judge", e_judge, "oracle | random:SEED | embed:FILE | pipe:CMD")
        ->capture_default_str();
    eval_cmd->add_flag("--exclude-failures", e_exclude_failures);
    eval_cmd->add_option("--pathways", e_pathways, "Pathway DB: name<TAB>gene1,gene2,...");
    eval_cmd->add_option("--universe", e_universe, "Gene universe size N");
    eval_cmd->add_flag("--size-weighted-coverage", e_size_weighted);
    eval_cmd->callback([&] {
        Corpus corpus = load_corpus(e_corpus);
        if (!e_topics.empty()) {
            TopicWordLists lists = load_topics_tsv(e_topics);
            std::stringstream ms(e_metrics);
            std::string metric;
            while (std::getline(ms, metric, ',')) {
                if (metric == "npmi") {
                    auto s = npmi_score(lists, corpus, WindowStrategy::document());
                    std::cout << "npmi mean " << s.mean << "\n";
                    for (Eigen::Index i = 0; i < s.per_topic.size(); ++i)
                        std::cout << "npmi topic " << i << " " << s.per_topic[i] << "\n";
                } else if (metric == "cv") {
                    auto s = cv_score(lists, corpus, e_cv_window);
                    std::cout << "cv mean " << s.mean << "\n";
                    for (Eigen::Index i = 0; i < s.per_topic.size(); ++i)
                        std::cout << "cv topic " << i << " " << s.per_topic[i] << "\n";
                } else {
                    throw ConfigError("unknown metric: " + metric);
                }
            }
            if (!e_pathways.empty()) {
                auto features = load_features(e_corpus);
                if (!features.has_value())
                    throw DataError("gene-set metrics need features.tsv in the corpus dir");
                if (e_universe <= 0) e_universe = corpus.vocab_size();
                GeneSetReport report = gene_set_metrics(lists, *features, PathwayDB::load(e_pathways),
                                                        e_universe, 0.05, e_size_weighted);
                std::cout << gene_set_report_text(report);
            }
        }
        if (e_wid) {
            if (e_phi.empty()) throw ConfigError("--wid needs --phi");
            TopicModel model;
            model.phi = load_matrix_binary(e_phi);
            model.theta = Eigen::MatrixXd::Zero(1, model.phi.rows());
            auto instances = build_wid_instances(model, corpus.vocab, e_wid_n, g_seed);
            auto judge = make_judge(e_judge, instances);
            WidResult res = wid_accuracy(instances, *judge, {e_exclude_failures});
            std::cout << "wid n=" << e_wid_n << " accuracy " << res.accuracy << " (" << res.correct
                      << "/" << res.scored << ", failures " << res.failed << ")\n";
        }
    });

    // --- pipeline ---
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run the full ingest->prior->train->eval grid");
    std::vector<std::string> overrides;
    pipe_cmd->add_option("--set", overrides, "key=value config overrides (repeatable)");
    pipe_cmd->callback([&] {
        PipelineConfig cfg;
        if (!g_config.empty()) cfg = PipelineConfig::from_file(g_config);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + kv);
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (app.count("--mode") > 0) cfg.mode = parse_mode(g_mode);
        if (app.count("--out") > 0) cfg.out_dir = g_out;
        if (app.count("--seed") > 0) cfg.seeds = {g_seed};
        RunManifest manifest = run_pipeline(cfg);
        std::cout << "manifest written to "
                  << (fs::path(cfg.out_dir) / ("manifest-" + mode_name(cfg.mode) + ".json")).string()
                  << "\n";
        for (const auto& [metric, agg] : manifest.j.at("aggregate").items())
            std::cout << metric << " mean " << agg.at("mean").get<double>() << " std "
                      << agg.at("std").get<double>() << "\n";
    });

    // --- compare ---
    auto* compare_cmd = app.add_subcommand("compare", "Compare run manifests");
    std::vector<std::string> manifest_paths;
    compare_cmd->add_option("manifests", manifest_paths, "Manifest JSON files")->expected(-2);
    compare_cmd->callback([&] {
        std::vector<RunManifest> ms;
        for (const auto& p : manifest_paths) ms.push_back(RunManifest::load(p));
        std::cout << compare_runs(ms);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const StageError& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
