#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prism/pipeline.hpp"

namespace py = pybind11;
using namespace prism;

namespace {

Corpus corpus_from_docs(const std::vector<std::string>& terms,
                        const std::vector<std::vector<int>>& docs) {
    return Corpus::from_docs(Vocabulary::from_terms(terms), docs);
}

WindowStrategy window_from_spec(const std::string& spec) {
    if (spec == "document") return WindowStrategy::document();
    if (spec.rfind("sliding:", 0) == 0) return WindowStrategy::sliding(std::stoi(spec.substr(8)));
    throw ConfigError("unknown window spec: " + spec);
}

}  // namespace

PYBIND11_MODULE(prism_topics, m) {
    m.doc() = "Corpus-intrinsic topic modeling: PPMI graphs, diffusion-map priors, Gibbs LDA";

    py::register_exception<ConfigError>(m, "PrismConfigError");
    py::register_exception<DataError>(m, "PrismDataError");
    py::register_exception<StageError>(m, "PrismStageError");

    py::class_<Corpus>(m, "Corpus")
        .def(py::init(&corpus_from_docs), py::arg("terms"), py::arg("docs"))
        .def_property_readonly("num_docs", &Corpus::num_docs)
        .def_property_readonly("vocab_size", &Corpus::vocab_size)
        .def_property_readonly("terms", [](const Corpus& c) { return c.vocab.terms; })
        .def_property_readonly("docs", [](const Corpus& c) { return c.docs; })
        .def_property_readonly("total_tokens", [](const Corpus& c) { return c.total_tokens; })
        .def("count", &Corpus::count, py::arg("doc"), py::arg("word"));

    m.def("load_corpus", &load_corpus, py::arg("directory"));
    m.def(
        "save_corpus",
        [](const Corpus& c, const std::string& dir) { save_corpus(c, dir); },
        py::arg("corpus"), py::arg("directory"));
    m.def("unigram", [](const Corpus& c) { return unigram(c).p; }, py::arg("corpus"));

    m.def(
        "ppmi",
        [](const Corpus& c, const std::string& window, int v_cap) {
            return ppmi(c, window_from_spec(window), v_cap).m;
        },
        py::arg("corpus"), py::arg("window") = "document", py::arg("v_cap") = 6000);

    m.def(
        "second_order_graph",
        [](const Eigen::MatrixXd& ppmi_matrix) {
            PpmiMatrix p;
            p.m = ppmi_matrix;
            return second_order_graph(p).w;
        },
        py::arg("ppmi"));

    py::class_<DiffusionEmbedding>(m, "DiffusionEmbedding")
        .def_readonly("coords", &DiffusionEmbedding::coords)
        .def_readonly("eigenvalues", &DiffusionEmbedding::eigenvalues)
        .def_readonly("t", &DiffusionEmbedding::t)
        .def_readonly("m", &DiffusionEmbedding::m);

    m.def(
        "diffusion_embed",
        [](const Eigen::MatrixXd& w, int m_dims, int t) {
            SimilarityGraph g;
            g.w = w;
            return diffusion_embed(g, m_dims, t);
        },
        py::arg("graph"), py::arg("m"), py::arg("t") = 1);
    m.def(
        "svd_embed",
        [](const Eigen::MatrixXd& w, int m_dims) {
            SimilarityGraph g;
            g.w = w;
            return svd_embed(g, m_dims);
        },
        py::arg("graph"), py::arg("m"));

    py::class_<GmmModel>(m, "GmmModel")
        .def_readonly("means", &GmmModel::means)
        .def_readonly("covariances", &GmmModel::covariances)
        .def_readonly("weights", &GmmModel::weights)
        .def_readonly("responsibilities", &GmmModel::responsibilities)
        .def_readonly("log_likelihood", &GmmModel::log_likelihood);

    m.def(
        "fit_gmm",
        [](const Eigen::MatrixXd& points, int K, std::uint64_t seed) {
            return fit_gmm(points, K, seed);
        },
        py::arg("points"), py::arg("K"), py::arg("seed"));

    m.def(
        "invert_to_topic_word",
        [](const GmmModel& gmm, const Eigen::VectorXd& p) {
            UnigramDistribution u{p};
            return invert_to_topic_word(gmm, u).x;
        },
        py::arg("gmm"), py::arg("unigram"));

    m.def(
        "estimate_beta",
        [](const Eigen::MatrixXd& x, double beta_floor, double beta_cap) {
            TopicWordMatrix t;
            t.x = x;
            return estimate_beta(t, {beta_floor, beta_cap}).beta;
        },
        py::arg("topic_word"), py::arg("beta_floor") = 1e-4, py::arg("beta_cap") = 1e4);

    m.def(
        "random_prior",
        [](int V, std::uint64_t seed) { return random_prior(V, seed).beta; }, py::arg("V"),
        py::arg("seed"));

    // Convenience: PPMI -> cosine graph -> diffusion -> GMM -> beta in one call.
    m.def(
        "derive_beta",
        [](const Corpus& corpus, int K, int m_dims, int t, std::uint64_t seed) {
            PpmiMatrix pp = ppmi(corpus, WindowStrategy::document());
            SimilarityGraph g = second_order_graph(pp);
            const int m_eff = std::min(m_dims, corpus.vocab_size() - 2);
            DiffusionEmbedding emb = diffusion_embed(g, m_eff, t);
            GmmModel gmm = fit_gmm(emb, K, seed);
            return estimate_beta(invert_to_topic_word(gmm, unigram(corpus))).beta;
        },
        py::arg("corpus"), py::arg("K"), py::arg("m") = 100, py::arg("t") = 1, py::arg("seed") = 1);

    py::class_<TopicModel>(m, "TopicModel")
        .def_readonly("phi", &TopicModel::phi)
        .def_readonly("theta", &TopicModel::theta)
        .def("top_words", &TopicModel::top_words, py::arg("n"));

    m.def(
        "train_lda",
        [](const Corpus& corpus, int K, const Eigen::VectorXd& beta, int iterations, int burn_in,
           int optimize_interval, std::uint64_t seed) {
            DirichletParam b;
            b.beta = beta;
            LdaConfig cfg = LdaConfig::defaults(K, b, seed);
            cfg.iterations = iterations;
            cfg.burn_in = burn_in;
            cfg.optimize_interval = optimize_interval;
            return train(corpus, cfg);
        },
        py::arg("corpus"), py::arg("K"), py::arg("beta"), py::arg("iterations") = 1000,
        py::arg("burn_in") = 200, py::arg("optimize_interval") = 10, py::arg("seed") = 1);

    m.def(
        "npmi_score",
        [](const std::vector<std::vector<std::string>>& topics, const Corpus& reference,
           const std::string& window) {
            TopicWordLists lists;
            lists.topics = topics;
            lists.n = topics.empty() ? 0 : static_cast<int>(topics[0].size());
            auto s = npmi_score(lists, reference, window_from_spec(window));
            return py::make_tuple(s.mean, s.per_topic);
        },
        py::arg("topics"), py::arg("reference"), py::arg("window") = "document");

    m.def(
        "cv_score",
        [](const std::vector<std::vector<std::string>>& topics, const Corpus& reference,
           int sliding_window) {
            TopicWordLists lists;
            lists.topics = topics;
            lists.n = topics.empty() ? 0 : static_cast<int>(topics[0].size());
            auto s = cv_score(lists, reference, sliding_window);
            return py::make_tuple(s.mean, s.per_topic);
        },
        py::arg("topics"), py::arg("reference"), py::arg("sliding_window") = 110);

    py::class_<WidInstance>(m, "WidInstance")
        .def_readonly("id", &WidInstance::id)
        .def_readonly("topic_id", &WidInstance::topic_id)
        .def_readonly("displayed_words", &WidInstance::displayed_words)
        .def_readonly("intruder_index", &WidInstance::intruder_index);

    m.def(
        "build_wid_instances",
        [](const TopicModel& model, const std::vector<std::string>& terms, int n,
           std::uint64_t seed) {
            return build_wid_instances(model, Vocabulary::from_terms(terms), n, seed);
        },
        py::arg("model"), py::arg("terms"), py::arg("n"), py::arg("seed"));
    m.def("render_wid_prompt", &render_wid_prompt, py::arg("instance"));
    m.def(
        "wid_accuracy_oracle",
        [](const std::vector<WidInstance>& instances) {
            ScriptedJudge judge = ScriptedJudge::oracle(instances);
            return wid_accuracy(instances, judge).accuracy;
        },
        py::arg("instances"));
    m.def(
        "wid_accuracy_random",
        [](const std::vector<WidInstance>& instances, std::uint64_t seed) {
            UniformRandomJudge judge(seed);
            return wid_accuracy(instances, judge).accuracy;
        },
        py::arg("instances"), py::arg("seed"));

    m.def("hypergeom_upper_tail", &hypergeom_upper_tail, py::arg("x"), py::arg("N"), py::arg("M"),
          py::arg("K"));
    m.def("bh_adjust", &bh_adjust, py::arg("p"));
    m.def(
        "spearman_coherence",
        [](const std::vector<std::string>& genes, const Eigen::MatrixXd& expression,
           const std::vector<std::string>& names) {
            FeatureMatrix fm;
            fm.values = expression;
            fm.names = names;
            return spearman_coherence(genes, fm);
        },
        py::arg("genes"), py::arg("expression"), py::arg("gene_names"));

    m.def(
        "generate_synthetic",
        [](int K, int V, int D, int doc_len, double alpha, double sparsity, std::uint64_t seed) {
            SyntheticData s = generate_synthetic(K, V, D, doc_len, alpha, sparsity, seed);
            return py::make_tuple(std::move(s.corpus), s.phi_star, s.theta_star);
        },
        py::arg("K"), py::arg("V"), py::arg("D"), py::arg("doc_len"), py::arg("alpha") = 0.5,
        py::arg("sparsity") = 0.25, py::arg("seed") = 1);

    m.def("matched_topic_cosine", &matched_topic_cosine, py::arg("phi"), py::arg("phi_star"));

    m.def(
        "run_pipeline",
        [](const std::string& config_path,
           const std::vector<std::pair<std::string, std::string>>& overrides) {
            PipelineConfig cfg = config_path.empty() ? PipelineConfig()
                                                     : PipelineConfig::from_file(config_path);
            for (const auto& [k, v] : overrides) cfg.set(k, v);
            return run_pipeline(cfg).j.dump();
        },
        py::arg("config_path") = "",
        py::arg("overrides") = std::vector<std::pair<std::string, std::string>>{});
}
