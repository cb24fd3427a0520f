#include "prism/spectral.hpp"

#include <fstream>

namespace prism {

namespace {

constexpr double kTrivialTol = 1e-8;

void check_graph(const SimilarityGraph& graph) {
    const auto& w = graph.w;
    if (w.rows() != w.cols() || w.rows() < 2) throw StageError("similarity graph must be square, V >= 2");
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        if (w.row(i).sum() <= 0.0)
            throw StageError("similarity graph has an all-zero row (repair step missing?)");
}

// Anisotropically normalized kernel and its degree vector.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> normalized_kernel(const SimilarityGraph& graph) {
    const Eigen::VectorXd q = graph.w.rowwise().sum();
    Eigen::VectorXd qinv = q.cwiseInverse();
    Eigen::MatrixXd wt = qinv.asDiagonal() * graph.w * qinv.asDiagonal();
    Eigen::VectorXd dt = wt.rowwise().sum();
    return {std::move(wt), std::move(dt)};
}

}  // namespace

Eigen::MatrixXd diffusion_transition(const SimilarityGraph& graph) {
    check_graph(graph);
    auto [wt, dt] = normalized_kernel(graph);
    return dt.cwiseInverse().asDiagonal() * wt;
}

DiffusionEmbedding diffusion_embed(const SimilarityGraph& graph, int m, int t) {
    check_graph(graph);
    const Eigen::Index V = graph.w.rows();
    if (m < 1 || m > V - 1) throw ConfigError("embedding dimension m must lie in [1, V-1]");
    if (t < 1) throw ConfigError("diffusion time t must be a positive integer");

    auto [wt, dt] = normalized_kernel(graph);

    // P = Dt^{-1} Wt is similar to the symmetric S = Dt^{-1/2} Wt Dt^{-1/2};
    // solve S and map eigenvectors back via psi = Dt^{-1/2} phi.
    Eigen::VectorXd dt_isqrt = dt.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd s = dt_isqrt.asDiagonal() * wt * dt_isqrt.asDiagonal();
    s = 0.5 * (s + s.transpose().eval());  // keep the solver input exactly symmetric

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    if (solver.info() != Eigen::Success) throw StageError("eigendecomposition failed to converge");

    // Ascending from Eigen; walk from the top. Scale psi so the trivial
    // eigenvector is the constant 1 (stationary-measure normalization).
    const double psi_scale = std::sqrt(dt.sum());
    std::vector<int> order(static_cast<std::size_t>(V));
    for (Eigen::Index i = 0; i < V; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(V - 1 - i);

    int trivial = 0;
    for (int idx : order)
        if (solver.eigenvalues()[idx] >= 1.0 - kTrivialTol) ++trivial;
    if (trivial == 0) throw StageError("no trivial eigenpair found; graph normalization is broken");
    if (trivial > 1)
        log_warn("graph has " + std::to_string(trivial) +
                 " near-unit eigenvalues (disconnected components); dropping one trivial pair per component");

    DiffusionEmbedding e;
    e.t = t;
    e.m = m;
    e.trivial_dropped = trivial;
    const int avail = static_cast<int>(V) - trivial;
    if (m > avail)
        throw ConfigError("embedding dimension m exceeds the number of nontrivial eigenpairs (" +
                          std::to_string(avail) + ")");
    e.coords.resize(V, m);
    e.psi.resize(V, m);
    e.eigenvalues.resize(m);

    int k = 0;
    for (int idx : order) {
        const double lambda = solver.eigenvalues()[idx];
        if (lambda >= 1.0 - kTrivialTol) continue;  // trivial pair(s)
        if (k >= m) break;
        Eigen::VectorXd psi = dt_isqrt.asDiagonal() * solver.eigenvectors().col(idx) * psi_scale;
        e.psi.col(k) = psi;
        e.eigenvalues[k] = lambda;
        e.coords.col(k) = std::pow(lambda, t) * psi;
        ++k;
    }
    if (k < m) throw StageError("eigensolver returned fewer usable pairs than requested");
    if (!e.coords.allFinite()) throw StageError("diffusion coordinates contain NaN/Inf");
    return e;
}

DiffusionEmbedding svd_embed(const SimilarityGraph& graph, int m) {
    check_graph(graph);
    const Eigen::Index V = graph.w.rows();
    if (m < 1 || m > V - 1) throw ConfigError("embedding dimension m must lie in [1, V-1]");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(graph.w, Eigen::ComputeThinU);
    DiffusionEmbedding e;
    e.t = 1;
    e.m = m;
    e.trivial_dropped = 0;
    e.eigenvalues = svd.singularValues().head(m);
    e.psi = svd.matrixU().leftCols(m);
    e.coords = e.psi * e.eigenvalues.asDiagonal();
    if (!e.coords.allFinite()) throw StageError("SVD coordinates contain NaN/Inf");
    return e;
}

void save_embedding_tsv(const DiffusionEmbedding& e, const std::vector<std::string>& terms,
                        const std::string& path) {
    if (static_cast<Eigen::Index>(terms.size()) != e.coords.rows())
        throw DataError("term count does not match embedding rows");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < e.coords.rows(); ++i) {
        out << terms[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < e.coords.cols(); ++j) out << "\t" << e.coords(i, j);
        out << "\n";
    }
}

}  // namespace prism
