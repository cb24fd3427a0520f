#pragma once

#include "prism/cooccurrence.hpp"

namespace prism {

// Diffusion coordinates: column k of `coords` is lambda_k^t * psi_k, where
// psi_k is the k-th nontrivial right eigenvector of the Markov matrix P.
// `psi` keeps the unscaled eigenvectors for residual diagnostics.
struct DiffusionEmbedding {
    Eigen::MatrixXd coords;
    Eigen::MatrixXd psi;
    Eigen::VectorXd eigenvalues;
    int t = 1;
    int m = 0;
    int trivial_dropped = 0;
};

// Markov transition matrix after anisotropic (alpha=1) density normalization:
// Wt = Q^{-1} W Q^{-1} with Q = diag(row sums of W), then P = Dt^{-1} Wt.
Eigen::MatrixXd diffusion_transition(const SimilarityGraph& graph);

DiffusionEmbedding diffusion_embed(const SimilarityGraph& graph, int m, int t = 1);

// Ablation path: top-m left singular vectors of W scaled by singular values.
DiffusionEmbedding svd_embed(const SimilarityGraph& graph, int m);

void save_embedding_tsv(const DiffusionEmbedding& e, const std::vector<std::string>& terms,
                        const std::string& path);

}  // namespace prism
