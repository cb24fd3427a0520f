#pragma once

#include <functional>

#include "prism/corpus.hpp"

namespace prism {

// Context-window strategy for co-occurrence counting. Neighborhood windows
// carry one precomputed cell-id set per cell (each containing the focal cell).
struct WindowStrategy {
    enum class Kind { Document, Sliding, Neighborhood };
    // Weighting inside a neighborhood window: Presence counts a gene once per
    // window if any member cell expresses it; Counts uses summed expression
    // counts (pair weight = min of the two marginals).
    enum class NeighborhoodWeighting { Presence, Counts };

    Kind kind = Kind::Document;
    int width = 0;
    std::vector<std::vector<int>> neighborhoods;
    NeighborhoodWeighting weighting = NeighborhoodWeighting::Presence;

    static WindowStrategy document();
    static WindowStrategy sliding(int w);
    static WindowStrategy neighborhood(std::vector<std::vector<int>> sets,
                                       NeighborhoodWeighting weighting = NeighborhoodWeighting::Presence);
};

struct PpmiMatrix {
    Eigen::MatrixXd m;             // V x V, symmetric, nonnegative
    long long window_count = 0;
};

struct SimilarityGraph {
    enum class Kind { FirstOrderPpmi, SecondOrderCosine };
    Eigen::MatrixXd w;             // V x V, symmetric
    Kind kind = Kind::SecondOrderCosine;
    int repaired_rows = 0;         // all-zero rows patched with a self-loop
};

PpmiMatrix ppmi(const Corpus& corpus, const WindowStrategy& strategy, int v_cap = 6000);

// Enumerates context windows under a strategy, invoking `fn` with the sorted
// distinct word ids present in each window (presence semantics).
void for_each_window(const Corpus& corpus, const WindowStrategy& strategy,
                     const std::function<void(const std::vector<int>&)>& fn);
SimilarityGraph second_order_graph(const PpmiMatrix& ppmi);
SimilarityGraph first_order_graph(const PpmiMatrix& ppmi);

// PCA (center+scale, truncated SVD) then exact Euclidean kNN; ties break
// toward the lower cell id. Each returned set contains the focal cell first.
std::vector<std::vector<int>> knn_neighborhoods(const FeatureMatrix& features, int k, int pca_dims);

void save_neighborhoods(const std::vector<std::vector<int>>& sets, const std::string& path);
std::vector<std::vector<int>> load_neighborhoods(const std::string& path);

// Dense binary matrix format shared by all exported matrices:
// 16-byte header = 8-byte magic "PRISMDNS", uint32 rows, uint32 cols (little
// endian), followed by row-major IEEE-754 doubles.
void save_matrix_binary(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd load_matrix_binary(const std::string& path);
void save_matrix_tsv(const Eigen::MatrixXd& m, const std::string& path);

}  // namespace prism
