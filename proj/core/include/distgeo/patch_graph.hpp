#pragma once

#include "distgeo/rng.hpp"
#include "distgeo/types.hpp"

#include <utility>
#include <vector>

namespace distgeo {

/// Top-h principal component scores of the column-centered expression
/// matrix. Component signs are fixed so the largest-magnitude loading of
/// each component is positive. Surrogate for a learned expression encoder.
Matrix pca_embed(const Matrix& expression, int h);

/// |a n b| / |a u b| for two sorted index sets.
double jaccard(const std::vector<int>& a, const std::vector<int>& b);

struct GraphConfig {
    int k_z = 50;
    double tau_j = 0.2;
    /// Reattach nodes isolated by the Jaccard filter to their nearest
    /// embedding neighbor, and bridge disconnected components through their
    /// closest embedding pair, so random walks can reach every cell.
    bool repair_connectivity = true;

    void validate() const;
};

struct LocalityGraph {
    struct Neighbor {
        int node;
        double jaccard;
    };
    /// Sorted by node index; every edge appears in both endpoint lists.
    std::vector<std::vector<Neighbor>> adjacency;

    int num_nodes() const { return static_cast<int>(adjacency.size()); }
    long num_edges() const;
};

/// Mutual-kNN graph in embedding space: edge (i,j) kept iff i is in the
/// k-neighborhood of j, j is in the k-neighborhood of i, and the Jaccard
/// overlap of the two neighborhoods is >= tau_j. kNN ties break by index.
LocalityGraph mutual_knn_graph(const Matrix& z, const GraphConfig& cfg, int threads = 1);

struct PatchConfig {
    int n_patch = 1024;
    int walks_per_cell = 10;
    double overlap_fraction = 0.7;
    int min_shared = 25;
    double restart_prob = 0.1;
    /// Every cell must land in at least this many patches. Distance
    /// aggregation keeps only edges supported by min_support >= 2 patches,
    /// so singly-covered cells would drop out of the stitched graph.
    int min_coverage = 2;
    uint64_t seed = 0;

    void validate() const;
};

struct PatchCover {
    std::vector<std::vector<int>> patches;           // sorted index sets
    std::vector<std::pair<int, int>> neighbors;      // pairs sharing >= min_shared
};

/// Overlapping connected cover by random walks. Each new patch is seeded
/// from a boundary cell of the current cover and preloaded with nearby cells
/// of the parent patch, which guarantees the declared overlap
/// constructively; a random walk with restart then fills the patch.
PatchCover sample_patches(const LocalityGraph& graph, const PatchConfig& cfg, Rng& rng);

/// Throws if the cover violates coverage, declared-overlap, patch-size, or
/// patch-overlap-graph connectivity invariants.
void validate_patch_cover(const PatchCover& cover, int n_nodes, const PatchConfig& cfg);

}  // namespace distgeo
