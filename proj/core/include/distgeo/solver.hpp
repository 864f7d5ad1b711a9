#pragma once

#include "distgeo/rng.hpp"
#include "distgeo/stitching.hpp"
#include "distgeo/types.hpp"

#include <vector>

namespace distgeo {

struct SolverConfig {
    int n_landmarks = 128;
    int iterations = 1000;
    double huber_delta = 0.1;   // on the unit-median normalized scale
    double anchor_weight = 0.1;
    double step_size = 1e-2;
    uint64_t seed = 0;

    void validate() const;
};

/// Stress and residual statistics recorded every 50 iterations.
struct SolveDiagnostics {
    std::vector<int> checkpoint_iters;
    std::vector<double> huber_trajectory;
    std::vector<double> stress1_trajectory;  // Kruskal Stress-1 on the edge set
    double edge_residual_mean = 0.0;
    double edge_residual_median = 0.0;
    double edge_residual_max = 0.0;
    double final_stress1 = 0.0;
    double initial_huber = 0.0;
    double final_huber = 0.0;
    double scale_factor = 1.0;  // median edge length divided out before solving
    int n_components = 0;
    int orphan_count = 0;  // isolated nodes placed on the component grid
};

/// Landmark-Isomap initialization: max-min farthest-point landmarks on
/// graph distances, classical MDS of the landmark squared geodesics, then
/// triangulation of the remaining points. Disconnected graphs are solved
/// per component and placed on a grid separated by 3x the largest component
/// diameter. Output is centered; rows follow graph node indices.
Matrix landmark_isomap_init(const StitchedGraph& graph, const SolverConfig& cfg, Rng& rng,
                            SolveDiagnostics* diag = nullptr);

struct HuberResult {
    double value;
    Matrix gradient;  // N x 2
};

/// Weighted Huber distance-geometry objective with an anchor term:
/// sum_edges omega * H_delta(||x_i - x_j|| - d)
///   + anchor_weight * ||X - X0||_F^2 / N.
/// The anchor is per-point normalized so the default weight stays a gentle
/// tether at any graph size. Coincident endpoints contribute a zero
/// subgradient.
HuberResult huber_stress(const Matrix& x, const StitchedGraph& graph, const Matrix& x0,
                         const SolverConfig& cfg);

struct SolveResult {
    Matrix coords;  // N x 2, centered
    SolveDiagnostics diagnostics;
};

/// Initialization plus `iterations` steps of Adam on the Huber objective.
/// Edges are pre-scaled to unit median distance (so huber_delta is
/// meaningful across datasets) and the output is rescaled back. The best
/// iterate by objective value is returned, so the final stress never
/// exceeds the initial stress.
SolveResult solve(const StitchedGraph& graph, const SolverConfig& cfg, Rng& rng);

/// Dense all-pairs Euclidean distances of the solved coordinates.
Matrix dense_distances(const Matrix& x);

}  // namespace distgeo
