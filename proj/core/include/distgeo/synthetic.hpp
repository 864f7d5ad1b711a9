#pragma once

#include "distgeo/rng.hpp"
#include "distgeo/types.hpp"

#include <vector>

namespace distgeo {

struct SyntheticConfig {
    int n_cells = 2000;
    int n_genes = 64;
    int n_domains = 6;
    double expression_noise_std = 0.05;
    double domain_sharpness = 4.0;  // higher = narrower expression bumps
    uint64_t seed = 42;

    void validate() const;
};

struct SyntheticSlide {
    CoordinateTable coords;
    Matrix expression;  // n_cells x n_genes, nonnegative
    std::vector<int> domain_labels;
    std::vector<std::string> gene_names;
};

/// Ground-truth slide: positions from a mixture of n_domains planar
/// Gaussians in the unit square, expression from per-gene radial bumps of
/// position (genes grouped by domain) plus Gaussian noise. Domain labels
/// are the maximum-posterior mixture component, so they form spatially
/// coherent regions recoverable from expression.
SyntheticSlide generate_slide(const SyntheticConfig& cfg, Rng& rng);

struct SpotSlide {
    CoordinateTable coords;  // spot centers
    Matrix expression;       // summed member expression
    std::vector<std::vector<int>> members;  // cell rows per retained spot
    std::vector<std::string> gene_names;
};

/// Regular-grid pseudo-spot aggregation: cells binned into pitch-sized
/// squares, spots with fewer than min_cells discarded, spot expression the
/// sum over members.
SpotSlide pseudo_spot_aggregate(const CoordinateTable& coords, const Matrix& expression,
                                double pitch, int min_cells);

struct OraclePredictorConfig {
    double distance_noise = 0.02;  // std of pairwise log-distance perturbations
    bool apply_random_rotation = true;
    int calibration_knn = 20;  // edge population the jitter is calibrated against
    int latent_dim = 32;
    uint64_t seed = 0;
};

/// Stand-in for the trained per-patch geometry model: emits the centered GT
/// sub-coordinates embedded in latent_dim columns, under a fresh random
/// O(latent_dim) rotation per patch, with positions jittered in-plane so
/// pairwise log-distance noise over the calibration kNN edges has standard
/// deviation distance_noise. Per-point jitter keeps every patch metrically
/// consistent (realizable in the plane).
class OraclePredictor {
public:
    OraclePredictor(CoordinateTable gt_coords, OraclePredictorConfig cfg);

    /// Patch geometry for the given global cell indices; rows follow the
    /// order of `patch`. Deterministic per (seed, patch_index).
    Matrix predict(const std::vector<int>& patch, int patch_index) const;

    const OraclePredictorConfig& config() const { return cfg_; }

private:
    CoordinateTable gt_;
    OraclePredictorConfig cfg_;
};

/// Random orthogonal d x d matrix (Haar via QR with sign fix).
Matrix random_orthogonal(int d, Rng& rng);

}  // namespace distgeo
