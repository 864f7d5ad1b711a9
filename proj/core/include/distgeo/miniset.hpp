#pragma once

#include "distgeo/rng.hpp"
#include "distgeo/types.hpp"

#include <string>
#include <vector>

namespace distgeo {

struct MinisetConfig {
    int n_min = 32;
    int n_max = 128;
    double tau_spatial = 0.05;  // locality temperature, slide distance units
    double alpha = 0.5;         // overlap fraction
    int min_overlap = 20;
    int d = 32;  // latent geometry dimension of the target factor
    int pairs_per_epoch = 4500;  // training-scale knob, no correctness effect
    uint64_t seed = 0;

    void validate(int slide_size) const;
};

/// A spatially localized subset of one slide with its pose-invariant target.
struct Miniset {
    std::vector<int> indices;  // rows into the slide, draw order
    CoordinateTable coords;
    Matrix target;  // n x d canonical factor of the centered Gram
    int center;     // slide index of the seed spot
};

struct MinisetPair {
    Miniset a;
    Miniset b;
    std::vector<int> shared;  // slide indices present in both views
};

/// Draws one miniset: size uniform in [n_min, n_max], a uniform center spot,
/// and the remaining spots sequentially without replacement with probability
/// proportional to exp(-dist_to_center / tau_spatial).
Miniset sample_miniset(const CoordinateTable& slide, const MinisetConfig& cfg, Rng& rng);

/// Draws two views sharing max(min_overlap, floor(alpha*n)) spots. The
/// shared set is sampled once with the locality weights; the remaining spots
/// of each view are drawn independently from the same center. Shared spots
/// occupy the leading positions of both views' index lists.
MinisetPair sample_paired_minisets(const CoordinateTable& slide, const MinisetConfig& cfg,
                                   Rng& rng);

/// Writes pair coordinate CSVs plus a JSON manifest (indices, shared sets,
/// config, seed) into `dir`.
void save_miniset_batch(const std::string& dir, const std::vector<MinisetPair>& pairs,
                        const MinisetConfig& cfg, uint64_t seed);

}  // namespace distgeo
