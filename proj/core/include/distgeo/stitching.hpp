#pragma once

#include "distgeo/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace distgeo {

struct StitchConfig {
    int knn_extract = 20;       // within-patch kNN for edge extraction
    int min_support = 2;        // M_min
    double tau_spread = 0.50;   // relative spread threshold
    int min_overlap_cells = 5;  // overlap pairs below this are skipped

    void validate() const;
};

/// One local observation: patch `patch` measured distance d between global
/// cells i < j.
struct DistanceMeasurement {
    int i;
    int j;
    double d;
    int patch;
};

struct DistanceMeasurementSet {
    std::vector<DistanceMeasurement> records;
    long dropped_nonpositive = 0;  // zero-distance records dropped with a warning
};

/// kNN edges of one patch geometry as distance measurements. `patch_ids`
/// maps local rows to global cell indices; `patch` labels the records.
DistanceMeasurementSet extract_patch_edges(const Matrix& v_patch,
                                           const std::vector<int>& patch_ids, int k,
                                           int patch = 0);

/// Mean absolute difference of log pairwise distances over the shared cells
/// of two patch geometries. `shared_local` pairs (row in p, row in q) refer
/// to the same global cell. Returns nullopt when fewer than
/// `min_overlap_cells` cells are shared (the pair is skipped, not an error).
std::optional<double> overlap_disagreement(const Matrix& v_p, const Matrix& v_q,
                                           const std::vector<std::pair<int, int>>& shared_local,
                                           int min_overlap_cells = 5);

struct PairDisagreement {
    int p;
    int q;
    double value;
};

struct PatchReliability {
    std::vector<double> a;  // in (0, 1]; 1 for patches with no overlap partner
};

/// a_p = exp(-m_p / median), where m_p is the mean disagreement of patch p
/// with its overlap partners and the median runs over all overlap pairs.
PatchReliability patch_reliabilities(int n_patches,
                                     const std::vector<PairDisagreement>& disagreements);

struct StitchedEdge {
    int i;
    int j;
    double d;      // reliability-weighted median of the measurements
    double omega;  // sqrt(count) / (1 + spread)
    int count;     // supporting patches
    double spread; // IQR / median of the measurements
};

/// Filtered global distance graph.
struct StitchedGraph {
    int num_nodes = 0;
    std::vector<StitchedEdge> edges;
};

/// Groups measurements per pair, aggregates with the reliability-weighted
/// lower median, and keeps edges with count >= min_support and
/// spread <= tau_spread.
StitchedGraph aggregate_edges(const DistanceMeasurementSet& measurements,
                              const PatchReliability& rel, const StitchConfig& cfg,
                              int num_nodes);

/// Lower weighted median: smallest value whose cumulative weight reaches
/// half the total. With equal weights this is the lower median.
double weighted_median(std::vector<std::pair<double, double>> value_weight);

/// Interquartile range by linear interpolation (quartile positions at
/// 0.25/0.75 of n-1).
double interquartile_range(std::vector<double> values);

}  // namespace distgeo
