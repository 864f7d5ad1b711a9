#pragma once

#include "distgeo/diffusion.hpp"
#include "distgeo/metrics.hpp"
#include "distgeo/patch_graph.hpp"
#include "distgeo/solver.hpp"
#include "distgeo/stitching.hpp"
#include "distgeo/synthetic.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace distgeo {

/// Usage or configuration problem; the CLI exits 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure inside a pipeline stage; the CLI exits 1 naming the stage.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& msg)
        : std::runtime_error("stage '" + stage + "': " + msg), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PseudoSpotConfig {
    bool enabled = false;
    double pitch = 0.05;
    int min_cells = 2;
};

/// Full pipeline configuration. The compiled-in defaults are the paper
/// operating point; a JSON config file overrides individual keys, and the
/// documented CLI flags override single dotted keys on top of that.
struct PipelineConfig {
    SyntheticConfig synthetic;
    PseudoSpotConfig pseudo_spots;
    OraclePredictorConfig oracle;
    GraphConfig graph;
    int embed_dim = 32;  // PCA embedding dimension (encoder surrogate)
    PatchConfig patch;
    StitchConfig stitch;
    bool uniform_weighting = false;  // force a_p = 1 during aggregation
    SolverConfig solver;
    DiffusionConfig diffusion;
    double residual_scale_rel = 0.02;  // analytic-refiner residual scale,
                                       // relative to the patch RMS radius
    MetricsConfig metrics;
    std::string predictor = "oracle";  // oracle | analytic
    int threads = 1;
    bool evaluate_distortion = false;

    void validate() const;
};

PipelineConfig default_config();

/// Parses a JSON config and overlays it onto the defaults. Unknown keys are
/// a ConfigError.
PipelineConfig load_config(const std::string& path);
PipelineConfig config_from_json(const std::string& text);
std::string config_json(const PipelineConfig& cfg);

/// Rederives every per-stage seed from one master seed.
void apply_master_seed(PipelineConfig& cfg, uint64_t seed);

/// Generates the synthetic slide files (coords.csv, expression.csv,
/// domains.csv, optional spots/) plus manifest.json in out_dir.
void run_synth(const PipelineConfig& cfg, const std::string& out_dir);

struct ReconstructSummary {
    int n_patches = 0;
    long n_measurements = 0;
    long n_edges = 0;
    double median_disagreement = 0.0;
    double mean_disagreement = 0.0;
    double min_reliability = 1.0;
    SolveDiagnostics solver;
};

/// Full Steps 1-7 on a synthesized slide directory: embed, locality graph,
/// patch cover, per-patch prediction (optionally refined by residual
/// diffusion with the analytic denoiser), distance extraction, reliability
/// weighting, aggregation, and the global solve. Writes X.csv, stitched.csv,
/// graph.csv, patches.json, diagnostics.json, manifest.json to out_dir.
ReconstructSummary run_reconstruct(const PipelineConfig& cfg, const std::string& slide_dir,
                                   const std::string& out_dir);

/// Scores predicted coordinates (or a dense distance matrix CSV when
/// pred_is_distances) against ground-truth coordinates; rows are aligned by
/// id. Writes metrics.json (and distortion.csv/distortion.json when
/// enabled) to out_dir.
MetricsReport run_evaluate(const PipelineConfig& cfg, const std::string& pred_path,
                           const std::string& gt_path, const std::string& out_dir,
                           bool pred_is_distances = false);

/// Comparison table over several metrics.json files, best and second-best
/// flagged per column with direction awareness. format: "md" or "csv".
std::string run_report(const std::vector<std::string>& metric_files,
                       const std::vector<std::string>& labels, const std::string& format);

/// Recomputes the digests recorded in dir/manifest.json. Returns 0 when all
/// match, 1 on any mismatch; fills `report` with one line per file.
int verify_run_dir(const std::string& dir, std::string* report);

}  // namespace distgeo
