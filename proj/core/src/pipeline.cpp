#include "distgeo/pipeline.hpp"

#include "distgeo/geometry.hpp"
#include "distgeo/io.hpp"
#include "distgeo/log.hpp"
#include "distgeo/parallel.hpp"
#include "distgeo/sha256.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

namespace distgeo {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const {
    synthetic.validate();
    graph.validate();
    patch.validate();
    stitch.validate();
    solver.validate();
    diffusion.validate();
    metrics.validate();
    if (predictor != "oracle" && predictor != "analytic")
        throw ConfigError("config: predictor must be 'oracle' or 'analytic'");
    if (embed_dim < 1) throw ConfigError("config: embed_dim must be >= 1");
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
    if (residual_scale_rel <= 0)
        throw ConfigError("config: residual_scale_rel must be > 0");
    if (pseudo_spots.enabled) {
        if (pseudo_spots.pitch <= 0) throw ConfigError("config: pseudo_spots.pitch must be > 0");
        if (pseudo_spots.min_cells < 1)
            throw ConfigError("config: pseudo_spots.min_cells must be >= 1");
    }
}

PipelineConfig default_config() { return PipelineConfig{}; }

void apply_master_seed(PipelineConfig& cfg, uint64_t seed) {
    cfg.synthetic.seed = derive_seed(seed, 1);
    cfg.oracle.seed = derive_seed(seed, 2);
    cfg.patch.seed = derive_seed(seed, 3);
    cfg.solver.seed = derive_seed(seed, 4);
    cfg.metrics.seed = derive_seed(seed, 5);
}

namespace {

// ---- config <-> json ----------------------------------------------------

template <typename T>
void get_to(const json& j, const std::string& section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(out);
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for " + section + "." + key + ": " + e.what());
    }
}

void check_known_keys(const json& j, const std::string& section,
                      const std::vector<std::string>& known) {
    for (const auto& [key, val] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config: unknown key '" +
                              (section.empty() ? key : section + "." + key) + "'");
}

}  // namespace

std::string config_json(const PipelineConfig& cfg) {
    json j;
    j["synthetic"] = {{"n_cells", cfg.synthetic.n_cells},
                      {"n_genes", cfg.synthetic.n_genes},
                      {"n_domains", cfg.synthetic.n_domains},
                      {"expression_noise_std", cfg.synthetic.expression_noise_std},
                      {"domain_sharpness", cfg.synthetic.domain_sharpness},
                      {"seed", cfg.synthetic.seed}};
    j["pseudo_spots"] = {{"enabled", cfg.pseudo_spots.enabled},
                         {"pitch", cfg.pseudo_spots.pitch},
                         {"min_cells", cfg.pseudo_spots.min_cells}};
    j["oracle"] = {{"distance_noise", cfg.oracle.distance_noise},
                   {"apply_random_rotation", cfg.oracle.apply_random_rotation},
                   {"calibration_knn", cfg.oracle.calibration_knn},
                   {"latent_dim", cfg.oracle.latent_dim},
                   {"seed", cfg.oracle.seed}};
    j["graph"] = {{"k_z", cfg.graph.k_z},
                  {"tau_j", cfg.graph.tau_j},
                  {"repair_connectivity", cfg.graph.repair_connectivity},
                  {"embed_dim", cfg.embed_dim}};
    j["patch"] = {{"n_patch", cfg.patch.n_patch},
                  {"walks_per_cell", cfg.patch.walks_per_cell},
                  {"overlap_fraction", cfg.patch.overlap_fraction},
                  {"min_shared", cfg.patch.min_shared},
                  {"restart_prob", cfg.patch.restart_prob},
                  {"min_coverage", cfg.patch.min_coverage},
                  {"seed", cfg.patch.seed}};
    j["stitch"] = {{"knn_extract", cfg.stitch.knn_extract},
                   {"min_support", cfg.stitch.min_support},
                   {"tau_spread", cfg.stitch.tau_spread},
                   {"min_overlap_cells", cfg.stitch.min_overlap_cells},
                   {"weighting", cfg.uniform_weighting ? "uniform" : "weighted"}};
    j["solver"] = {{"n_landmarks", cfg.solver.n_landmarks},
                   {"iterations", cfg.solver.iterations},
                   {"huber_delta", cfg.solver.huber_delta},
                   {"anchor_weight", cfg.solver.anchor_weight},
                   {"step_size", cfg.solver.step_size},
                   {"seed", cfg.solver.seed}};
    j["diffusion"] = {{"sigma_data", cfg.diffusion.sigma_data},
                      {"sigma_min", cfg.diffusion.sigma_min},
                      {"sigma_max", cfg.diffusion.sigma_max},
                      {"n_stages", cfg.diffusion.n_stages},
                      {"steps", cfg.diffusion.steps},
                      {"strata", cfg.diffusion.strata},
                      {"residual_scale_rel", cfg.residual_scale_rel}};
    j["metrics"] = {{"k", cfg.metrics.k},
                    {"n_shells", cfg.metrics.n_shells},
                    {"n_projections", cfg.metrics.n_projections},
                    {"lrmse_ks", cfg.metrics.lrmse_ks},
                    {"quantile_shells", cfg.metrics.quantile_shells},
                    {"random_directions", cfg.metrics.random_directions},
                    {"seed", cfg.metrics.seed}};
    j["predictor"] = cfg.predictor;
    j["threads"] = cfg.threads;
    j["evaluate_distortion"] = cfg.evaluate_distortion;
    return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    PipelineConfig cfg = default_config();
    check_known_keys(j, "", {"synthetic", "pseudo_spots", "oracle", "graph", "patch",
                             "stitch", "solver", "diffusion", "metrics", "predictor",
                             "threads", "evaluate_distortion"});
    if (j.contains("synthetic")) {
        const auto& s = j["synthetic"];
        check_known_keys(s, "synthetic",
                         {"n_cells", "n_genes", "n_domains", "expression_noise_std",
                          "domain_sharpness", "seed"});
        get_to(s, "synthetic", "n_cells", cfg.synthetic.n_cells);
        get_to(s, "synthetic", "n_genes", cfg.synthetic.n_genes);
        get_to(s, "synthetic", "n_domains", cfg.synthetic.n_domains);
        get_to(s, "synthetic", "expression_noise_std", cfg.synthetic.expression_noise_std);
        get_to(s, "synthetic", "domain_sharpness", cfg.synthetic.domain_sharpness);
        get_to(s, "synthetic", "seed", cfg.synthetic.seed);
    }
    if (j.contains("pseudo_spots")) {
        const auto& s = j["pseudo_spots"];
        check_known_keys(s, "pseudo_spots", {"enabled", "pitch", "min_cells"});
        get_to(s, "pseudo_spots", "enabled", cfg.pseudo_spots.enabled);
        get_to(s, "pseudo_spots", "pitch", cfg.pseudo_spots.pitch);
        get_to(s, "pseudo_spots", "min_cells", cfg.pseudo_spots.min_cells);
    }
    if (j.contains("oracle")) {
        const auto& s = j["oracle"];
        check_known_keys(s, "oracle", {"distance_noise", "apply_random_rotation",
                                       "calibration_knn", "latent_dim", "seed"});
        get_to(s, "oracle", "distance_noise", cfg.oracle.distance_noise);
        get_to(s, "oracle", "apply_random_rotation", cfg.oracle.apply_random_rotation);
        get_to(s, "oracle", "calibration_knn", cfg.oracle.calibration_knn);
        get_to(s, "oracle", "latent_dim", cfg.oracle.latent_dim);
        get_to(s, "oracle", "seed", cfg.oracle.seed);
    }
    if (j.contains("graph")) {
        const auto& s = j["graph"];
        check_known_keys(s, "graph", {"k_z", "tau_j", "repair_connectivity", "embed_dim"});
        get_to(s, "graph", "k_z", cfg.graph.k_z);
        get_to(s, "graph", "tau_j", cfg.graph.tau_j);
        get_to(s, "graph", "repair_connectivity", cfg.graph.repair_connectivity);
        get_to(s, "graph", "embed_dim", cfg.embed_dim);
    }
    if (j.contains("patch")) {
        const auto& s = j["patch"];
        check_known_keys(s, "patch", {"n_patch", "walks_per_cell", "overlap_fraction",
                                      "min_shared", "restart_prob", "min_coverage",
                                      "seed"});
        get_to(s, "patch", "n_patch", cfg.patch.n_patch);
        get_to(s, "patch", "walks_per_cell", cfg.patch.walks_per_cell);
        get_to(s, "patch", "overlap_fraction", cfg.patch.overlap_fraction);
        get_to(s, "patch", "min_shared", cfg.patch.min_shared);
        get_to(s, "patch", "restart_prob", cfg.patch.restart_prob);
        get_to(s, "patch", "min_coverage", cfg.patch.min_coverage);
        get_to(s, "patch", "seed", cfg.patch.seed);
    }
    if (j.contains("stitch")) {
        const auto& s = j["stitch"];
        check_known_keys(s, "stitch", {"knn_extract", "min_support", "tau_spread",
                                       "min_overlap_cells", "weighting"});
        get_to(s, "stitch", "knn_extract", cfg.stitch.knn_extract);
        get_to(s, "stitch", "min_support", cfg.stitch.min_support);
        get_to(s, "stitch", "tau_spread", cfg.stitch.tau_spread);
        get_to(s, "stitch", "min_overlap_cells", cfg.stitch.min_overlap_cells);
        std::string weighting = cfg.uniform_weighting ? "uniform" : "weighted";
        get_to(s, "stitch", "weighting", weighting);
        if (weighting != "weighted" && weighting != "uniform")
            throw ConfigError("config: stitch.weighting must be 'weighted' or 'uniform'");
        cfg.uniform_weighting = weighting == "uniform";
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        check_known_keys(s, "solver", {"n_landmarks", "iterations", "huber_delta",
                                       "anchor_weight", "step_size", "seed"});
        get_to(s, "solver", "n_landmarks", cfg.solver.n_landmarks);
        get_to(s, "solver", "iterations", cfg.solver.iterations);
        get_to(s, "solver", "huber_delta", cfg.solver.huber_delta);
        get_to(s, "solver", "anchor_weight", cfg.solver.anchor_weight);
        get_to(s, "solver", "step_size", cfg.solver.step_size);
        get_to(s, "solver", "seed", cfg.solver.seed);
    }
    if (j.contains("diffusion")) {
        const auto& s = j["diffusion"];
        check_known_keys(s, "diffusion", {"sigma_data", "sigma_min", "sigma_max", "n_stages",
                                          "steps", "strata", "residual_scale_rel"});
        get_to(s, "diffusion", "sigma_data", cfg.diffusion.sigma_data);
        get_to(s, "diffusion", "sigma_min", cfg.diffusion.sigma_min);
        get_to(s, "diffusion", "sigma_max", cfg.diffusion.sigma_max);
        get_to(s, "diffusion", "n_stages", cfg.diffusion.n_stages);
        get_to(s, "diffusion", "steps", cfg.diffusion.steps);
        get_to(s, "diffusion", "strata", cfg.diffusion.strata);
        get_to(s, "diffusion", "residual_scale_rel", cfg.residual_scale_rel);
    }
    if (j.contains("metrics")) {
        const auto& s = j["metrics"];
        check_known_keys(s, "metrics", {"k", "n_shells", "n_projections", "lrmse_ks",
                                        "quantile_shells", "random_directions", "seed"});
        get_to(s, "metrics", "k", cfg.metrics.k);
        get_to(s, "metrics", "n_shells", cfg.metrics.n_shells);
        get_to(s, "metrics", "n_projections", cfg.metrics.n_projections);
        get_to(s, "metrics", "lrmse_ks", cfg.metrics.lrmse_ks);
        get_to(s, "metrics", "quantile_shells", cfg.metrics.quantile_shells);
        get_to(s, "metrics", "random_directions", cfg.metrics.random_directions);
        get_to(s, "metrics", "seed", cfg.metrics.seed);
    }
    get_to(j, "", "predictor", cfg.predictor);
    get_to(j, "", "threads", cfg.threads);
    get_to(j, "", "evaluate_distortion", cfg.evaluate_distortion);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(text);
}

namespace {

// ---- run manifest --------------------------------------------------------

class StageClock {
public:
    void start(const std::string& stage) {
        stage_ = stage;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto dt = std::chrono::steady_clock::now() - t0_;
        timings_[stage_] =
            std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
    }
    const std::map<std::string, long>& timings() const { return timings_; }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point t0_;
    std::map<std::string, long> timings_;
};

json seeds_json(const PipelineConfig& cfg) {
    return {{"synthetic", cfg.synthetic.seed},
            {"oracle", cfg.oracle.seed},
            {"patch", cfg.patch.seed},
            {"solver", cfg.solver.seed},
            {"metrics", cfg.metrics.seed}};
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const PipelineConfig& cfg, const StageClock& clock,
                    const std::vector<std::string>& outputs, json extra) {
    json m;
    m["tool"] = "distgeo";
    m["command"] = command;
    m["config"] = json::parse(config_json(cfg));
    m["seeds"] = seeds_json(cfg);
    json timings = json::object();
    for (const auto& [stage, ms] : clock.timings()) timings[stage] = ms;
    m["timings_ms"] = timings;
    json digests = json::object();
    for (const auto& rel : outputs)
        digests[rel] = sha256_file((fs::path(out_dir) / rel).string());
    m["outputs"] = digests;
    for (auto& [key, val] : extra.items()) m[key] = val;
    write_text_atomic((fs::path(out_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

template <typename Fn>
auto stage(const char* name, StageClock& clock, Fn&& fn) {
    clock.start(name);
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            clock.stop();
        } else {
            auto result = fn();
            clock.stop();
            return result;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

void run_synth(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    StageClock clock;

    const SyntheticSlide slide = stage("generate", clock, [&] {
        Rng rng(cfg.synthetic.seed);
        return generate_slide(cfg.synthetic, rng);
    });

    std::vector<std::string> outputs;
    stage("write", clock, [&] {
        write_coordinate_table((fs::path(out_dir) / "coords.csv").string(), slide.coords);
        outputs.push_back("coords.csv");
        write_text_atomic((fs::path(out_dir) / "expression.csv").string(),
                          matrix_csv(slide.expression, slide.gene_names));
        outputs.push_back("expression.csv");
        std::string domains = "id,domain\n";
        for (int i = 0; i < slide.coords.size(); ++i)
            domains += slide.coords.ids[i] + "," +
                       std::to_string(slide.domain_labels[i]) + "\n";
        write_text_atomic((fs::path(out_dir) / "domains.csv").string(), domains);
        outputs.push_back("domains.csv");

        if (cfg.pseudo_spots.enabled) {
            const SpotSlide spots =
                pseudo_spot_aggregate(slide.coords, slide.expression, cfg.pseudo_spots.pitch,
                                      cfg.pseudo_spots.min_cells);
            write_coordinate_table((fs::path(out_dir) / "spots" / "coords.csv").string(),
                                   spots.coords);
            write_text_atomic((fs::path(out_dir) / "spots" / "expression.csv").string(),
                              matrix_csv(spots.expression, spots.gene_names.empty()
                                                               ? slide.gene_names
                                                               : spots.gene_names));
            json members;
            members["members"] = spots.members;
            write_text_atomic((fs::path(out_dir) / "spots" / "members.json").string(),
                              members.dump() + "\n");
            outputs.push_back("spots/coords.csv");
            outputs.push_back("spots/expression.csv");
            outputs.push_back("spots/members.json");
        }
    });

    write_manifest(out_dir, "synth", cfg, clock, outputs,
                   {{"n_cells", cfg.synthetic.n_cells}});
}

ReconstructSummary run_reconstruct(const PipelineConfig& cfg, const std::string& slide_dir,
                                   const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    StageClock clock;
    ReconstructSummary summary;

    // Inputs: GT coordinates double as the oracle predictor's geometry source.
    CoordinateTable gt;
    Matrix expression;
    stage("read", clock, [&] {
        gt = read_coordinate_table((fs::path(slide_dir) / "coords.csv").string());
        expression = read_matrix_csv((fs::path(slide_dir) / "expression.csv").string());
        require(expression.rows() == gt.size(),
                "expression rows do not match coordinate count");
    });
    const int n = gt.size();

    // Step 1: encode (PCA surrogate on log1p expression) and locality graph.
    const Matrix embedding = stage("embed", clock, [&] {
        Matrix logged = expression.unaryExpr(
            [](double v) { return std::log1p(std::max(0.0, v)); });
        int h = std::min<int>({cfg.embed_dim, (int)logged.cols(), n});
        if (h < cfg.embed_dim)
            LOG_INFO("embed: clamping embed_dim %d -> %d", cfg.embed_dim, h);
        return pca_embed(logged, h);
    });
    const LocalityGraph graph = stage("graph", clock, [&] {
        return mutual_knn_graph(embedding, cfg.graph, cfg.threads);
    });

    // Step 2: overlapping connected patch cover.
    const PatchCover cover = stage("patches", clock, [&] {
        Rng rng(cfg.patch.seed);
        PatchCover c = sample_patches(graph, cfg.patch, rng);
        validate_patch_cover(c, n, cfg.patch);
        return c;
    });
    const int n_patches = static_cast<int>(cover.patches.size());
    summary.n_patches = n_patches;

    // Step 3: per-patch geometry prediction, optionally refined by residual
    // diffusion with the analytic denoiser.
    std::vector<Matrix> predictions(n_patches);
    stage("predict", clock, [&] {
        const OraclePredictor predictor(gt, cfg.oracle);
        const bool refine = cfg.predictor == "analytic";
        parallel_for(0, n_patches, cfg.threads, [&](int p) {
            Matrix v = predictor.predict(cover.patches[p], p);
            if (refine) {
                const double rms = std::sqrt(v.squaredNorm() / double(v.rows()));
                if (rms > 0) {
                    DiffusionConfig dcfg = cfg.diffusion;
                    dcfg.sigma_data = cfg.residual_scale_rel * rms;
                    dcfg.sigma_min = 0.01 * dcfg.sigma_data;
                    dcfg.sigma_max = 3.0 * dcfg.sigma_data;
                    const AnalyticGaussianDenoiser denoiser(
                        Matrix::Zero(v.rows(), v.cols()), dcfg.sigma_data);
                    Rng rng(derive_seed(cfg.patch.seed, 0xD1F0000ULL + uint64_t(p)));
                    v = sample_residual(v, denoiser, make_schedule(dcfg), rng);
                }
            }
            predictions[p] = std::move(v);
        });
    });

    // Step 4: within-patch kNN distance measurements.
    DistanceMeasurementSet measurements;
    stage("extract", clock, [&] {
        std::vector<DistanceMeasurementSet> parts(n_patches);
        parallel_for(0, n_patches, cfg.threads, [&](int p) {
            const int k = std::min<int>(cfg.stitch.knn_extract,
                                        (int)cover.patches[p].size() - 1);
            parts[p] = extract_patch_edges(predictions[p], cover.patches[p], k, p);
        });
        for (auto& part : parts) {
            measurements.dropped_nonpositive += part.dropped_nonpositive;
            measurements.records.insert(measurements.records.end(), part.records.begin(),
                                        part.records.end());
        }
    });
    summary.n_measurements = static_cast<long>(measurements.records.size());

    // Step 5: overlap disagreement and patch reliabilities.
    std::vector<PairDisagreement> disagreements;
    PatchReliability reliability;
    stage("reliability", clock, [&] {
        for (int p = 0; p < n_patches; ++p) {
            for (int q = p + 1; q < n_patches; ++q) {
                std::vector<std::pair<int, int>> shared_local;
                const auto& pa = cover.patches[p];
                const auto& pb = cover.patches[q];
                size_t a = 0, b = 0;
                while (a < pa.size() && b < pb.size()) {
                    if (pa[a] == pb[b]) {
                        shared_local.emplace_back((int)a, (int)b);
                        ++a;
                        ++b;
                    } else if (pa[a] < pb[b]) {
                        ++a;
                    } else {
                        ++b;
                    }
                }
                const auto dis = overlap_disagreement(predictions[p], predictions[q],
                                                      shared_local,
                                                      cfg.stitch.min_overlap_cells);
                if (dis) disagreements.push_back({p, q, *dis});
            }
        }
        reliability = patch_reliabilities(n_patches, disagreements);
        if (cfg.uniform_weighting)
            std::fill(reliability.a.begin(), reliability.a.end(), 1.0);
        if (!disagreements.empty()) {
            std::vector<double> values;
            values.reserve(disagreements.size());
            double sum = 0.0;
            for (const auto& d : disagreements) {
                values.push_back(d.value);
                sum += d.value;
            }
            std::sort(values.begin(), values.end());
            const size_t m = values.size();
            summary.median_disagreement =
                (m % 2 == 1) ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
            summary.mean_disagreement = sum / double(m);
        }
        summary.min_reliability =
            *std::min_element(reliability.a.begin(), reliability.a.end());
    });

    // Step 6: aggregate the stitched distance graph.
    const StitchedGraph stitched = stage("stitch", clock, [&] {
        StitchedGraph g = aggregate_edges(measurements, reliability, cfg.stitch, n);
        if (g.edges.empty())
            throw std::runtime_error(
                "stitched graph is empty: no pair passed support and spread filters");
        return g;
    });
    summary.n_edges = static_cast<long>(stitched.edges.size());

    // Step 7: global distance-geometry solve.
    const SolveResult solved = stage("solve", clock, [&] {
        Rng rng(cfg.solver.seed);
        return solve(stitched, cfg.solver, rng);
    });
    summary.solver = solved.diagnostics;

    std::vector<std::string> outputs;
    stage("write", clock, [&] {
        CoordinateTable result;
        result.ids = gt.ids;
        result.coords = solved.coords;
        write_coordinate_table((fs::path(out_dir) / "X.csv").string(), result);
        outputs.push_back("X.csv");
        write_stitched_graph((fs::path(out_dir) / "stitched.csv").string(), stitched);
        outputs.push_back("stitched.csv");
        write_locality_graph((fs::path(out_dir) / "graph.csv").string(), graph);
        outputs.push_back("graph.csv");
        write_patch_cover((fs::path(out_dir) / "patches.json").string(), cover);
        outputs.push_back("patches.json");

        json diag;
        diag["stitching"] = {
            {"n_patches", summary.n_patches},
            {"n_measurements", summary.n_measurements},
            {"n_edges", summary.n_edges},
            {"n_overlap_pairs", disagreements.size()},
            {"median_overlap_disagreement", summary.median_disagreement},
            {"mean_overlap_disagreement", summary.mean_disagreement},
            {"min_reliability", summary.min_reliability},
            {"reliabilities", reliability.a},
            {"dropped_nonpositive", measurements.dropped_nonpositive}};
        diag["solver"] = {{"checkpoint_iters", summary.solver.checkpoint_iters},
                          {"huber", summary.solver.huber_trajectory},
                          {"stress1", summary.solver.stress1_trajectory},
                          {"initial_huber", summary.solver.initial_huber},
                          {"final_huber", summary.solver.final_huber},
                          {"final_stress1", summary.solver.final_stress1},
                          {"edge_residual_mean", summary.solver.edge_residual_mean},
                          {"edge_residual_median", summary.solver.edge_residual_median},
                          {"edge_residual_max", summary.solver.edge_residual_max},
                          {"scale_factor", summary.solver.scale_factor},
                          {"n_components", summary.solver.n_components},
                          {"orphan_count", summary.solver.orphan_count}};
        write_text_atomic((fs::path(out_dir) / "diagnostics.json").string(),
                          diag.dump(2) + "\n");
        outputs.push_back("diagnostics.json");
    });

    write_manifest(out_dir, "reconstruct", cfg, clock, outputs,
                   {{"patch_count", summary.n_patches},
                    {"stitched_edge_count", summary.n_edges},
                    {"solver_final_stress1", summary.solver.final_stress1},
                    {"solver_components", summary.solver.n_components}});
    return summary;
}

MetricsReport run_evaluate(const PipelineConfig& cfg, const std::string& pred_path,
                           const std::string& gt_path, const std::string& out_dir,
                           bool pred_is_distances) {
    cfg.validate();
    fs::create_directories(out_dir);
    StageClock clock;

    CoordinateTable gt;
    CoordinateTable pred;
    Matrix pred_distances;
    std::vector<std::string> pred_ids;
    stage("read", clock, [&] {
        try {
            gt = read_coordinate_table(gt_path);
            if (pred_is_distances) {
                pred_distances = read_labeled_matrix_csv(pred_path, pred_ids);
            } else {
                pred = read_coordinate_table(pred_path);
                pred_ids = pred.ids;
            }
        } catch (const std::runtime_error& e) {
            throw ConfigError(e.what());
        }
    });

    // Align prediction rows to the GT id order.
    std::map<std::string, int> pred_row;
    for (size_t t = 0; t < pred_ids.size(); ++t)
        pred_row[pred_ids[t]] = static_cast<int>(t);
    std::vector<int> perm(gt.size());
    std::vector<std::string> missing;
    for (int i = 0; i < gt.size(); ++i) {
        const auto it = pred_row.find(gt.ids[i]);
        if (it == pred_row.end()) {
            missing.push_back(gt.ids[i]);
            continue;
        }
        perm[i] = it->second;
    }
    if (!missing.empty() || pred_ids.size() != gt.ids.size()) {
        std::string msg = "prediction/GT id mismatch;";
        if (!missing.empty()) {
            msg += " missing from prediction:";
            for (size_t t = 0; t < missing.size() && t < 10; ++t) msg += " " + missing[t];
            if (missing.size() > 10)
                msg += " (+" + std::to_string(missing.size() - 10) + " more)";
        }
        if (pred_ids.size() != gt.ids.size())
            msg += " prediction has " + std::to_string(pred_ids.size()) + " ids, GT has " +
                   std::to_string(gt.ids.size());
        throw ConfigError(msg);
    }

    MetricsReport report = stage("metrics", clock, [&] {
        if (pred_is_distances) {
            Matrix d(gt.size(), gt.size());
            for (int i = 0; i < gt.size(); ++i)
                for (int j = 0; j < gt.size(); ++j)
                    d(i, j) = pred_distances(perm[i], perm[j]);
            return evaluate_all_from_distances(d, gt.coords, cfg.metrics);
        }
        Matrix x(gt.size(), 2);
        for (int i = 0; i < gt.size(); ++i) x.row(i) = pred.coords.row(perm[i]);
        return evaluate_all(x, gt.coords, cfg.metrics);
    });

    std::vector<std::string> outputs;
    stage("write", clock, [&] {
        write_text_atomic((fs::path(out_dir) / "metrics.json").string(),
                          metrics_report_json(report));
        outputs.push_back("metrics.json");
        if (cfg.evaluate_distortion && !pred_is_distances) {
            Matrix x(gt.size(), 2);
            for (int i = 0; i < gt.size(); ++i) x.row(i) = pred.coords.row(perm[i]);
            const DistortionMap map = distortion_map(x, gt.coords);
            write_distortion_map((fs::path(out_dir) / "distortion.csv").string(),
                                 (fs::path(out_dir) / "distortion.json").string(), map);
            outputs.push_back("distortion.csv");
            outputs.push_back("distortion.json");
        }
    });

    write_manifest(out_dir, "evaluate", cfg, clock, outputs, json::object());
    return report;
}

namespace {

struct ColumnSpec {
    std::string name;
    bool higher_better;
};

std::vector<ColumnSpec> report_columns(const MetricsReport& first) {
    std::vector<ColumnSpec> cols = {
        {"spearman", true},  {"pearson", true},        {"stress1", false},
        {"edge_roc_auc", true}, {"bap", true},         {"shell_f1_macro", true},
        {"trust_at_k", true},   {"cont_at_k", true},   {"swd", false},
        {"w1_knn", false},      {"cal_err", false}};
    for (const auto& [k, v] : first.lrmse)
        cols.push_back({"lrmse@" + std::to_string(k), false});
    return cols;
}

double report_value(const MetricsReport& r, const std::string& col) {
    if (col == "spearman") return r.spearman;
    if (col == "pearson") return r.pearson;
    if (col == "stress1") return r.stress1;
    if (col == "edge_roc_auc") return r.edge_roc_auc;
    if (col == "bap") return r.bap;
    if (col == "shell_f1_macro") return r.shell_f1_macro;
    if (col == "trust_at_k") return r.trust_at_k;
    if (col == "cont_at_k") return r.cont_at_k;
    if (col == "swd") return r.swd;
    if (col == "w1_knn") return r.w1_knn;
    if (col == "cal_err") return r.cal_err;
    const auto at = col.find('@');
    const int k = std::stoi(col.substr(at + 1));
    const auto it = r.lrmse.find(k);
    return it == r.lrmse.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

std::string fmt_metric(double v) {
    if (!std::isfinite(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::string run_report(const std::vector<std::string>& metric_files,
                       const std::vector<std::string>& labels, const std::string& format) {
    if (metric_files.empty()) throw ConfigError("report: need at least one metrics file");
    if (format != "md" && format != "csv")
        throw ConfigError("report: format must be 'md' or 'csv'");

    std::vector<MetricsReport> reports;
    for (const auto& path : metric_files) {
        try {
            reports.push_back(metrics_report_from_json(read_text(path)));
        } catch (const std::exception& e) {
            throw ConfigError("report: cannot parse " + path + ": " + e.what());
        }
    }
    for (size_t r = 1; r < reports.size(); ++r) {
        if (reports[r].lrmse.size() != reports[0].lrmse.size())
            throw ConfigError("report: inconsistent schemas (differing lrmse keys)");
        for (const auto& [k, v] : reports[0].lrmse)
            if (!reports[r].lrmse.count(k))
                throw ConfigError("report: inconsistent schemas (differing lrmse keys)");
    }

    const auto cols = report_columns(reports[0]);
    // Best and second-best per column, direction-aware; NaNs never win.
    std::vector<int> best(cols.size(), -1), second(cols.size(), -1);
    for (size_t c = 0; c < cols.size(); ++c) {
        for (size_t r = 0; r < reports.size(); ++r) {
            const double v = report_value(reports[r], cols[c].name);
            if (!std::isfinite(v)) continue;
            auto better = [&](double a, double b) {
                return cols[c].higher_better ? a > b : a < b;
            };
            if (best[c] < 0 || better(v, report_value(reports[best[c]], cols[c].name))) {
                second[c] = best[c];
                best[c] = static_cast<int>(r);
            } else if (second[c] < 0 ||
                       better(v, report_value(reports[second[c]], cols[c].name))) {
                second[c] = static_cast<int>(r);
            }
        }
    }

    std::ostringstream out;
    if (format == "csv") {
        out << "run";
        for (const auto& col : cols) out << "," << col.name;
        out << "\n";
        for (size_t r = 0; r < reports.size(); ++r) {
            out << labels[r];
            for (const auto& col : cols) {
                const double v = report_value(reports[r], col.name);
                out << "," << (std::isfinite(v) ? fmt_double(v) : "nan");
            }
            out << "\n";
        }
        return out.str();
    }

    out << "| run |";
    for (const auto& col : cols)
        out << " " << col.name << (col.higher_better ? " ↑" : " ↓") << " |";
    out << "\n|---|";
    for (size_t c = 0; c < cols.size(); ++c) out << "---|";
    out << "\n";
    for (size_t r = 0; r < reports.size(); ++r) {
        out << "| " << labels[r] << " |";
        for (size_t c = 0; c < cols.size(); ++c) {
            const std::string v = fmt_metric(report_value(reports[r], cols[c].name));
            if (reports.size() > 1 && static_cast<int>(r) == best[c])
                out << " **" << v << "** |";
            else if (static_cast<int>(r) == second[c])
                out << " *" << v << "* |";
            else
                out << " " << v << " |";
        }
        out << "\n";
    }
    return out.str();
}

int verify_run_dir(const std::string& dir, std::string* report) {
    json manifest;
    try {
        manifest = json::parse(read_text((fs::path(dir) / "manifest.json").string()));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("verify: cannot read manifest: ") + e.what());
    }
    if (!manifest.contains("outputs"))
        throw ConfigError("verify: manifest has no 'outputs' section");

    int mismatches = 0;
    std::ostringstream out;
    for (const auto& [rel, digest] : manifest["outputs"].items()) {
        std::string actual;
        try {
            actual = sha256_file((fs::path(dir) / rel).string());
        } catch (const std::exception&) {
            out << "missing  " << rel << "\n";
            ++mismatches;
            continue;
        }
        if (actual == digest.get<std::string>()) {
            out << "ok       " << rel << "\n";
        } else {
            out << "mismatch " << rel << "\n";
            ++mismatches;
        }
    }
    if (report) *report = out.str();
    return mismatches == 0 ? 0 : 1;
}

}  // namespace distgeo
