// distgeo: synthesize, reconstruct, evaluate, and report on distance-first
// patchwise 2D reconstructions. Exit codes: 0 success, 2 usage/config error,
// 1 runtime failure.

#include "distgeo/io.hpp"
#include "distgeo/log.hpp"
#include "distgeo/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = ".";
    int64_t seed = -1;
    int threads = -1;
    int patch_size = -1;
    std::string weighting;
    std::string predictor;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_pipeline_flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "master seed; rederives every stage seed");
    if (with_pipeline_flags) {
        cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware)");
        cmd->add_option("--patch-size", flags.patch_size, "override patch.n_patch");
        cmd->add_option("--weighting", flags.weighting,
                        "stitch aggregation weighting: weighted|uniform")
            ->check(CLI::IsMember({"weighted", "uniform"}));
        cmd->add_option("--predictor", flags.predictor,
                        "per-patch predictor: oracle|analytic")
            ->check(CLI::IsMember({"oracle", "analytic"}));
    }
}

distgeo::PipelineConfig make_config(const CommonFlags& flags) {
    distgeo::PipelineConfig cfg = flags.config_path.empty()
                                      ? distgeo::default_config()
                                      : distgeo::load_config(flags.config_path);
    if (flags.seed >= 0) distgeo::apply_master_seed(cfg, static_cast<uint64_t>(flags.seed));
    if (flags.threads >= 0) cfg.threads = flags.threads;
    if (flags.patch_size > 0) cfg.patch.n_patch = flags.patch_size;
    if (!flags.weighting.empty()) cfg.uniform_weighting = flags.weighting == "uniform";
    if (!flags.predictor.empty()) cfg.predictor = flags.predictor;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distance-first patchwise 2D reconstruction toolkit"};
    app.require_subcommand(1);

    CommonFlags synth_flags, rec_flags, eval_flags;

    auto* synth = app.add_subcommand("synth", "generate a synthetic ground-truth slide");
    add_common(synth, synth_flags, false);

    auto* rec = app.add_subcommand("reconstruct",
                                   "run patchwise inference and the global solve");
    std::string slide_dir;
    rec->add_option("--slide", slide_dir, "slide directory from `synth`")->required();
    add_common(rec, rec_flags, true);

    auto* eval = app.add_subcommand("evaluate", "score a reconstruction against GT");
    std::string pred_path, gt_path;
    bool pred_is_distances = false, emit_distortion = false;
    eval->add_option("--pred", pred_path, "predicted coordinates CSV (id,x,y)")->required();
    eval->add_option("--gt", gt_path, "ground-truth coordinates CSV (id,x,y)")->required();
    eval->add_flag("--distances", pred_is_distances,
                   "treat --pred as a dense labeled distance matrix CSV");
    eval->add_flag("--distortion", emit_distortion,
                   "also write the Morton-ordered distortion map");
    add_common(eval, eval_flags, false);

    auto* rep = app.add_subcommand("report", "tabulate one or more metrics.json files");
    std::vector<std::string> report_files;
    std::string report_format = "md", report_out;
    rep->add_option("files", report_files, "metrics.json files")->required();
    rep->add_option("--format", report_format, "md|csv")
        ->check(CLI::IsMember({"md", "csv"}));
    rep->add_option("--out", report_out, "write the table here instead of stdout");

    auto* ver = app.add_subcommand("verify", "check manifest digests of a run directory");
    std::string verify_dir;
    ver->add_option("--dir", verify_dir, "run directory containing manifest.json")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            const auto cfg = make_config(synth_flags);
            distgeo::run_synth(cfg, synth_flags.out_dir);
            std::printf("synth: wrote slide to %s\n", synth_flags.out_dir.c_str());
        } else if (rec->parsed()) {
            const auto cfg = make_config(rec_flags);
            const auto summary = distgeo::run_reconstruct(cfg, slide_dir, rec_flags.out_dir);
            std::printf("reconstruct: %d patches, %ld measurements, %ld stitched edges, "
                        "final edge stress1 %.6g -> %s\n",
                        summary.n_patches, summary.n_measurements, summary.n_edges,
                        summary.solver.final_stress1, rec_flags.out_dir.c_str());
        } else if (eval->parsed()) {
            auto cfg = make_config(eval_flags);
            if (emit_distortion) cfg.evaluate_distortion = true;
            const auto report = distgeo::run_evaluate(cfg, pred_path, gt_path,
                                                      eval_flags.out_dir, pred_is_distances);
            std::printf("evaluate: spearman %.4f stress1 %.4f trust@%d %.4f -> %s\n",
                        report.spearman, report.stress1, cfg.metrics.k, report.trust_at_k,
                        (std::filesystem::path(eval_flags.out_dir) / "metrics.json")
                            .string()
                            .c_str());
        } else if (rep->parsed()) {
            std::vector<std::string> labels;
            for (const auto& f : report_files)
                labels.push_back(std::filesystem::path(f).parent_path().filename().empty()
                                     ? std::filesystem::path(f).stem().string()
                                     : std::filesystem::path(f).parent_path().filename()
                                           .string());
            const std::string table = distgeo::run_report(report_files, labels, report_format);
            if (report_out.empty()) {
                std::fputs(table.c_str(), stdout);
            } else {
                distgeo::write_text_atomic(report_out, table);
                std::printf("report: wrote %s\n", report_out.c_str());
            }
        } else if (ver->parsed()) {
            std::string detail;
            const int rc = distgeo::verify_run_dir(verify_dir, &detail);
            std::fputs(detail.c_str(), stdout);
            std::printf(rc == 0 ? "verify: all digests match\n"
                                : "verify: digest mismatches found\n");
            return rc;
        }
    } catch (const distgeo::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const distgeo::StageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
