#include <ostream>

#include "CLI11.hpp"
#include "hmdiff/error.hpp"
#include "hmdiff/io.hpp"
#include "hmdiff/report.hpp"
#include "hmdiff/synth.hpp"
#include "json.hpp"

namespace hmdiff {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_code_for(ErrorCode code) {
    if (code == ErrorCode::Io) return kExitIo;
    if (is_validation_error(code)) return kExitValidation;
    return kExitComputation;
}

namespace {

struct CliOptions {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    double alpha = kDefaultAlpha;
    std::string which;
    std::string mode;
    double eta = 0.0;
    std::string eta_grid;
    std::string error_filter;
    std::string sd_norm;
    std::string pooling;
    std::string tie;
    std::string ols_points;
    std::string threshold_partner;
    std::vector<std::string> bins;
    std::string synth_config;
};

// CLI flags override the config file.
void apply_overrides(RunSettings& s, const CliOptions& o, const CLI::App& app, const CLI::App& report) {
    if (app.count("--seed")) s.seed = o.seed;
    if (app.count("--alpha")) s.alpha = o.alpha;
    if (report.count("--mode")) s.mode = parse_teaming_mode(o.mode);
    if (report.count("--eta")) s.eta = o.eta;
    if (report.count("--eta-grid")) s.eta_grid = parse_real_list(o.eta_grid);
    if (report.count("--error-filter")) s.error_filter = parse_error_filter(o.error_filter);
    if (report.count("--sd-norm")) s.sd_norm = parse_sd_norm(o.sd_norm);
    if (report.count("--pooling")) s.pooling = parse_pooling(o.pooling);
    if (report.count("--tie")) s.tie = parse_tie_rule(o.tie);
    if (report.count("--ols-points")) s.ols_points = parse_ols_points(o.ols_points);
    if (report.count("--threshold-partner")) s.threshold_partner = o.threshold_partner;
    for (const auto& b : o.bins) {
        const auto eq = b.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "--bins expects metric=spec, got '" + b + "'");
        }
        s.bins[parse_difficulty_metric(b.substr(0, eq))] = parse_bin_spec(b.substr(eq + 1));
    }
    s.validate();
}

RunConfig require_config(const CliOptions& o) {
    if (o.config.empty()) throw Error(ErrorCode::InvalidConfig, "--config is required");
    return load_run_config(o.config);
}

ojson inputs_json(const std::vector<InputFile>& files) {
    ojson list = ojson::array();
    for (const auto& f : files) {
        list.push_back(ojson{{"role", f.role}, {"name", f.name}, {"id", f.id}, {"rows", f.rows}, {"sha256", f.sha256}});
    }
    return list;
}

int cmd_validate(const CliOptions& o, std::ostream& out, std::ostream& err) {
    ojson report;
    int code = kExitOk;
    try {
        const RunConfig cfg = require_config(o);
        const LoadedInputs in = load_inputs(cfg);
        report = ojson{{"status", "ok"},
                       {"num_samples", in.frame.size()},
                       {"num_classes", in.frame.num_classes()},
                       {"machines", in.frame.machine_ids()},
                       {"humans", in.frame.human_ids()},
                       {"inputs", inputs_json(in.files)}};
        out << "ok: " << in.frame.size() << " samples, " << in.frame.machines().size() << " machines, "
            << in.frame.humans().size() << " annotators\n";
    } catch (const Error& e) {
        code = exit_code_for(e.code());
        report = ojson{{"status", "failed"}, {"error_code", to_string(e.code())}, {"error", e.what()}};
        err << "hmdiff validate: " << e.what() << "\n";
    }
    if (!o.out.empty()) write_files_atomic(o.out, {{"validation.json", report.dump(2) + "\n"}});
    return code;
}

int cmd_report(const CliOptions& o, const CLI::App& app, const CLI::App& report, std::ostream& out) {
    if (o.out.empty()) throw Error(ErrorCode::InvalidConfig, "--out is required");
    RunConfig cfg = require_config(o);
    apply_overrides(cfg.settings, o, app, report);
    const ReportKind kind = parse_report_kind(o.which);
    const LoadedInputs in = load_inputs(cfg);
    const ReportFiles files = build_reports(in, cfg.settings, kind);
    write_files_atomic(o.out, files);
    out << "wrote " << files.size() << " files to " << o.out << "\n";
    return kExitOk;
}

int cmd_synth(const CliOptions& o, const CLI::App& app, std::ostream& out) {
    const std::string path = !o.synth_config.empty() ? o.synth_config : o.config;
    if (path.empty()) throw Error(ErrorCode::InvalidConfig, "synth gen needs a population config");
    if (o.out.empty()) throw Error(ErrorCode::InvalidConfig, "--out is required");
    PopulationConfig cfg = load_population_config(path);
    if (app.count("--seed")) cfg.seed = o.seed;
    const EvalFrame frame = generate(cfg);
    const auto written = write_frame_files(frame, o.out);
    out << "wrote " << written.size() << " files to " << o.out << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CliOptions o;
    CLI::App app{"Human vs machine perceptual-difference analysis", "hmdiff"};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "Run configuration (JSON)");
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--seed", o.seed, "Seed for every stochastic choice");
    app.add_option("--alpha", o.alpha, "Significance level");
    app.set_version_flag("--version", std::string(kToolVersion));

    CLI::App* validate = app.add_subcommand("validate", "Parse and align inputs, write validation.json");
    validate->fallthrough();

    CLI::App* report = app.add_subcommand("report", "Compute reports");
    report->fallthrough();
    report->add_option("which", o.which, "accuracy|confusion|difficulty|matching|stats|teaming|all")
        ->required()
        ->check(CLI::IsMember({"accuracy", "confusion", "difficulty", "matching", "stats", "teaming", "all"}));
    report->add_option("--mode", o.mode, "Teaming mode: oracle|swap");
    report->add_option("--eta", o.eta, "Swap threshold in [0,1]");
    report->add_option("--eta-grid", o.eta_grid, "Comma-separated thresholds for selection");
    report->add_option("--error-filter", o.error_filter, "both|row|either");
    report->add_option("--sd-norm", o.sd_norm, "l1|l2");
    report->add_option("--pooling", o.pooling, "cells|pairs");
    report->add_option("--tie", o.tie, "lowest|random:<seed>");
    report->add_option("--ols-points", o.ols_points, "per_classifier|bin_means");
    report->add_option("--threshold-partner", o.threshold_partner, "Partner id for threshold selection");
    report->add_option("--bins", o.bins, "metric=uniform:lo:hi:n|quantiles:n|edges:a,b,..|levels");

    CLI::App* synth = app.add_subcommand("synth", "Synthetic populations");
    synth->fallthrough();
    synth->require_subcommand(1);
    CLI::App* gen = synth->add_subcommand("gen", "Generate ingest-format files from a population config");
    gen->fallthrough();
    gen->add_option("population", o.synth_config, "Population config (JSON); defaults to --config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out, err);
        if (report->parsed()) return cmd_report(o, app, *report, out);
        if (gen->parsed()) return cmd_synth(o, app, out);
    } catch (const Error& e) {
        err << "hmdiff: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "hmdiff: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "hmdiff: " << e.what() << "\n";
        return kExitComputation;
    }
    return kExitValidation;
}

}  // namespace hmdiff
