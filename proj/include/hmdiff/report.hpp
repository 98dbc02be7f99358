#pragma once

// Run configuration, report generation, and the command-line front end.
//
// Every report is rendered into memory as a (file name -> contents) map and
// written in one atomic batch, so a failed run never leaves half a report.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmdiff/error.hpp"
#include "hmdiff/ingest.hpp"
#include "hmdiff/metrics.hpp"
#include "hmdiff/stats.hpp"
#include "hmdiff/teaming.hpp"

namespace hmdiff {

inline constexpr const char* kToolName = "hmdiff";
inline constexpr const char* kToolVersion = "0.1.0";

// Points entering the accuracy-vs-difficulty OLS fits: one per
// (classifier, bin), or one per bin holding the group mean.
enum class OlsPoints { PerClassifier, BinMeans };
std::string_view to_string(OlsPoints points);
OlsPoints parse_ols_points(std::string_view text);

struct RunSettings {
    std::uint64_t seed = 0;
    double alpha = kDefaultAlpha;
    std::vector<double> eta_grid = default_eta_grid();
    std::optional<double> eta;  // swap mode; defaults to the selected eta_star
    TeamingMode mode = TeamingMode::Oracle;
    ErrorFilter error_filter = ErrorFilter::Both;
    SdNorm sd_norm = SdNorm::L1;
    Pooling pooling = Pooling::Cells;
    TieRule tie = TieRule::lowest();
    OlsPoints ols_points = OlsPoints::PerClassifier;
    std::map<DifficultyMetric, BinSpec> bins;  // overrides of default_bins
    QuadrantThresholds quadrant_thresholds;
    std::optional<std::string> threshold_partner;  // defaults to the first human

    // Throws InvalidConfig.
    void validate() const;
};

struct PredictionInput {
    std::filesystem::path path;
    std::optional<std::string> id;
    std::string group;
};

struct AnnotationInput {
    std::filesystem::path path;
    std::optional<std::string> id;
};

struct RunConfig {
    std::filesystem::path classes;
    std::filesystem::path truth;
    std::vector<PredictionInput> predictions;
    std::vector<AnnotationInput> annotations;
    RunSettings settings;
};

// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           std::string_view source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

// "uniform:lo:hi:count", "quantiles:n", "edges:a,b,c" or "levels".
BinSpec parse_bin_spec(std::string_view text);
std::string to_string(const BinSpec& spec);
DifficultyMetric parse_difficulty_metric(std::string_view text);
// Comma-separated reals.
std::vector<double> parse_real_list(std::string_view text);

struct InputFile {
    std::string role;  // classes, truth, predictions, annotations
    std::string name;  // file name without directories
    std::string id;    // classifier id, empty for classes/truth
    std::size_t rows = 0;
    std::string sha256;
};

struct LoadedInputs {
    EvalFrame frame;
    std::vector<InputFile> files;
};

LoadedInputs load_inputs(const RunConfig& config);

using ReportFiles = std::map<std::string, std::string>;

enum class ReportKind { Accuracy, Confusion, Difficulty, Matching, Stats, Teaming, All };
std::string_view to_string(ReportKind kind);
ReportKind parse_report_kind(std::string_view text);

ReportFiles accuracy_report(const EvalFrame& frame, const RunSettings& settings);
ReportFiles confusion_report(const EvalFrame& frame, const RunSettings& settings);
ReportFiles difficulty_report(const EvalFrame& frame, const RunSettings& settings);
ReportFiles matching_report(const EvalFrame& frame, const RunSettings& settings);
ReportFiles stats_report(const EvalFrame& frame, const RunSettings& settings);
ReportFiles teaming_report(const EvalFrame& frame, const RunSettings& settings);

// The requested reports plus manifest.json.
ReportFiles build_reports(const LoadedInputs& inputs, const RunSettings& settings, ReportKind kind);

// Canonical settings object, shared by the manifest and the config digest.
std::string settings_json(const RunSettings& settings);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitComputation = 3;
inline constexpr int kExitIo = 4;

int exit_code_for(ErrorCode code);

// Entry point of the `hmdiff` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hmdiff
