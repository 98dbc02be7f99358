#pragma once

// Synthetic human/machine populations with known generating confusions.
//
// Per sample:
//   truth      ~ class_prior                               (stream "truth")
//   u_shared   ~ U[0,1)                                    (stream "shared")
// Per machine m (stream "machine:<id>"), three draws per sample:
//   mix, u_own, v ~ U[0,1)
//   with probability rho (mix < rho) the label is the shared draw: inverse
//   CDF of row y of shared_confusion (or of m's own confusion when no
//   shared_confusion is configured) at u_shared; otherwise the inverse CDF of
//   m's own row at u_own. Inverse CDFs list the true class first, then the
//   other classes ascending, so low u means a correct label.
//   confidence c = 1/K + (1 - 1/K) g, g = v^(1/s) if correct else v^s
//   (s = confidence_sharpness, g clamped to [1e-6, 1]); the remaining 1 - c
//   is spread evenly over the other classes.
// Per human h (stream "human:<id>"), two draws per sample:
//   u ~ U[0,1) for the label (inverse CDF of h's row), w for the time, which
//   is exponential with mean_hard if the sample is hard, mean_easy otherwise.
//   A sample is hard when the shared draw is an error: u_shared >= r_y, where
//   r_y is shared_confusion[y][y], else the mean of machine diagonals
//   Q_m[y][y], else 1.
//
// Streams are derived from (seed, name), so adding a classifier never
// perturbs another's draws.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hmdiff/ingest.hpp"

namespace hmdiff {

struct MachineSpec {
    std::string id;
    double shared_error_weight = 0.0;  // rho
    std::vector<double> confusion;     // K x K row-stochastic
    double confidence_sharpness = 1.0;
    PredictionKind kind = PredictionKind::Soft;
    std::string group;
};

struct TimeModel {
    double mean_easy = 0.0;
    double mean_hard = 0.0;
};

struct HumanSpec {
    std::string id;
    std::vector<double> confusion;  // K x K row-stochastic
    std::optional<TimeModel> time_model;
};

struct PopulationConfig {
    std::vector<std::string> class_names;
    std::size_t n_samples = 0;
    std::vector<double> class_prior;
    std::optional<std::vector<double>> shared_confusion;
    std::vector<MachineSpec> machines;
    std::vector<HumanSpec> humans;
    std::uint64_t seed = 0;

    std::size_t num_classes() const noexcept { return class_names.size(); }
    // Throws InvalidConfig naming the offending field.
    void validate() const;
};

// Reads the JSON schema documented in docs/synth_config.md.
PopulationConfig parse_population_config(std::string_view json_text, std::string_view source = "config");
PopulationConfig load_population_config(const std::filesystem::path& path);

// Matrix with `diagonal` on the diagonal and the rest spread evenly.
std::vector<double> symmetric_confusion(std::size_t num_classes, double diagonal);

EvalFrame generate(const PopulationConfig& config);

// Generating confusion of a machine (rho S + (1 - rho) Q, or Q without a
// shared confusion) or human. Throws UnknownId.
std::vector<double> expected_confusion(const PopulationConfig& config, std::string_view classifier_id);

// Writes classes.txt, truth.csv, predictions_<id>.csv, annotations_<id>.csv
// and a config.json run configuration referencing them. Returns the file
// names written, in order.
std::vector<std::string> write_frame_files(const EvalFrame& frame, const std::filesystem::path& out_dir);

}  // namespace hmdiff
