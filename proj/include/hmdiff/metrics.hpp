#pragma once

// Perceptual-difference metrics over an EvalFrame: accuracy, confusion
// matrices (against truth, another classifier, or restricted to shared
// mistakes), per-sample difficulty scores, difficulty-stratified accuracy,
// balanced-set matching percentage, and difficulty-quadrant splits.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmdiff/ingest.hpp"

namespace hmdiff {

// ---- accuracy / confusion ------------------------------------------------------

// Fraction of samples where the classifier's label equals the clean label.
double accuracy(const EvalFrame& frame, const ClassifierView& classifier);
double accuracy(const EvalFrame& frame, std::string_view classifier_id);

class ConfusionMatrix {
public:
    // counts is row-major K x K; cells are counts divided by the row total.
    // Rows with a zero total stay all-zero and report row_empty().
    static ConfusionMatrix from_counts(std::size_t num_classes, std::vector<std::int64_t> counts);

    std::size_t num_classes() const noexcept { return k_; }
    double cell(std::size_t p, std::size_t q) const { return cells_[p * k_ + q]; }
    std::int64_t count(std::size_t p, std::size_t q) const { return counts_[p * k_ + q]; }
    std::int64_t row_count(std::size_t p) const { return row_counts_[p]; }
    bool row_empty(std::size_t p) const { return row_counts_[p] == 0; }
    std::int64_t n_samples() const noexcept { return n_samples_; }
    const std::vector<double>& cells() const noexcept { return cells_; }
    const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

private:
    std::size_t k_ = 0;
    std::vector<double> cells_;
    std::vector<std::int64_t> counts_;
    std::vector<std::int64_t> row_counts_;
    std::int64_t n_samples_ = 0;
};

// Predicate over frame row indices; an empty function selects every sample.
using SampleFilter = std::function<bool(std::size_t)>;

// counts[p][q] = #{i selected : reference_i = p, predictions_i = q}.
// Throws EmptySelection when the filter selects nothing.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> reference,
                          std::size_t num_classes, const SampleFilter& filter = {});
// Against the frame's clean labels.
ConfusionMatrix confusion(const EvalFrame& frame, const ClassifierView& predictions,
                          const SampleFilter& filter = {});

// Which samples enter an error confusion between classifiers a (rows) and b
// (columns): both wrong, a wrong, or at least one wrong.
enum class ErrorFilter { Both, Row, Either };
std::string_view to_string(ErrorFilter filter);
ErrorFilter parse_error_filter(std::string_view text);

struct PairConfusion {
    std::string row_id;     // a: its predictions index rows
    std::string column_id;  // b: its predictions index columns
    std::vector<std::int64_t> counts;
    std::int64_t n_samples = 0;
};

// Per ordered pair (a, b), a in `rows`, b in `columns`, a != b (by id).
// Pairs with no qualifying sample are kept with n_samples = 0.
std::vector<PairConfusion> pairwise_error_counts(const EvalFrame& frame,
                                                 const std::vector<ClassifierView>& rows,
                                                 const std::vector<ClassifierView>& columns,
                                                 ErrorFilter filter = ErrorFilter::Both);

// Counts summed over every ordered pair, then row-normalized once.
// Throws EmptySelection if no pair has a qualifying sample.
ConfusionMatrix group_error_confusion(const EvalFrame& frame, const std::vector<ClassifierView>& rows,
                                      const std::vector<ClassifierView>& columns,
                                      ErrorFilter filter = ErrorFilter::Both);

// ---- correctness ----------------------------------------------------------------

struct Correctness {
    std::string classifier_id;
    std::vector<std::string> sample_ids;  // ascending
    std::vector<std::uint8_t> bits;       // 1 where prediction == clean label

    static Correctness of(const EvalFrame& frame, const ClassifierView& classifier);

    std::optional<bool> at(std::string_view sample_id) const;
    std::size_t num_correct() const;
};

// ---- difficulty scores ----------------------------------------------------------

enum class DifficultyMetric {
    MachineConfidence,
    MachineAgreement,
    HumanAgreement,
    HumanEntropy,
    AnnotationTime,
};
std::string_view to_string(DifficultyMetric metric);

struct DifficultyScore {
    DifficultyMetric metric = DifficultyMetric::MachineConfidence;
    std::vector<double> values;    // aligned with frame.sample_ids()
    std::size_t num_classes = 0;
    std::size_t group_size = 0;    // members that produced an agreement/entropy/time score
    std::string source;            // classifier id for confidence, else a description
};

DifficultyScore machine_confidence(const ClassifierView& machine);

// Fraction of group members (minus `exclude`) whose label equals the clean label.
DifficultyScore agreement(const EvalFrame& frame, const std::vector<ClassifierView>& group,
                          std::optional<std::string_view> exclude = std::nullopt,
                          DifficultyMetric metric = DifficultyMetric::MachineAgreement);

// Natural-log entropy of the empirical label distribution, 0 log 0 = 0.
DifficultyScore human_entropy(const EvalFrame& frame, const std::vector<ClassifierView>& humans);

// Per-sample mean annotation time. Throws MissingTimes if a set has none.
DifficultyScore mean_time(const EvalFrame& frame, std::span<const AnnotationSet> humans);

enum class SdNorm { L1, L2 };
std::string_view to_string(SdNorm norm);
SdNorm parse_sd_norm(std::string_view text);

struct SampleDistributionDiff {
    std::string classifier_id;
    std::vector<double> values;  // aligned with frame.sample_ids()
    double mean = 0.0;
};

// Distance between the machine's probability vector and the mean of the
// humans' one-hot labels, per sample.
SampleDistributionDiff sample_distribution_diff(const EvalFrame& frame, const ClassifierView& machine,
                                                const std::vector<ClassifierView>& humans,
                                                SdNorm norm = SdNorm::L1);

// ---- binning / stratification ------------------------------------------------------

struct BinSpec {
    enum class Kind { Uniform, Levels, Quantiles, Edges };
    Kind kind = Kind::Uniform;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 10;     // uniform / quantile bin count; levels denominator k
    std::vector<double> edges;  // Kind::Edges

    static BinSpec uniform(double lo, double hi, std::size_t count);
    // Exact values j/k for j = 0..k.
    static BinSpec levels(std::size_t k);
    // Empirical quantiles (linear interpolation between order statistics).
    static BinSpec quantiles(std::size_t count);
    static BinSpec explicit_edges(std::vector<double> edges);
};

// Default bins per metric: confidence 10 uniform on [0,1]; agreement j/k;
// entropy 10 uniform on [0, ln K]; time deciles.
BinSpec default_bins(const DifficultyScore& score);

// Concrete bins. Edge-based bins are half-open [lo, hi) except the last,
// which is closed. Level bins have lo == hi == j/k.
class Binning {
public:
    static Binning resolve(const BinSpec& spec, std::span<const double> values);

    std::size_t size() const noexcept { return lo_.size(); }
    double lo(std::size_t b) const { return lo_[b]; }
    double hi(std::size_t b) const { return hi_[b]; }
    // Throws InvalidBins for values outside every bin.
    std::size_t assign(double value) const;

private:
    bool discrete_ = false;
    std::size_t levels_ = 0;
    std::vector<double> lo_;
    std::vector<double> hi_;
};

struct Band {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

struct ClassifierBins {
    std::string classifier_id;
    std::vector<std::optional<double>> accuracy;  // nullopt for empty bins
    std::vector<std::size_t> n_samples;
};

struct StratifiedBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n_samples = 0;
};

struct StratifiedAccuracy {
    DifficultyMetric metric = DifficultyMetric::MachineConfidence;
    std::vector<StratifiedBin> bins;
    std::vector<ClassifierBins> per_classifier;
    std::vector<std::optional<Band>> band;  // across per_classifier; nullopt if no data
};

// Per-bin accuracy of every classifier under one shared difficulty score.
StratifiedAccuracy stratify(const EvalFrame& frame, const std::vector<ClassifierView>& classifiers,
                            const DifficultyScore& difficulty, const BinSpec& bins);

// Leave-one-out variant: each member is scored against the agreement of the
// rest of the group (levels j/(k-1)). Bin n_samples sums over members.
StratifiedAccuracy stratify_leave_one_out(const EvalFrame& frame,
                                          const std::vector<ClassifierView>& group,
                                          DifficultyMetric metric = DifficultyMetric::MachineAgreement);

// Per-bin min/mean/max over rows of per-bin values (nullopt entries skipped).
std::vector<std::optional<Band>> band_over(const std::vector<std::vector<std::optional<double>>>& rows);

// ---- balanced set / matching ---------------------------------------------------------

// Equal numbers of reference-correct and reference-incorrect ids, drawn
// without replacement from a stream seeded by `seed`. Sorted ascending.
std::vector<std::string> balanced_subset(const Correctness& reference, std::uint64_t seed);

// (P(a correct | b correct) + P(a wrong | b wrong)) / 2 over `subset`.
double matching_percentage(const Correctness& a, const Correctness& b,
                           std::span<const std::string> subset);

// ---- quadrants --------------------------------------------------------------------

// Scores are read as "higher is easier": a sample is easy for a party when
// its score is >= that party's threshold.
struct QuadrantThresholds {
    double machine = 0.5;
    double human = 0.5;
};

struct Quadrant {
    std::string name;  // EE, EH, HE, HH: machine letter first
    std::size_t n_samples = 0;
    std::optional<ConfusionMatrix> confusion;  // nullopt when empty
};

std::array<Quadrant, 4> quadrant_confusions(const DifficultyScore& machine_difficulty,
                                            const DifficultyScore& human_difficulty,
                                            QuadrantThresholds thresholds,
                                            const ClassifierView& classifier, const EvalFrame& frame);

}  // namespace hmdiff
