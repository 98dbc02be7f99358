#pragma once

// Input data model: label space, machine prediction sets, human annotation
// sets, and the aligned, immutable EvalFrame built from them.
//
// Every per-sample container stores its rows in ascending sample-id order.
// Inside an EvalFrame all sets share the frame's sample order, so row i of
// any set refers to frame.sample_ids()[i].

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hmdiff {

inline constexpr double kSimplexTolerance = 1e-6;

class LabelSpace {
public:
    // Throws DuplicateClass or TooFewClasses.
    explicit LabelSpace(std::vector<std::string> class_names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& class_names() const noexcept { return names_; }
    const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
    std::optional<int> index_of(std::string_view name) const;

    bool operator==(const LabelSpace&) const = default;

private:
    std::vector<std::string> names_;
};

enum class PredictionKind { Soft, Hard };

std::string_view to_string(PredictionKind kind);

// Read-only view over one classifier's labels (and probabilities, when soft).
// Machines, humans, and derived classifiers (e.g. a majority vote) all expose
// this so metric and teaming code does not care where labels came from.
struct ClassifierView {
    std::string_view id;
    std::span<const int> labels;
    std::span<const double> probs;  // row-major N x K; empty for hard labels
    std::size_t num_classes = 0;

    bool is_soft() const noexcept { return !probs.empty(); }
    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> probabilities(std::size_t row) const {
        return probs.subspan(row * num_classes, num_classes);
    }
    // Max probability of row `row`. Soft views only.
    double confidence(std::size_t row) const;
};

// Index of the largest entry; ties go to the lowest index.
int argmax(std::span<const double> values);

// Sample id + integer label pairs, e.g. the clean labels.
struct LabelTable {
    std::vector<std::string> sample_ids;  // ascending
    std::vector<int> labels;

    // Validates labels against `num_classes`, rejects duplicate/empty ids, sorts.
    static LabelTable make(std::vector<std::pair<std::string, int>> rows, std::size_t num_classes,
                           std::string_view source = "labels");
};

struct PredictionSet {
    std::string classifier_id;
    PredictionKind kind = PredictionKind::Hard;
    std::string group;  // optional tag used to run threshold selection per group
    std::size_t num_classes = 0;
    std::vector<std::string> sample_ids;  // ascending
    std::vector<int> labels;              // hard label, or argmax of the soft row
    std::vector<double> probs;            // row-major N x K; empty when hard

    // Validates each vector (entries in [0,1], sum within 1e-6 of 1) and
    // renormalizes by the row sum so rows lie exactly on the simplex.
    static PredictionSet soft(std::string id, std::size_t num_classes,
                              std::vector<std::pair<std::string, std::vector<double>>> rows,
                              std::string_view source = "predictions");
    static PredictionSet hard(std::string id, std::size_t num_classes,
                              std::vector<std::pair<std::string, int>> rows,
                              std::string_view source = "predictions");

    std::size_t size() const noexcept { return sample_ids.size(); }
    ClassifierView view() const;
};

struct AnnotationSet {
    std::string annotator_id;
    std::size_t num_classes = 0;
    std::vector<std::string> sample_ids;  // ascending
    std::vector<int> labels;
    std::optional<std::vector<double>> times;  // seconds, aligned with sample_ids

    struct Row {
        std::string sample_id;
        int label = 0;
        std::optional<double> time_seconds;
    };

    // Times must be present on all rows or none (PartialTimes), and be >= 0.
    static AnnotationSet make(std::string id, std::size_t num_classes, std::vector<Row> rows,
                              std::string_view source = "annotations");

    std::size_t size() const noexcept { return sample_ids.size(); }
    bool has_times() const noexcept { return times.has_value(); }
    ClassifierView view() const;
};

class EvalFrame;

// Strict alignment: every set must cover exactly the ids of `truth`.
EvalFrame build_frame(LabelTable truth, std::vector<PredictionSet> machines,
                      std::vector<AnnotationSet> humans, LabelSpace label_space);

// Immutable after construction; copies share the same underlying data.
class EvalFrame {
public:
    const LabelSpace& label_space() const noexcept { return data_->label_space; }
    std::size_t num_classes() const noexcept { return data_->label_space.size(); }
    std::size_t size() const noexcept { return data_->truth.sample_ids.size(); }
    const std::vector<std::string>& sample_ids() const noexcept { return data_->truth.sample_ids; }
    std::span<const int> truth() const noexcept { return data_->truth.labels; }
    const std::vector<PredictionSet>& machines() const noexcept { return data_->machines; }
    const std::vector<AnnotationSet>& humans() const noexcept { return data_->humans; }

    std::vector<std::string> machine_ids() const;
    std::vector<std::string> human_ids() const;

    bool has_classifier(std::string_view id) const;
    bool is_machine(std::string_view id) const;
    bool is_human(std::string_view id) const;
    const PredictionSet& machine(std::string_view id) const;
    const AnnotationSet& human(std::string_view id) const;

    // View of a machine or human by id. Throws UnknownId.
    ClassifierView view(std::string_view id) const;

    std::optional<std::size_t> index_of(std::string_view sample_id) const;

private:
    struct Data {
        LabelSpace label_space;
        LabelTable truth;
        std::vector<PredictionSet> machines;
        std::vector<AnnotationSet> humans;
    };
    explicit EvalFrame(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
    friend EvalFrame build_frame(LabelTable, std::vector<PredictionSet>, std::vector<AnnotationSet>,
                                 LabelSpace);

    std::shared_ptr<const Data> data_;
};

// ---- file formats ----------------------------------------------------------

LabelSpace parse_label_space(const std::filesystem::path& path);
LabelTable parse_truth(const std::filesystem::path& path, const LabelSpace& label_space);
// Kind inferred from the header; classifier id from the file stem
// (`predictions_<id>.csv`) unless `id` is given.
PredictionSet parse_predictions(const std::filesystem::path& path, const LabelSpace& label_space,
                                std::optional<std::string> id = std::nullopt);
AnnotationSet parse_annotations(const std::filesystem::path& path, const LabelSpace& label_space,
                                std::optional<std::string> id = std::nullopt);

// In-memory variants, `source` names the input in error messages.
LabelSpace parse_label_space_text(std::string_view text, std::string_view source);
LabelTable parse_truth_text(std::string_view text, const LabelSpace& label_space,
                            std::string_view source);
PredictionSet parse_predictions_text(std::string_view text, const LabelSpace& label_space,
                                     std::string id, std::string_view source);
AnnotationSet parse_annotations_text(std::string_view text, const LabelSpace& label_space,
                                     std::string id, std::string_view source);

// Writers produce the same formats; reals use 17 significant digits.
std::string format_label_space(const LabelSpace& label_space);
std::string format_truth(const LabelTable& truth);
std::string format_predictions(const PredictionSet& set);
std::string format_annotations(const AnnotationSet& set);

// `%.17g`, with "-0" normalized to "0".
std::string format_real(double value);

// Id embedded in a file name such as `predictions_CE.csv` -> "CE".
std::string id_from_filename(const std::filesystem::path& path, std::string_view prefix);

std::string read_file(const std::filesystem::path& path);

}  // namespace hmdiff
