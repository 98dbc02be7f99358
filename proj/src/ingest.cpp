#include "hmdiff/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hmdiff/error.hpp"

namespace hmdiff {

namespace {

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

struct CsvLine {
    std::size_t number = 0;  // 1-based line number in the file
    std::vector<std::string_view> fields;
};

struct Csv {
    std::vector<std::string_view> header;
    std::vector<CsvLine> rows;
};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t start = 0;
    std::size_t number = 1;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(number, line);
        start = end + 1;
        ++number;
    }
    // Trailing blank lines are tolerated; interior ones are not.
    while (!lines.empty() && lines.back().second.empty()) lines.pop_back();
    return lines;
}

Csv read_csv(std::string_view text, std::string_view source) {
    auto lines = split_lines(text);
    if (lines.empty()) throw Error(ErrorCode::Parse, std::string(source) + ": missing header");
    Csv csv;
    csv.header = split_fields(lines.front().second);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].second.empty()) {
            throw Error(ErrorCode::Parse, where(source, lines[i].first) + ": blank line");
        }
        csv.rows.push_back({lines[i].first, split_fields(lines[i].second)});
    }
    return csv;
}

int parse_label(std::string_view field, std::size_t num_classes, std::string_view source,
                std::size_t line) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::Parse,
                    where(source, line) + ": label '" + std::string(field) + "' is not an integer");
    }
    if (value < 0 || value >= static_cast<long long>(num_classes)) {
        throw Error(ErrorCode::LabelOutOfRange, where(source, line) + ": label " +
                                                    std::to_string(value) + " not in [0," +
                                                    std::to_string(num_classes) + ")");
    }
    return static_cast<int>(value);
}

double parse_real(std::string_view field, std::string_view source, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::Parse,
                    where(source, line) + ": '" + std::string(field) + "' is not a finite real");
    }
    return value;
}

void check_sample_id(std::string_view id, std::string_view source, std::size_t line) {
    if (id.empty()) throw Error(ErrorCode::MissingSampleId, where(source, line) + ": empty sample_id");
}

// Sorts rows by sample id and rejects duplicates/empties.
template <typename Row, typename IdOf>
void sort_unique(std::vector<Row>& rows, IdOf id_of, std::string_view source) {
    for (const auto& row : rows) {
        if (id_of(row).empty()) throw Error(ErrorCode::MissingSampleId, std::string(source) + ": empty sample_id");
    }
    std::sort(rows.begin(), rows.end(),
              [&](const Row& a, const Row& b) { return id_of(a) < id_of(b); });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (id_of(rows[i]) == id_of(rows[i - 1])) {
            throw Error(ErrorCode::DuplicateSampleId,
                        std::string(source) + ": sample_id '" + id_of(rows[i]) + "' appears twice");
        }
    }
}

void check_rows_nonempty(std::size_t n, std::string_view source) {
    if (n == 0) throw Error(ErrorCode::Parse, std::string(source) + ": no data rows");
}

std::string join_ids(const std::vector<std::string>& ids) {
    constexpr std::size_t kShown = 10;
    std::string out = "[";
    for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) {
        if (i) out += ",";
        out += ids[i];
    }
    if (ids.size() > kShown) out += ",... (" + std::to_string(ids.size()) + " total)";
    return out + "]";
}

void check_coverage(const std::vector<std::string>& expected, const std::vector<std::string>& got,
                    std::string_view what) {
    if (expected == got) return;
    std::vector<std::string> missing;
    std::vector<std::string> extra;
    std::set_difference(expected.begin(), expected.end(), got.begin(), got.end(),
                        std::back_inserter(missing));
    std::set_difference(got.begin(), got.end(), expected.begin(), expected.end(),
                        std::back_inserter(extra));
    throw Error(ErrorCode::CoverageMismatch, std::string(what) + ": missing=" + join_ids(missing) +
                                                 " extra=" + join_ids(extra));
}

}  // namespace

// ---- LabelSpace -------------------------------------------------------------

LabelSpace::LabelSpace(std::vector<std::string> class_names) : names_(std::move(class_names)) {
    if (names_.size() < 2) {
        throw Error(ErrorCode::TooFewClasses,
                    "label space needs at least 2 classes, got " + std::to_string(names_.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : names_) {
        if (name.empty()) throw Error(ErrorCode::Parse, "empty class name");
        if (!seen.insert(name).second) {
            throw Error(ErrorCode::DuplicateClass, "class '" + name + "' listed twice");
        }
    }
}

std::optional<int> LabelSpace::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::string_view to_string(PredictionKind kind) {
    return kind == PredictionKind::Soft ? "soft" : "hard";
}

// ---- views ------------------------------------------------------------------

int argmax(std::span<const double> values) {
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

double ClassifierView::confidence(std::size_t row) const {
    if (!is_soft()) {
        throw Error(ErrorCode::KindMismatch, "classifier '" + std::string(id) + "' has no probabilities");
    }
    const auto p = probabilities(row);
    return *std::max_element(p.begin(), p.end());
}

// ---- set construction ---------------------------------------------------------

LabelTable LabelTable::make(std::vector<std::pair<std::string, int>> rows, std::size_t num_classes,
                            std::string_view source) {
    for (const auto& [id, label] : rows) {
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
            throw Error(ErrorCode::LabelOutOfRange,
                        std::string(source) + ": label " + std::to_string(label) + " for '" + id + "'");
        }
    }
    sort_unique(rows, [](const auto& r) -> const std::string& { return r.first; }, source);
    LabelTable out;
    out.sample_ids.reserve(rows.size());
    out.labels.reserve(rows.size());
    for (auto& [id, label] : rows) {
        out.sample_ids.push_back(std::move(id));
        out.labels.push_back(label);
    }
    return out;
}

PredictionSet PredictionSet::soft(std::string id, std::size_t num_classes,
                                  std::vector<std::pair<std::string, std::vector<double>>> rows,
                                  std::string_view source) {
    for (auto& [sample, vec] : rows) {
        if (vec.size() != num_classes) {
            throw Error(ErrorCode::ColumnMismatch, std::string(source) + ": '" + sample + "' has " +
                                                       std::to_string(vec.size()) + " probabilities, K=" +
                                                       std::to_string(num_classes));
        }
        double sum = 0.0;
        for (double p : vec) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw Error(ErrorCode::RowNotNormalized,
                            std::string(source) + ": '" + sample + "' has entry " + format_real(p) +
                                " outside [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kSimplexTolerance) {
            throw Error(ErrorCode::RowNotNormalized,
                        std::string(source) + ": '" + sample + "' sums to " + format_real(sum));
        }
        for (double& p : vec) p /= sum;
    }
    sort_unique(rows, [](const auto& r) -> const std::string& { return r.first; }, source);

    PredictionSet out;
    out.classifier_id = std::move(id);
    out.kind = PredictionKind::Soft;
    out.num_classes = num_classes;
    out.sample_ids.reserve(rows.size());
    out.labels.reserve(rows.size());
    out.probs.reserve(rows.size() * num_classes);
    for (auto& [sample, vec] : rows) {
        out.sample_ids.push_back(std::move(sample));
        out.labels.push_back(argmax(vec));
        out.probs.insert(out.probs.end(), vec.begin(), vec.end());
    }
    return out;
}

PredictionSet PredictionSet::hard(std::string id, std::size_t num_classes,
                                  std::vector<std::pair<std::string, int>> rows,
                                  std::string_view source) {
    auto table = LabelTable::make(std::move(rows), num_classes, source);
    PredictionSet out;
    out.classifier_id = std::move(id);
    out.kind = PredictionKind::Hard;
    out.num_classes = num_classes;
    out.sample_ids = std::move(table.sample_ids);
    out.labels = std::move(table.labels);
    return out;
}

ClassifierView PredictionSet::view() const {
    return ClassifierView{classifier_id, labels, probs, num_classes};
}

AnnotationSet AnnotationSet::make(std::string id, std::size_t num_classes, std::vector<Row> rows,
                                  std::string_view source) {
    std::size_t with_time = 0;
    for (const auto& row : rows) {
        if (row.label < 0 || static_cast<std::size_t>(row.label) >= num_classes) {
            throw Error(ErrorCode::LabelOutOfRange, std::string(source) + ": label " +
                                                        std::to_string(row.label) + " for '" +
                                                        row.sample_id + "'");
        }
        if (row.time_seconds) {
            if (!(*row.time_seconds >= 0.0) || !std::isfinite(*row.time_seconds)) {
                throw Error(ErrorCode::NegativeTime, std::string(source) + ": time " +
                                                         format_real(*row.time_seconds) + " for '" +
                                                         row.sample_id + "'");
            }
            ++with_time;
        }
    }
    if (with_time != 0 && with_time != rows.size()) {
        throw Error(ErrorCode::PartialTimes, std::string(source) + ": " + std::to_string(with_time) +
                                                 " of " + std::to_string(rows.size()) +
                                                 " rows carry a time");
    }
    sort_unique(rows, [](const Row& r) -> const std::string& { return r.sample_id; }, source);

    AnnotationSet out;
    out.annotator_id = std::move(id);
    out.num_classes = num_classes;
    out.sample_ids.reserve(rows.size());
    out.labels.reserve(rows.size());
    if (with_time != 0) out.times.emplace().reserve(rows.size());
    for (auto& row : rows) {
        out.sample_ids.push_back(std::move(row.sample_id));
        out.labels.push_back(row.label);
        if (out.times) out.times->push_back(*row.time_seconds);
    }
    return out;
}

ClassifierView AnnotationSet::view() const {
    return ClassifierView{annotator_id, labels, {}, num_classes};
}

// ---- frame --------------------------------------------------------------------

EvalFrame build_frame(LabelTable truth, std::vector<PredictionSet> machines,
                      std::vector<AnnotationSet> humans, LabelSpace label_space) {
    if (truth.sample_ids.empty()) throw Error(ErrorCode::InvalidArgument, "truth has no samples");
    if (machines.empty() && humans.empty()) {
        throw Error(ErrorCode::InvalidArgument, "frame needs at least one machine or human set");
    }
    if (!std::is_sorted(truth.sample_ids.begin(), truth.sample_ids.end()) ||
        std::adjacent_find(truth.sample_ids.begin(), truth.sample_ids.end()) != truth.sample_ids.end()) {
        truth = LabelTable::make(
            [&] {
                std::vector<std::pair<std::string, int>> rows;
                for (std::size_t i = 0; i < truth.sample_ids.size(); ++i)
                    rows.emplace_back(truth.sample_ids[i], truth.labels[i]);
                return rows;
            }(),
            label_space.size(), "truth");
    }
    const std::size_t k = label_space.size();
    for (int label : truth.labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= k) {
            throw Error(ErrorCode::LabelOutOfRange, "truth label " + std::to_string(label));
        }
    }

    std::unordered_set<std::string> ids;
    auto claim = [&](const std::string& id) {
        if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty classifier id");
        if (!ids.insert(id).second) {
            throw Error(ErrorCode::DuplicateId, "classifier/annotator id '" + id + "' used twice");
        }
    };
    for (const auto& m : machines) {
        claim(m.classifier_id);
        if (m.num_classes != k) {
            throw Error(ErrorCode::ColumnMismatch, "machine '" + m.classifier_id + "' has K=" +
                                                       std::to_string(m.num_classes));
        }
        check_coverage(truth.sample_ids, m.sample_ids, "machine '" + m.classifier_id + "'");
    }
    for (const auto& h : humans) {
        claim(h.annotator_id);
        if (h.num_classes != k) {
            throw Error(ErrorCode::ColumnMismatch, "human '" + h.annotator_id + "' has K=" +
                                                       std::to_string(h.num_classes));
        }
        check_coverage(truth.sample_ids, h.sample_ids, "human '" + h.annotator_id + "'");
    }

    auto data = std::make_shared<EvalFrame::Data>(EvalFrame::Data{
        std::move(label_space), std::move(truth), std::move(machines), std::move(humans)});
    return EvalFrame(std::move(data));
}

std::vector<std::string> EvalFrame::machine_ids() const {
    std::vector<std::string> out;
    for (const auto& m : machines()) out.push_back(m.classifier_id);
    return out;
}

std::vector<std::string> EvalFrame::human_ids() const {
    std::vector<std::string> out;
    for (const auto& h : humans()) out.push_back(h.annotator_id);
    return out;
}

bool EvalFrame::is_machine(std::string_view id) const {
    return std::any_of(machines().begin(), machines().end(),
                       [&](const PredictionSet& m) { return m.classifier_id == id; });
}

bool EvalFrame::is_human(std::string_view id) const {
    return std::any_of(humans().begin(), humans().end(),
                       [&](const AnnotationSet& h) { return h.annotator_id == id; });
}

bool EvalFrame::has_classifier(std::string_view id) const { return is_machine(id) || is_human(id); }

const PredictionSet& EvalFrame::machine(std::string_view id) const {
    for (const auto& m : machines()) {
        if (m.classifier_id == id) return m;
    }
    throw Error(ErrorCode::UnknownId, "no machine '" + std::string(id) + "' in frame");
}

const AnnotationSet& EvalFrame::human(std::string_view id) const {
    for (const auto& h : humans()) {
        if (h.annotator_id == id) return h;
    }
    throw Error(ErrorCode::UnknownId, "no human '" + std::string(id) + "' in frame");
}

ClassifierView EvalFrame::view(std::string_view id) const {
    for (const auto& m : machines()) {
        if (m.classifier_id == id) return m.view();
    }
    for (const auto& h : humans()) {
        if (h.annotator_id == id) return h.view();
    }
    throw Error(ErrorCode::UnknownId, "no classifier '" + std::string(id) + "' in frame");
}

std::optional<std::size_t> EvalFrame::index_of(std::string_view sample_id) const {
    const auto& ids = sample_ids();
    auto it = std::lower_bound(ids.begin(), ids.end(), sample_id);
    if (it == ids.end() || *it != sample_id) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

// ---- parsing ------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string id_from_filename(const std::filesystem::path& path, std::string_view prefix) {
    std::string stem = path.stem().string();
    if (stem.size() > prefix.size() && stem.compare(0, prefix.size(), prefix) == 0) {
        return stem.substr(prefix.size());
    }
    return stem;
}

LabelSpace parse_label_space_text(std::string_view text, std::string_view source) {
    std::vector<std::string> names;
    for (const auto& [line_no, line] : split_lines(text)) {
        if (line.empty()) throw Error(ErrorCode::Parse, where(source, line_no) + ": empty class name");
        names.emplace_back(line);
    }
    try {
        return LabelSpace(std::move(names));
    } catch (const Error& e) {
        throw Error(e.code(), std::string(source) + ": " + e.what());
    }
}

LabelTable parse_truth_text(std::string_view text, const LabelSpace& label_space,
                            std::string_view source) {
    const Csv csv = read_csv(text, source);
    if (csv.header.size() != 2 || csv.header[0] != "sample_id" || csv.header[1] != "label") {
        throw Error(ErrorCode::ColumnMismatch, std::string(source) + ": expected header 'sample_id,label'");
    }
    check_rows_nonempty(csv.rows.size(), source);
    std::vector<std::pair<std::string, int>> rows;
    rows.reserve(csv.rows.size());
    for (const auto& row : csv.rows) {
        if (row.fields.size() != 2) {
            throw Error(ErrorCode::ColumnMismatch, where(source, row.number) + ": expected 2 fields");
        }
        check_sample_id(row.fields[0], source, row.number);
        rows.emplace_back(std::string(row.fields[0]),
                          parse_label(row.fields[1], label_space.size(), source, row.number));
    }
    return LabelTable::make(std::move(rows), label_space.size(), source);
}

PredictionSet parse_predictions_text(std::string_view text, const LabelSpace& label_space,
                                     std::string id, std::string_view source) {
    const Csv csv = read_csv(text, source);
    const std::size_t k = label_space.size();
    if (csv.header.empty() || csv.header[0] != "sample_id") {
        throw Error(ErrorCode::ColumnMismatch, std::string(source) + ": first column must be 'sample_id'");
    }
    check_rows_nonempty(csv.rows.size(), source);

    if (csv.header.size() == 2 && csv.header[1] == "label") {
        std::vector<std::pair<std::string, int>> rows;
        rows.reserve(csv.rows.size());
        for (const auto& row : csv.rows) {
            if (row.fields.size() != 2) {
                throw Error(ErrorCode::ColumnMismatch, where(source, row.number) + ": expected 2 fields");
            }
            check_sample_id(row.fields[0], source, row.number);
            rows.emplace_back(std::string(row.fields[0]), parse_label(row.fields[1], k, source, row.number));
        }
        return PredictionSet::hard(std::move(id), k, std::move(rows), source);
    }

    for (std::size_t c = 1; c < csv.header.size(); ++c) {
        if (csv.header[c] != "p_" + std::to_string(c - 1)) {
            throw Error(ErrorCode::ColumnMismatch, std::string(source) + ": column " + std::to_string(c) +
                                                       " is '" + std::string(csv.header[c]) +
                                                       "', expected 'p_" + std::to_string(c - 1) + "'");
        }
    }
    if (csv.header.size() != k + 1) {
        throw Error(ErrorCode::ColumnMismatch, std::string(source) + ": " +
                                                   std::to_string(csv.header.size() - 1) +
                                                   " probability columns for K=" + std::to_string(k));
    }
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    rows.reserve(csv.rows.size());
    for (const auto& row : csv.rows) {
        if (row.fields.size() != k + 1) {
            throw Error(ErrorCode::ColumnMismatch, where(source, row.number) + ": expected " +
                                                       std::to_string(k + 1) + " fields");
        }
        check_sample_id(row.fields[0], source, row.number);
        std::vector<double> vec(k);
        for (std::size_t c = 0; c < k; ++c) vec[c] = parse_real(row.fields[c + 1], source, row.number);
        rows.emplace_back(std::string(row.fields[0]), std::move(vec));
    }
    return PredictionSet::soft(std::move(id), k, std::move(rows), source);
}

AnnotationSet parse_annotations_text(std::string_view text, const LabelSpace& label_space,
                                     std::string id, std::string_view source) {
    const Csv csv = read_csv(text, source);
    const bool with_times = csv.header.size() == 3 && csv.header[2] == "time_seconds";
    if (csv.header.size() < 2 || csv.header[0] != "sample_id" || csv.header[1] != "label" ||
        (csv.header.size() == 3 && !with_times) || csv.header.size() > 3) {
        throw Error(ErrorCode::ColumnMismatch,
                    std::string(source) + ": expected header 'sample_id,label[,time_seconds]'");
    }
    check_rows_nonempty(csv.rows.size(), source);
    std::vector<AnnotationSet::Row> rows;
    rows.reserve(csv.rows.size());
    for (const auto& row : csv.rows) {
        if (row.fields.size() != csv.header.size()) {
            throw Error(with_times && row.fields.size() == 2 ? ErrorCode::PartialTimes
                                                             : ErrorCode::ColumnMismatch,
                        where(source, row.number) + ": expected " + std::to_string(csv.header.size()) +
                            " fields");
        }
        check_sample_id(row.fields[0], source, row.number);
        AnnotationSet::Row parsed{std::string(row.fields[0]),
                                  parse_label(row.fields[1], label_space.size(), source, row.number),
                                  std::nullopt};
        if (with_times) {
            if (row.fields[2].empty()) {
                throw Error(ErrorCode::PartialTimes, where(source, row.number) + ": missing time_seconds");
            }
            const double t = parse_real(row.fields[2], source, row.number);
            if (t < 0.0) {
                throw Error(ErrorCode::NegativeTime,
                            where(source, row.number) + ": time " + std::string(row.fields[2]));
            }
            parsed.time_seconds = t;
        }
        rows.push_back(std::move(parsed));
    }
    return AnnotationSet::make(std::move(id), label_space.size(), std::move(rows), source);
}

LabelSpace parse_label_space(const std::filesystem::path& path) {
    return parse_label_space_text(read_file(path), path.string());
}

LabelTable parse_truth(const std::filesystem::path& path, const LabelSpace& label_space) {
    return parse_truth_text(read_file(path), label_space, path.string());
}

PredictionSet parse_predictions(const std::filesystem::path& path, const LabelSpace& label_space,
                                std::optional<std::string> id) {
    return parse_predictions_text(read_file(path), label_space,
                                  id ? *id : id_from_filename(path, "predictions_"), path.string());
}

AnnotationSet parse_annotations(const std::filesystem::path& path, const LabelSpace& label_space,
                                std::optional<std::string> id) {
    return parse_annotations_text(read_file(path), label_space,
                                  id ? *id : id_from_filename(path, "annotations_"), path.string());
}

// ---- writing ------------------------------------------------------------------

std::string format_real(double value) {
    if (value == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string format_label_space(const LabelSpace& label_space) {
    std::string out;
    for (const auto& name : label_space.class_names()) out += name + "\n";
    return out;
}

std::string format_truth(const LabelTable& truth) {
    std::string out = "sample_id,label\n";
    for (std::size_t i = 0; i < truth.sample_ids.size(); ++i) {
        out += truth.sample_ids[i] + "," + std::to_string(truth.labels[i]) + "\n";
    }
    return out;
}

std::string format_predictions(const PredictionSet& set) {
    std::string out = "sample_id";
    if (set.kind == PredictionKind::Hard) {
        out += ",label\n";
        for (std::size_t i = 0; i < set.size(); ++i) {
            out += set.sample_ids[i] + "," + std::to_string(set.labels[i]) + "\n";
        }
        return out;
    }
    for (std::size_t c = 0; c < set.num_classes; ++c) out += ",p_" + std::to_string(c);
    out += "\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        out += set.sample_ids[i];
        for (std::size_t c = 0; c < set.num_classes; ++c) {
            out += "," + format_real(set.probs[i * set.num_classes + c]);
        }
        out += "\n";
    }
    return out;
}

std::string format_annotations(const AnnotationSet& set) {
    std::string out = set.has_times() ? "sample_id,label,time_seconds\n" : "sample_id,label\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        out += set.sample_ids[i] + "," + std::to_string(set.labels[i]);
        if (set.times) out += "," + format_real((*set.times)[i]);
        out += "\n";
    }
    return out;
}

}  // namespace hmdiff
