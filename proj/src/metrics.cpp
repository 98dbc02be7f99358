#include "hmdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hmdiff/error.hpp"
#include "hmdiff/random.hpp"

namespace hmdiff {

namespace {

void check_aligned(const EvalFrame& frame, const ClassifierView& view) {
    if (view.size() != frame.size()) {
        throw Error(ErrorCode::CoverageMismatch, "classifier '" + std::string(view.id) + "' has " +
                                                     std::to_string(view.size()) + " rows, frame has " +
                                                     std::to_string(frame.size()));
    }
}

bool is_correct(const EvalFrame& frame, const ClassifierView& view, std::size_t i) {
    return view.labels[i] == frame.truth()[i];
}

}  // namespace

// ---- accuracy / confusion --------------------------------------------------------

double accuracy(const EvalFrame& frame, const ClassifierView& classifier) {
    check_aligned(frame, classifier);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < frame.size(); ++i) correct += is_correct(frame, classifier, i);
    return static_cast<double>(correct) / static_cast<double>(frame.size());
}

double accuracy(const EvalFrame& frame, std::string_view classifier_id) {
    return accuracy(frame, frame.view(classifier_id));
}

ConfusionMatrix ConfusionMatrix::from_counts(std::size_t num_classes, std::vector<std::int64_t> counts) {
    if (counts.size() != num_classes * num_classes) {
        throw Error(ErrorCode::InvalidArgument, "confusion counts must be K x K");
    }
    ConfusionMatrix m;
    m.k_ = num_classes;
    m.counts_ = std::move(counts);
    m.cells_.assign(num_classes * num_classes, 0.0);
    m.row_counts_.assign(num_classes, 0);
    for (std::size_t p = 0; p < num_classes; ++p) {
        std::int64_t total = 0;
        for (std::size_t q = 0; q < num_classes; ++q) {
            if (m.counts_[p * num_classes + q] < 0) {
                throw Error(ErrorCode::InvalidArgument, "negative confusion count");
            }
            total += m.counts_[p * num_classes + q];
        }
        m.row_counts_[p] = total;
        m.n_samples_ += total;
        if (total == 0) continue;
        for (std::size_t q = 0; q < num_classes; ++q) {
            m.cells_[p * num_classes + q] =
                static_cast<double>(m.counts_[p * num_classes + q]) / static_cast<double>(total);
        }
    }
    return m;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> reference,
                          std::size_t num_classes, const SampleFilter& filter) {
    if (predictions.size() != reference.size()) {
        throw Error(ErrorCode::LengthMismatch, "predictions and reference differ in length");
    }
    std::vector<std::int64_t> counts(num_classes * num_classes, 0);
    std::int64_t selected = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (filter && !filter(i)) continue;
        ++counts[static_cast<std::size_t>(reference[i]) * num_classes +
                 static_cast<std::size_t>(predictions[i])];
        ++selected;
    }
    if (selected == 0) throw Error(ErrorCode::EmptySelection, "no samples selected for confusion matrix");
    return ConfusionMatrix::from_counts(num_classes, std::move(counts));
}

ConfusionMatrix confusion(const EvalFrame& frame, const ClassifierView& predictions,
                          const SampleFilter& filter) {
    check_aligned(frame, predictions);
    return confusion(predictions.labels, frame.truth(), frame.num_classes(), filter);
}

std::string_view to_string(ErrorFilter filter) {
    switch (filter) {
        case ErrorFilter::Both: return "both";
        case ErrorFilter::Row: return "row";
        case ErrorFilter::Either: return "either";
    }
    return "both";
}

ErrorFilter parse_error_filter(std::string_view text) {
    if (text == "both") return ErrorFilter::Both;
    if (text == "row") return ErrorFilter::Row;
    if (text == "either") return ErrorFilter::Either;
    throw Error(ErrorCode::InvalidConfig, "error filter must be both|row|either, got '" + std::string(text) + "'");
}

std::vector<PairConfusion> pairwise_error_counts(const EvalFrame& frame,
                                                 const std::vector<ClassifierView>& rows,
                                                 const std::vector<ClassifierView>& columns,
                                                 ErrorFilter filter) {
    if (rows.empty() || columns.empty()) {
        throw Error(ErrorCode::InvalidArgument, "error confusion needs two nonempty groups");
    }
    const std::size_t k = frame.num_classes();
    std::vector<PairConfusion> out;
    for (const auto& a : rows) {
        check_aligned(frame, a);
        for (const auto& b : columns) {
            if (a.id == b.id) continue;
            check_aligned(frame, b);
            PairConfusion pair{std::string(a.id), std::string(b.id),
                               std::vector<std::int64_t>(k * k, 0), 0};
            for (std::size_t i = 0; i < frame.size(); ++i) {
                const bool a_wrong = !is_correct(frame, a, i);
                const bool b_wrong = !is_correct(frame, b, i);
                bool keep = false;
                switch (filter) {
                    case ErrorFilter::Both: keep = a_wrong && b_wrong; break;
                    case ErrorFilter::Row: keep = a_wrong; break;
                    case ErrorFilter::Either: keep = a_wrong || b_wrong; break;
                }
                if (!keep) continue;
                ++pair.counts[static_cast<std::size_t>(a.labels[i]) * k + static_cast<std::size_t>(b.labels[i])];
                ++pair.n_samples;
            }
            out.push_back(std::move(pair));
        }
    }
    return out;
}

ConfusionMatrix group_error_confusion(const EvalFrame& frame, const std::vector<ClassifierView>& rows,
                                      const std::vector<ClassifierView>& columns, ErrorFilter filter) {
    const auto pairs = pairwise_error_counts(frame, rows, columns, filter);
    const std::size_t k = frame.num_classes();
    std::vector<std::int64_t> total(k * k, 0);
    std::int64_t n = 0;
    for (const auto& pair : pairs) {
        for (std::size_t c = 0; c < total.size(); ++c) total[c] += pair.counts[c];
        n += pair.n_samples;
    }
    if (n == 0) {
        throw Error(ErrorCode::EmptySelection,
                    pairs.empty() ? "no pair of distinct classifiers" : "no qualifying shared mistakes");
    }
    return ConfusionMatrix::from_counts(k, std::move(total));
}

// ---- correctness ----------------------------------------------------------------

Correctness Correctness::of(const EvalFrame& frame, const ClassifierView& classifier) {
    check_aligned(frame, classifier);
    Correctness out;
    out.classifier_id = std::string(classifier.id);
    out.sample_ids = frame.sample_ids();
    out.bits.resize(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) out.bits[i] = is_correct(frame, classifier, i);
    return out;
}

std::optional<bool> Correctness::at(std::string_view sample_id) const {
    auto it = std::lower_bound(sample_ids.begin(), sample_ids.end(), sample_id);
    if (it == sample_ids.end() || *it != sample_id) return std::nullopt;
    return bits[static_cast<std::size_t>(it - sample_ids.begin())] != 0;
}

std::size_t Correctness::num_correct() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

// ---- difficulty scores ----------------------------------------------------------

std::string_view to_string(DifficultyMetric metric) {
    switch (metric) {
        case DifficultyMetric::MachineConfidence: return "machine_confidence";
        case DifficultyMetric::MachineAgreement: return "machine_agreement";
        case DifficultyMetric::HumanAgreement: return "human_agreement";
        case DifficultyMetric::HumanEntropy: return "human_entropy";
        case DifficultyMetric::AnnotationTime: return "annotation_time";
    }
    return "unknown";
}

DifficultyScore machine_confidence(const ClassifierView& machine) {
    if (!machine.is_soft()) {
        throw Error(ErrorCode::KindMismatch,
                    "machine confidence needs soft predictions; '" + std::string(machine.id) + "' is hard");
    }
    DifficultyScore out;
    out.metric = DifficultyMetric::MachineConfidence;
    out.num_classes = machine.num_classes;
    out.group_size = 1;
    out.source = std::string(machine.id);
    out.values.resize(machine.size());
    for (std::size_t i = 0; i < machine.size(); ++i) out.values[i] = machine.confidence(i);
    return out;
}

DifficultyScore agreement(const EvalFrame& frame, const std::vector<ClassifierView>& group,
                          std::optional<std::string_view> exclude, DifficultyMetric metric) {
    std::vector<const ClassifierView*> members;
    for (const auto& v : group) {
        if (exclude && v.id == *exclude) continue;
        check_aligned(frame, v);
        members.push_back(&v);
    }
    if (members.empty()) throw Error(ErrorCode::InvalidArgument, "agreement group is empty after exclusion");

    DifficultyScore out;
    out.metric = metric;
    out.num_classes = frame.num_classes();
    out.group_size = members.size();
    out.source = std::to_string(members.size()) + " members";
    if (exclude) out.source += " excluding " + std::string(*exclude);
    out.values.resize(frame.size());
    const double k = static_cast<double>(members.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        std::size_t correct = 0;
        for (const auto* m : members) correct += is_correct(frame, *m, i);
        out.values[i] = static_cast<double>(correct) / k;
    }
    return out;
}

DifficultyScore human_entropy(const EvalFrame& frame, const std::vector<ClassifierView>& humans) {
    if (humans.empty()) throw Error(ErrorCode::InvalidArgument, "entropy needs at least one annotator");
    for (const auto& h : humans) check_aligned(frame, h);
    const std::size_t k = frame.num_classes();
    DifficultyScore out;
    out.metric = DifficultyMetric::HumanEntropy;
    out.num_classes = k;
    out.group_size = humans.size();
    out.source = std::to_string(humans.size()) + " annotators";
    out.values.resize(frame.size());
    std::vector<std::size_t> votes(k);
    const double n = static_cast<double>(humans.size());
    const double max_entropy = std::log(static_cast<double>(k));
    for (std::size_t i = 0; i < frame.size(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& h : humans) ++votes[static_cast<std::size_t>(h.labels[i])];
        double entropy = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (votes[c] == 0) continue;
            const double p = static_cast<double>(votes[c]) / n;
            entropy -= p * std::log(p);
        }
        // A single-class vote gives -1*log(1) = -0.0; rounding can push a
        // uniform split a hair past ln K.
        out.values[i] = entropy <= 0.0 ? 0.0 : std::min(entropy, max_entropy);
    }
    return out;
}

DifficultyScore mean_time(const EvalFrame& frame, std::span<const AnnotationSet> humans) {
    if (humans.empty()) throw Error(ErrorCode::InvalidArgument, "mean time needs at least one annotator");
    for (const auto& h : humans) {
        if (!h.has_times()) {
            throw Error(ErrorCode::MissingTimes, "annotator '" + h.annotator_id + "' has no times");
        }
        if (h.size() != frame.size()) {
            throw Error(ErrorCode::CoverageMismatch, "annotator '" + h.annotator_id + "' not aligned");
        }
    }
    DifficultyScore out;
    out.metric = DifficultyMetric::AnnotationTime;
    out.num_classes = frame.num_classes();
    out.group_size = humans.size();
    out.source = std::to_string(humans.size()) + " annotators";
    out.values.resize(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        double sum = 0.0;
        for (const auto& h : humans) sum += (*h.times)[i];
        out.values[i] = sum / static_cast<double>(humans.size());
    }
    return out;
}

std::string_view to_string(SdNorm norm) { return norm == SdNorm::L1 ? "l1" : "l2"; }

SdNorm parse_sd_norm(std::string_view text) {
    if (text == "l1") return SdNorm::L1;
    if (text == "l2") return SdNorm::L2;
    throw Error(ErrorCode::InvalidConfig, "sd norm must be l1|l2, got '" + std::string(text) + "'");
}

SampleDistributionDiff sample_distribution_diff(const EvalFrame& frame, const ClassifierView& machine,
                                                const std::vector<ClassifierView>& humans, SdNorm norm) {
    if (!machine.is_soft()) {
        throw Error(ErrorCode::KindMismatch,
                    "distribution difference needs soft predictions; '" + std::string(machine.id) + "' is hard");
    }
    if (humans.empty()) throw Error(ErrorCode::InvalidArgument, "distribution difference needs annotators");
    check_aligned(frame, machine);
    for (const auto& h : humans) check_aligned(frame, h);

    const std::size_t k = frame.num_classes();
    SampleDistributionDiff out;
    out.classifier_id = std::string(machine.id);
    out.values.resize(frame.size());
    std::vector<std::size_t> votes(k);
    const double n = static_cast<double>(humans.size());
    double total = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& h : humans) ++votes[static_cast<std::size_t>(h.labels[i])];
        const auto probs = machine.probabilities(i);
        double dist = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double d = probs[c] - static_cast<double>(votes[c]) / n;
            dist += norm == SdNorm::L1 ? std::abs(d) : d * d;
        }
        if (norm == SdNorm::L2) dist = std::sqrt(dist);
        out.values[i] = dist;
        total += dist;
    }
    out.mean = total / static_cast<double>(frame.size());
    return out;
}

// ---- binning / stratification ------------------------------------------------------

BinSpec BinSpec::uniform(double lo, double hi, std::size_t count) {
    BinSpec s;
    s.kind = Kind::Uniform;
    s.lo = lo;
    s.hi = hi;
    s.count = count;
    return s;
}

BinSpec BinSpec::levels(std::size_t k) {
    BinSpec s;
    s.kind = Kind::Levels;
    s.count = k;
    return s;
}

BinSpec BinSpec::quantiles(std::size_t count) {
    BinSpec s;
    s.kind = Kind::Quantiles;
    s.count = count;
    return s;
}

BinSpec BinSpec::explicit_edges(std::vector<double> edges) {
    BinSpec s;
    s.kind = Kind::Edges;
    s.edges = std::move(edges);
    return s;
}

BinSpec default_bins(const DifficultyScore& score) {
    switch (score.metric) {
        case DifficultyMetric::MachineConfidence: return BinSpec::uniform(0.0, 1.0, 10);
        case DifficultyMetric::MachineAgreement:
        case DifficultyMetric::HumanAgreement: return BinSpec::levels(score.group_size);
        case DifficultyMetric::HumanEntropy:
            return BinSpec::uniform(0.0, std::log(static_cast<double>(score.num_classes)), 10);
        case DifficultyMetric::AnnotationTime: return BinSpec::quantiles(10);
    }
    return BinSpec::uniform(0.0, 1.0, 10);
}

namespace {

// Linear interpolation between order statistics: h = (n-1) p.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Binning Binning::resolve(const BinSpec& spec, std::span<const double> values) {
    Binning b;
    std::vector<double> edges;
    switch (spec.kind) {
        case BinSpec::Kind::Levels:
            if (spec.count < 1) throw Error(ErrorCode::InvalidBins, "level bins need k >= 1");
            b.discrete_ = true;
            b.levels_ = spec.count;
            for (std::size_t j = 0; j <= spec.count; ++j) {
                const double v = static_cast<double>(j) / static_cast<double>(spec.count);
                b.lo_.push_back(v);
                b.hi_.push_back(v);
            }
            return b;
        case BinSpec::Kind::Uniform:
            if (spec.count < 1 || !(spec.hi > spec.lo)) {
                throw Error(ErrorCode::InvalidBins, "uniform bins need count >= 1 and hi > lo");
            }
            for (std::size_t i = 0; i <= spec.count; ++i) {
                edges.push_back(i == spec.count ? spec.hi
                                                : spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) /
                                                                static_cast<double>(spec.count));
            }
            break;
        case BinSpec::Kind::Quantiles: {
            if (spec.count < 1) throw Error(ErrorCode::InvalidBins, "quantile bins need count >= 1");
            if (values.empty()) throw Error(ErrorCode::InvalidBins, "quantile bins need values");
            std::vector<double> sorted(values.begin(), values.end());
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i <= spec.count; ++i) {
                edges.push_back(quantile_sorted(sorted, static_cast<double>(i) / static_cast<double>(spec.count)));
            }
            edges.back() = sorted.back();
            break;
        }
        case BinSpec::Kind::Edges:
            edges = spec.edges;
            if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
                throw Error(ErrorCode::InvalidBins, "explicit bins need >= 2 ascending edges");
            }
            break;
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        b.lo_.push_back(edges[i]);
        b.hi_.push_back(edges[i + 1]);
    }
    return b;
}

std::size_t Binning::assign(double value) const {
    if (discrete_) {
        const double scaled = value * static_cast<double>(levels_);
        const double j = std::round(scaled);
        if (!(std::abs(scaled - j) < 1e-9) || j < 0.0 || j > static_cast<double>(levels_)) {
            throw Error(ErrorCode::InvalidBins, "value " + format_real(value) + " is not a level j/" +
                                                    std::to_string(levels_));
        }
        return static_cast<std::size_t>(j);
    }
    if (!(value >= lo_.front() && value <= hi_.back())) {
        throw Error(ErrorCode::InvalidBins, "value " + format_real(value) + " outside bins [" +
                                                format_real(lo_.front()) + "," + format_real(hi_.back()) + "]");
    }
    // Last bin whose lower edge is <= value; zero-width bins are skipped over.
    auto it = std::upper_bound(lo_.begin(), lo_.end(), value);
    return static_cast<std::size_t>(it - lo_.begin()) - 1;
}

std::vector<std::optional<Band>> band_over(const std::vector<std::vector<std::optional<double>>>& rows) {
    std::size_t nbins = 0;
    for (const auto& r : rows) nbins = std::max(nbins, r.size());
    std::vector<std::optional<Band>> out(nbins);
    for (std::size_t b = 0; b < nbins; ++b) {
        double sum = 0.0;
        std::size_t n = 0;
        Band band{0.0, 0.0, 0.0};
        for (const auto& r : rows) {
            if (b >= r.size() || !r[b]) continue;
            const double v = *r[b];
            if (n == 0) {
                band.min = band.max = v;
            } else {
                band.min = std::min(band.min, v);
                band.max = std::max(band.max, v);
            }
            sum += v;
            ++n;
        }
        if (n == 0) continue;
        // Clamp guards the mean against rounding outside [min, max].
        band.mean = std::clamp(sum / static_cast<double>(n), band.min, band.max);
        out[b] = band;
    }
    return out;
}

StratifiedAccuracy stratify(const EvalFrame& frame, const std::vector<ClassifierView>& classifiers,
                            const DifficultyScore& difficulty, const BinSpec& bins) {
    if (difficulty.values.size() != frame.size()) {
        throw Error(ErrorCode::CoverageMismatch, "difficulty score does not cover the frame");
    }
    const Binning binning = Binning::resolve(bins, difficulty.values);
    std::vector<std::size_t> bin_of(frame.size());
    StratifiedAccuracy out;
    out.metric = difficulty.metric;
    out.bins.resize(binning.size());
    for (std::size_t b = 0; b < binning.size(); ++b) out.bins[b] = {binning.lo(b), binning.hi(b), 0};
    for (std::size_t i = 0; i < frame.size(); ++i) {
        bin_of[i] = binning.assign(difficulty.values[i]);
        ++out.bins[bin_of[i]].n_samples;
    }

    std::vector<std::vector<std::optional<double>>> rows;
    for (const auto& c : classifiers) {
        check_aligned(frame, c);
        std::vector<std::size_t> correct(binning.size(), 0);
        for (std::size_t i = 0; i < frame.size(); ++i) correct[bin_of[i]] += is_correct(frame, c, i);
        ClassifierBins cb;
        cb.classifier_id = std::string(c.id);
        cb.accuracy.resize(binning.size());
        cb.n_samples.resize(binning.size());
        for (std::size_t b = 0; b < binning.size(); ++b) {
            cb.n_samples[b] = out.bins[b].n_samples;
            if (out.bins[b].n_samples > 0) {
                cb.accuracy[b] = static_cast<double>(correct[b]) / static_cast<double>(out.bins[b].n_samples);
            }
        }
        rows.push_back(cb.accuracy);
        out.per_classifier.push_back(std::move(cb));
    }
    out.band = band_over(rows);
    return out;
}

StratifiedAccuracy stratify_leave_one_out(const EvalFrame& frame, const std::vector<ClassifierView>& group,
                                          DifficultyMetric metric) {
    if (group.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "leave-one-out stratification needs >= 2 members");
    }
    const std::size_t levels = group.size() - 1;
    StratifiedAccuracy out;
    out.metric = metric;
    for (std::size_t j = 0; j <= levels; ++j) {
        const double v = static_cast<double>(j) / static_cast<double>(levels);
        out.bins.push_back({v, v, 0});
    }
    std::vector<std::vector<std::optional<double>>> rows;
    for (const auto& member : group) {
        const DifficultyScore rest = agreement(frame, group, member.id, metric);
        StratifiedAccuracy one = stratify(frame, {member}, rest, BinSpec::levels(levels));
        for (std::size_t b = 0; b <= levels; ++b) out.bins[b].n_samples += one.bins[b].n_samples;
        rows.push_back(one.per_classifier.front().accuracy);
        out.per_classifier.push_back(std::move(one.per_classifier.front()));
    }
    out.band = band_over(rows);
    return out;
}

// ---- balanced set / matching ---------------------------------------------------------

std::vector<std::string> balanced_subset(const Correctness& reference, std::uint64_t seed) {
    std::vector<std::size_t> correct;
    std::vector<std::size_t> wrong;
    for (std::size_t i = 0; i < reference.bits.size(); ++i) {
        (reference.bits[i] ? correct : wrong).push_back(i);
    }
    if (correct.empty() || wrong.empty()) {
        throw Error(ErrorCode::CannotBalance, "'" + reference.classifier_id + "' is " +
                                                  (correct.empty() ? "never" : "always") + " correct");
    }
    const std::size_t m = std::min(correct.size(), wrong.size());
    RandomStream rng(seed, "balanced_subset");
    // Partial Fisher-Yates: the first m slots become a uniform m-subset.
    auto draw = [&](std::vector<std::size_t>& pool) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
    };
    draw(correct);
    draw(wrong);
    std::vector<std::string> out;
    out.reserve(2 * m);
    for (std::size_t i = 0; i < m; ++i) out.push_back(reference.sample_ids[correct[i]]);
    for (std::size_t i = 0; i < m; ++i) out.push_back(reference.sample_ids[wrong[i]]);
    std::sort(out.begin(), out.end());
    return out;
}

double matching_percentage(const Correctness& a, const Correctness& b, std::span<const std::string> subset) {
    if (subset.empty()) throw Error(ErrorCode::DegenerateConditioning, "empty subset");
    std::size_t b_right = 0, both_right = 0, b_wrong = 0, both_wrong = 0;
    for (const auto& id : subset) {
        const auto av = a.at(id);
        const auto bv = b.at(id);
        if (!av || !bv) {
            throw Error(ErrorCode::CoverageMismatch, "sample '" + id + "' missing from correctness map");
        }
        if (*bv) {
            ++b_right;
            both_right += *av;
        } else {
            ++b_wrong;
            both_wrong += !*av;
        }
    }
    if (b_right == 0 || b_wrong == 0) {
        throw Error(ErrorCode::DegenerateConditioning, "'" + b.classifier_id + "' is " +
                                                           (b_right == 0 ? "never" : "always") +
                                                           " correct on the subset");
    }
    const double p_right = static_cast<double>(both_right) / static_cast<double>(b_right);
    const double p_wrong = static_cast<double>(both_wrong) / static_cast<double>(b_wrong);
    return (p_right + p_wrong) / 2.0;
}

// ---- quadrants --------------------------------------------------------------------

std::array<Quadrant, 4> quadrant_confusions(const DifficultyScore& machine_difficulty,
                                            const DifficultyScore& human_difficulty,
                                            QuadrantThresholds thresholds,
                                            const ClassifierView& classifier, const EvalFrame& frame) {
    if (machine_difficulty.values.size() != frame.size() || human_difficulty.values.size() != frame.size()) {
        throw Error(ErrorCode::CoverageMismatch, "difficulty scores do not cover the frame");
    }
    check_aligned(frame, classifier);
    std::array<Quadrant, 4> out;
    const char* names[] = {"EE", "EH", "HE", "HH"};
    for (std::size_t q = 0; q < 4; ++q) out[q].name = names[q];
    auto quadrant_of = [&](std::size_t i) {
        const bool machine_hard = !(machine_difficulty.values[i] >= thresholds.machine);
        const bool human_hard = !(human_difficulty.values[i] >= thresholds.human);
        return static_cast<std::size_t>(machine_hard) * 2 + static_cast<std::size_t>(human_hard);
    };
    for (std::size_t q = 0; q < 4; ++q) {
        for (std::size_t i = 0; i < frame.size(); ++i) out[q].n_samples += quadrant_of(i) == q;
        if (out[q].n_samples == 0) continue;
        out[q].confusion = confusion(frame, classifier, [&](std::size_t i) { return quadrant_of(i) == q; });
    }
    return out;
}

}  // namespace hmdiff
