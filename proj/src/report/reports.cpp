#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hmdiff/digest.hpp"
#include "hmdiff/error.hpp"
#include "hmdiff/random.hpp"
#include "hmdiff/report.hpp"
#include "json.hpp"

namespace hmdiff {

using ojson = nlohmann::ordered_json;

namespace {

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

// Short label for a grid value, e.g. 0.6 rather than 0.59999999999999998.
std::string short_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ojson real_or_null(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

ojson band_json(const std::vector<std::optional<Band>>& band) {
    ojson out = ojson::array();
    for (const auto& b : band) {
        if (!b) {
            out.push_back(nullptr);
        } else {
            out.push_back(ojson{{"min", b->min}, {"mean", b->mean}, {"max", b->max}});
        }
    }
    return out;
}

// Views of every classifier taking part in a report. The aggregate is built
// only when there are at least two annotators.
struct Roster {
    std::vector<ClassifierView> machines;
    std::vector<ClassifierView> soft_machines;
    std::vector<ClassifierView> humans;
    std::optional<AnnotationSet> aggre;

    Roster(const EvalFrame& frame, const RunSettings& settings) {
        for (const auto& m : frame.machines()) {
            machines.push_back(m.view());
            if (m.kind == PredictionKind::Soft) soft_machines.push_back(m.view());
        }
        for (const auto& h : frame.humans()) humans.push_back(h.view());
        if (humans.size() >= 2) aggre = majority_vote(humans, frame, settings.tie);
    }
    Roster(const Roster&) = delete;
    Roster& operator=(const Roster&) = delete;

    bool all_times(const EvalFrame& frame) const {
        if (frame.humans().empty()) return false;
        return std::all_of(frame.humans().begin(), frame.humans().end(),
                           [](const AnnotationSet& h) { return h.has_times(); });
    }
    std::optional<ClassifierView> lookup(const EvalFrame& frame, std::string_view id) const {
        if (aggre && id == kAggregateId) return aggre->view();
        if (frame.has_classifier(id)) return frame.view(id);
        return std::nullopt;
    }
};

std::string role_of(const EvalFrame& frame, std::string_view id) {
    if (frame.is_machine(id)) return "machine";
    if (frame.is_human(id)) return "human";
    return "aggregate";
}

// ---- confusion matrices -----------------------------------------------------------

void put_confusion(ReportFiles& files, const std::string& stem, const ConfusionMatrix& m,
                   const LabelSpace& ls) {
    std::string header = "class";
    for (const auto& name : ls.class_names()) header += "," + name;
    std::string cells = header + "\n";
    std::string counts = header + ",row_total\n";
    for (std::size_t p = 0; p < m.num_classes(); ++p) {
        cells += ls.class_names()[p];
        counts += ls.class_names()[p];
        for (std::size_t q = 0; q < m.num_classes(); ++q) {
            cells += "," + format_real(m.cell(p, q));
            counts += "," + std::to_string(m.count(p, q));
        }
        cells += "\n";
        counts += "," + std::to_string(m.row_count(p)) + "\n";
    }
    files[stem + ".csv"] = cells;
    files[stem + "_counts.csv"] = counts;
}

ojson confusion_json(const ConfusionMatrix& m) {
    ojson cells = ojson::array();
    ojson counts = ojson::array();
    ojson totals = ojson::array();
    for (std::size_t p = 0; p < m.num_classes(); ++p) {
        ojson cr = ojson::array();
        ojson nr = ojson::array();
        for (std::size_t q = 0; q < m.num_classes(); ++q) {
            cr.push_back(m.cell(p, q));
            nr.push_back(m.count(p, q));
        }
        cells.push_back(cr);
        counts.push_back(nr);
        totals.push_back(m.row_count(p));
    }
    return ojson{{"n_samples", m.n_samples()}, {"cells", cells}, {"counts", counts}, {"row_total", totals}};
}

struct PairFamily {
    std::vector<ConfusionMatrix> matrices;  // pairs with at least one qualifying sample
    std::vector<std::int64_t> total;
    std::int64_t n_samples = 0;
    std::size_t n_pairs = 0;
};

PairFamily pair_family(const EvalFrame& frame, const std::vector<ClassifierView>& rows,
                       const std::vector<ClassifierView>& columns, ErrorFilter filter) {
    const std::size_t k = frame.num_classes();
    PairFamily fam;
    fam.total.assign(k * k, 0);
    if (rows.empty() || columns.empty()) return fam;
    for (auto& pair : pairwise_error_counts(frame, rows, columns, filter)) {
        ++fam.n_pairs;
        for (std::size_t c = 0; c < k * k; ++c) fam.total[c] += pair.counts[c];
        fam.n_samples += pair.n_samples;
        if (pair.n_samples > 0) fam.matrices.push_back(ConfusionMatrix::from_counts(k, std::move(pair.counts)));
    }
    return fam;
}

// ---- stratification ----------------------------------------------------------------

BinSpec bins_for(const RunSettings& settings, const DifficultyScore& score) {
    auto it = settings.bins.find(score.metric);
    if (it == settings.bins.end()) return default_bins(score);
    if (it->second.kind == BinSpec::Kind::Levels && it->second.count == 0) return BinSpec::levels(score.group_size);
    return it->second;
}

ojson strat_json(const EvalFrame& frame, const std::string& reference, const std::string& score_source,
                 const StratifiedAccuracy& sa) {
    ojson bins = ojson::array();
    for (const auto& b : sa.bins) bins.push_back(ojson{{"lo", b.lo}, {"hi", b.hi}, {"n_samples", b.n_samples}});
    ojson per = ojson::array();
    for (const auto& c : sa.per_classifier) {
        ojson acc = ojson::array();
        for (const auto& a : c.accuracy) acc.push_back(real_or_null(a));
        per.push_back(ojson{{"classifier_id", c.classifier_id},
                            {"role", role_of(frame, c.classifier_id)},
                            {"accuracy", acc},
                            {"n_samples", c.n_samples}});
    }
    return ojson{{"reference", reference},
                 {"score_source", score_source},
                 {"bins", bins},
                 {"per_classifier", per},
                 {"band", band_json(sa.band)}};
}

std::vector<std::optional<double>> row_of(const StratifiedAccuracy& sa, std::string_view id) {
    for (const auto& c : sa.per_classifier) {
        if (c.classifier_id == id) return c.accuracy;
    }
    return {};
}

std::vector<std::vector<std::optional<double>>> rows_with_role(const EvalFrame& frame, const StratifiedAccuracy& sa,
                                                               std::string_view role) {
    std::vector<std::vector<std::optional<double>>> rows;
    for (const auto& c : sa.per_classifier) {
        if (role_of(frame, c.classifier_id) == role) rows.push_back(c.accuracy);
    }
    return rows;
}

ojson band_entry(const std::string& reference, const std::vector<std::optional<Band>>& band) {
    return ojson{{"reference", reference}, {"band", band_json(band)}};
}

std::string score_csv(const EvalFrame& frame, const std::vector<double>& values) {
    std::string out = "sample_id,value\n";
    for (std::size_t i = 0; i < frame.size(); ++i) out += frame.sample_ids()[i] + "," + format_real(values[i]) + "\n";
    return out;
}

std::vector<ClassifierView> concat(std::vector<ClassifierView> a, const std::vector<ClassifierView>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ---- stats helpers ------------------------------------------------------------------

std::string digest_pairs(std::span<const double> xs, std::span<const double> ys) {
    std::string text;
    for (std::size_t i = 0; i < xs.size(); ++i) text += format_real(xs[i]) + "," + format_real(ys[i]) + "\n";
    return sha256_hex(text);
}

ojson null_test(const std::string& name, const std::string& kind, double alpha, const std::string& pooling,
                const std::string& digest, const std::string& error) {
    return ojson{{"name", name},       {"kind", kind},       {"statistic", nullptr}, {"df", nullptr},
                 {"p", nullptr},       {"alpha", alpha},     {"reject_null", nullptr}, {"pooling", pooling},
                 {"inputs_digest", digest}, {"error", error}};
}

ojson t_test_entry(const std::string& name, std::span<const double> xs, std::span<const double> ys, double alpha,
                   const std::string& pooling) {
    const std::string digest = digest_pairs(xs, ys);
    try {
        const TTestResult t = paired_t_test(xs, ys);
        return ojson{{"name", name},
                     {"kind", "paired_t"},
                     {"statistic", t.statistic},
                     {"df", t.df},
                     {"p", t.p_two_sided},
                     {"alpha", alpha},
                     {"reject_null", decide(t.p_two_sided, alpha).reject_null},
                     {"pooling", pooling},
                     {"inputs_digest", digest},
                     {"n", t.n}};
    } catch (const Error& e) {
        return null_test(name, "paired_t", alpha, pooling, digest, e.what());
    }
}

std::vector<std::pair<double, double>> ols_points(const StratifiedAccuracy& sa, OlsPoints mode) {
    std::vector<std::pair<double, double>> pts;
    auto x_of = [&](std::size_t b) { return 0.5 * (sa.bins[b].lo + sa.bins[b].hi); };
    if (mode == OlsPoints::BinMeans) {
        for (std::size_t b = 0; b < sa.band.size(); ++b) {
            if (sa.band[b]) pts.emplace_back(x_of(b), sa.band[b]->mean);
        }
        return pts;
    }
    for (const auto& c : sa.per_classifier) {
        for (std::size_t b = 0; b < c.accuracy.size(); ++b) {
            if (c.accuracy[b]) pts.emplace_back(x_of(b), *c.accuracy[b]);
        }
    }
    return pts;
}

ojson ols_entry(const std::string& name, const std::vector<std::pair<double, double>>& pts, double alpha,
                OlsPoints mode) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [x, y] : pts) {
        xs.push_back(x);
        ys.push_back(y);
    }
    const std::string digest = digest_pairs(xs, ys);
    const std::string pooling(to_string(mode));
    try {
        const OlsFit fit = ols_fit(pts);
        ojson stat = nullptr;
        if (fit.slope_se && *fit.slope_se > 0.0) stat = fit.slope / *fit.slope_se;
        ojson df = nullptr;
        if (fit.n >= 3) df = fit.n - 2;
        ojson reject = nullptr;
        if (fit.slope_p) reject = decide(*fit.slope_p, alpha).reject_null;
        return ojson{{"name", name},
                     {"kind", "ols"},
                     {"statistic", stat},
                     {"df", df},
                     {"p", real_or_null(fit.slope_p)},
                     {"alpha", alpha},
                     {"reject_null", reject},
                     {"pooling", pooling},
                     {"inputs_digest", digest},
                     {"n", fit.n},
                     {"slope", fit.slope},
                     {"intercept", fit.intercept},
                     {"slope_se", real_or_null(fit.slope_se)},
                     {"intercept_se", real_or_null(fit.intercept_se)},
                     {"intercept_p", real_or_null(fit.intercept_p)},
                     {"r2", fit.r2}};
    } catch (const Error& e) {
        return null_test(name, "ols", alpha, pooling, digest, e.what());
    }
}

struct ThresholdRun {
    std::string group;
    std::string partner;
    std::optional<ThresholdSelection> selection;
    std::string error;
};

// Threshold selection over all soft machines ("all") and over each group tag.
std::vector<ThresholdRun> threshold_runs(const EvalFrame& frame, const Roster& roster, const RunSettings& settings) {
    std::vector<ThresholdRun> runs;
    std::optional<ClassifierView> partner;
    std::string partner_id;
    if (settings.threshold_partner) {
        partner_id = *settings.threshold_partner;
        partner = roster.lookup(frame, partner_id);
    } else if (!roster.humans.empty()) {
        partner = roster.humans.front();
        partner_id = std::string(partner->id);
    }

    std::map<std::string, std::vector<ClassifierView>> groups;
    groups["all"] = roster.soft_machines;
    for (const auto& m : frame.machines()) {
        if (m.kind == PredictionKind::Soft && !m.group.empty()) groups["group:" + m.group].push_back(m.view());
    }
    for (const auto& [name, bases] : groups) {
        ThresholdRun run{name, partner_id, std::nullopt, ""};
        if (!partner) {
            run.error = partner_id.empty() ? "no partner: the frame has no annotators"
                                           : "unknown threshold partner '" + partner_id + "'";
        } else {
            try {
                run.selection = select_threshold(bases, *partner, settings.eta_grid, settings.alpha, frame);
            } catch (const Error& e) {
                run.error = e.what();
            }
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

ojson selection_json(const ThresholdRun& run) {
    ojson j{{"group", run.group}, {"partner", run.partner}};
    if (!run.selection) {
        j["eta_star"] = nullptr;
        j["error"] = run.error;
        return j;
    }
    const auto& s = *run.selection;
    j["eta_star"] = s.eta_star;
    j["fallback"] = s.fallback;
    j["grid"] = s.grid;
    j["bases"] = s.base_ids;
    j["accuracy"] = s.accuracy;
    j["best_accuracy"] = s.best_accuracy;
    return j;
}

}  // namespace

// ---- individual reports -----------------------------------------------------------------

ReportFiles accuracy_report(const EvalFrame& frame, const RunSettings& settings) {
    const Roster roster(frame, settings);
    std::string csv = "classifier_id,role,kind,accuracy,n_samples\n";
    const std::string n = std::to_string(frame.size());
    for (const auto& m : frame.machines()) {
        csv += m.classifier_id + ",machine," + std::string(to_string(m.kind)) + "," +
               format_real(accuracy(frame, m.view())) + "," + n + "\n";
    }
    for (const auto& h : frame.humans()) {
        csv += h.annotator_id + ",human,hard," + format_real(accuracy(frame, h.view())) + "," + n + "\n";
    }
    if (roster.aggre) {
        csv += std::string(kAggregateId) + ",aggregate,hard," + format_real(accuracy(frame, roster.aggre->view())) +
               "," + n + "\n";
    }
    return {{"accuracy.csv", csv}};
}

ReportFiles confusion_report(const EvalFrame& frame, const RunSettings& settings) {
    const Roster roster(frame, settings);
    const LabelSpace& ls = frame.label_space();
    ReportFiles files;
    for (const auto& v : concat(roster.machines, roster.humans)) {
        put_confusion(files, "confusion_" + std::string(v.id) + "_vs_truth", confusion(frame, v), ls);
    }
    if (roster.aggre) {
        put_confusion(files, "confusion_" + std::string(kAggregateId) + "_vs_truth",
                      confusion(frame, roster.aggre->view()), ls);
    }
    for (const auto& m : roster.machines) {
        for (const auto& h : roster.humans) {
            put_confusion(files, "confusion_" + std::string(m.id) + "_vs_" + std::string(h.id),
                          confusion(m.labels, h.labels, frame.num_classes()), ls);
        }
    }

    struct GroupSpec {
        const char* name;
        const std::vector<ClassifierView>* rows;
        const std::vector<ClassifierView>* columns;
    };
    const GroupSpec groups[] = {
        {"humans_vs_humans", &roster.humans, &roster.humans},
        {"humans_vs_machines", &roster.humans, &roster.machines},
        {"machines_vs_machines", &roster.machines, &roster.machines},
    };
    ojson summary{{"error_filter", to_string(settings.error_filter)}, {"groups", ojson::array()}};
    for (const auto& g : groups) {
        const PairFamily fam = pair_family(frame, *g.rows, *g.columns, settings.error_filter);
        if (fam.n_pairs == 0) continue;
        put_confusion(files, std::string("confusion_") + g.name, ConfusionMatrix::from_counts(frame.num_classes(), fam.total),
                      ls);
        summary["groups"].push_back(ojson{{"name", g.name},
                                          {"n_pairs", fam.n_pairs},
                                          {"n_pairs_with_samples", fam.matrices.size()},
                                          {"n_samples", fam.n_samples}});
    }
    files["confusion_groups.json"] = dump(summary);
    return files;
}

ReportFiles difficulty_report(const EvalFrame& frame, const RunSettings& settings) {
    const Roster roster(frame, settings);
    ReportFiles files;
    const auto& machines = roster.machines;
    const auto& humans = roster.humans;

    // Machine confidence: each soft machine against its own confidence, with
    // the annotators evaluated on the same bins.
    if (!roster.soft_machines.empty()) {
        ojson refs = ojson::array();
        std::vector<std::vector<std::optional<double>>> machine_rows;
        std::vector<std::vector<std::optional<double>>> human_rows;
        std::string spec_text;
        for (const auto& m : roster.soft_machines) {
            const DifficultyScore mc = machine_confidence(m);
            files["difficulty_machine_confidence_" + std::string(m.id) + ".csv"] = score_csv(frame, mc.values);
            const BinSpec spec = bins_for(settings, mc);
            spec_text = to_string(spec);
            std::vector<ClassifierView> evaluees{m};
            evaluees.insert(evaluees.end(), humans.begin(), humans.end());
            const StratifiedAccuracy sa = stratify(frame, evaluees, mc, spec);
            machine_rows.push_back(row_of(sa, m.id));
            for (auto& r : rows_with_role(frame, sa, "human")) human_rows.push_back(std::move(r));
            refs.push_back(strat_json(frame, std::string(m.id), std::string(m.id), sa));
        }
        ojson bands{{"machines", band_entry("own", band_over(machine_rows))}};
        if (!human_rows.empty()) bands["humans"] = band_entry("all", band_over(human_rows));
        files["stratified_machine_confidence.json"] =
            dump(ojson{{"metric", "machine_confidence"}, {"bins_spec", spec_text}, {"references", refs}, {"bands", bands}});
    }

    // Agreement within a group: leave-one-out for the group itself, the full
    // group score for the other side.
    auto agreement_reports = [&](const std::vector<ClassifierView>& group, const std::vector<ClassifierView>& others,
                                 DifficultyMetric metric, const char* own_role, const char* other_role) {
        if (group.empty()) return;
        const std::string name(to_string(metric));
        const DifficultyScore full = agreement(frame, group, std::nullopt, metric);
        files["difficulty_" + name + ".csv"] = score_csv(frame, full.values);
        ojson refs = ojson::array();
        ojson bands = ojson::object();
        std::string spec_text = "levels";
        if (group.size() >= 2) {
            const StratifiedAccuracy loo = stratify_leave_one_out(frame, group, metric);
            refs.push_back(strat_json(frame, "leave_one_out", "group minus evaluee", loo));
            bands[own_role] = band_entry("leave_one_out", loo.band);
        }
        if (!others.empty()) {
            const BinSpec spec = bins_for(settings, full);
            spec_text = to_string(spec);
            const StratifiedAccuracy sa = stratify(frame, others, full, spec);
            refs.push_back(strat_json(frame, "full_group", full.source, sa));
            bands[other_role] = band_entry("full_group", sa.band);
        }
        files["stratified_" + name + ".json"] =
            dump(ojson{{"metric", name}, {"bins_spec", spec_text}, {"references", refs}, {"bands", bands}});
    };
    agreement_reports(machines, humans, DifficultyMetric::MachineAgreement, "machines", "humans");
    agreement_reports(humans, machines, DifficultyMetric::HumanAgreement, "humans", "machines");

    auto shared_score_report = [&](const DifficultyScore& score) {
        const std::string name(to_string(score.metric));
        files["difficulty_" + name + ".csv"] = score_csv(frame, score.values);
        const BinSpec spec = bins_for(settings, score);
        const StratifiedAccuracy sa = stratify(frame, concat(machines, humans), score, spec);
        ojson bands = ojson::object();
        auto mrows = rows_with_role(frame, sa, "machine");
        auto hrows = rows_with_role(frame, sa, "human");
        if (!mrows.empty()) bands["machines"] = band_entry("humans", band_over(mrows));
        if (!hrows.empty()) bands["humans"] = band_entry("humans", band_over(hrows));
        files["stratified_" + name + ".json"] =
            dump(ojson{{"metric", name},
                       {"bins_spec", to_string(spec)},
                       {"references", ojson::array({strat_json(frame, "humans", score.source, sa)})},
                       {"bands", bands}});
    };
    if (!humans.empty()) shared_score_report(human_entropy(frame, humans));
    if (roster.all_times(frame)) shared_score_report(mean_time(frame, frame.humans()));

    // Sample-level distribution difference and difficulty quadrants need annotators.
    if (!humans.empty() && !roster.soft_machines.empty()) {
        std::string summary = "classifier_id,norm,mean\n";
        const DifficultyScore human_diff = agreement(frame, humans, std::nullopt, DifficultyMetric::HumanAgreement);
        for (const auto& m : roster.soft_machines) {
            const auto sd = sample_distribution_diff(frame, m, humans, settings.sd_norm);
            files["sd_" + std::string(m.id) + ".csv"] = score_csv(frame, sd.values);
            summary += sd.classifier_id + "," + std::string(to_string(settings.sd_norm)) + "," + format_real(sd.mean) + "\n";

            const auto quads =
                quadrant_confusions(machine_confidence(m), human_diff, settings.quadrant_thresholds, m, frame);
            ojson qs = ojson::array();
            for (const auto& q : quads) {
                ojson e{{"name", q.name}, {"n_samples", q.n_samples}};
                e["confusion"] = q.confusion ? confusion_json(*q.confusion) : ojson(nullptr);
                qs.push_back(e);
            }
            files["quadrants_" + std::string(m.id) + ".json"] =
                dump(ojson{{"classifier_id", std::string(m.id)},
                           {"machine_metric", "machine_confidence"},
                           {"human_metric", "human_agreement"},
                           {"thresholds",
                            {{"machine", settings.quadrant_thresholds.machine},
                             {"human", settings.quadrant_thresholds.human}}},
                           {"easy_rule", "score >= threshold"},
                           {"quadrants", qs}});
        }
        files["sd_summary.csv"] = summary;
    }
    return files;
}

ReportFiles matching_report(const EvalFrame& frame, const RunSettings& settings) {
    const Roster roster(frame, settings);
    const auto all = concat(roster.machines, roster.humans);
    std::vector<Correctness> corr;
    for (const auto& v : all) corr.push_back(Correctness::of(frame, v));

    std::string csv = "a,b,a_role,b_role,subset_size,matching\n";
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
    };
    std::map<std::string, Acc> groups{{"MM", {}}, {"HM", {}}, {"HH", {}}};
    ojson skipped = ojson::array();
    for (std::size_t bi = 0; bi < all.size(); ++bi) {
        const std::string b(all[bi].id);
        std::vector<std::string> subset;
        try {
            subset = balanced_subset(corr[bi], splitmix64(settings.seed ^ fnv1a64("balanced:" + b)));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CannotBalance) throw;
            skipped.push_back(ojson{{"reference", b}, {"reason", e.what()}});
            continue;
        }
        for (std::size_t ai = 0; ai < all.size(); ++ai) {
            if (ai == bi) continue;
            const std::string a(all[ai].id);
            const double v = matching_percentage(corr[ai], corr[bi], subset);
            const std::string ra = role_of(frame, a);
            const std::string rb = role_of(frame, b);
            csv += a + "," + b + "," + ra + "," + rb + "," + std::to_string(subset.size()) + "," + format_real(v) + "\n";
            const std::string key = ra == rb ? (ra == "machine" ? "MM" : "HH") : "HM";
            groups[key].sum += v;
            ++groups[key].n;
        }
    }
    ojson g = ojson::object();
    for (const char* key : {"MM", "HM", "HH"}) {
        const Acc& a = groups[key];
        g[key] = ojson{{"mean", a.n ? ojson(a.sum / static_cast<double>(a.n)) : ojson(nullptr)}, {"n_pairs", a.n}};
    }
    ojson summary{{"seed", settings.seed},
                  {"conditioning", "b"},
                  {"subset_seed", "splitmix64(seed ^ fnv1a64(\"balanced:\" + b))"},
                  {"groups", g},
                  {"skipped", skipped}};
    return {{"matching.csv", csv}, {"matching_summary.json", dump(summary)}};
}

ReportFiles stats_report(const EvalFrame& frame, const RunSettings& settings) {
    const Roster roster(frame, settings);
    const std::string pooling(to_string(settings.pooling));
    const double alpha = settings.alpha;
    ojson tests = ojson::array();

    // Error-confusion comparisons between families of classifier pairs.
    const PairFamily mm = pair_family(frame, roster.machines, roster.machines, settings.error_filter);
    const PairFamily hh = pair_family(frame, roster.humans, roster.humans, settings.error_filter);
    const PairFamily hm = pair_family(frame, roster.humans, roster.machines, settings.error_filter);
    const std::pair<const char*, const PairFamily*> fams[] = {{"MM", &mm}, {"HH", &hh}, {"HM", &hm}};
    const std::pair<int, int> comparisons[] = {{0, 1}, {2, 1}, {0, 2}};
    for (const auto& [i, j] : comparisons) {
        const auto& [na, fa] = fams[i];
        const auto& [nb, fb] = fams[j];
        for (bool diagonal : {true, false}) {
            const std::string name = std::string("error_confusion_") + na + "_vs_" + nb + (diagonal ? "_diag" : "_offdiag");
            if (fa->matrices.empty() || fb->matrices.empty()) {
                tests.push_back(null_test(name, "paired_t", alpha, pooling, sha256_hex(""),
                                          std::string("EmptySelection: family ") +
                                              (fa->matrices.empty() ? na : nb) + " has no shared mistakes"));
                continue;
            }
            const CellSamples s = diag_offdiag_samples(fa->matrices, fb->matrices, diagonal, settings.pooling);
            tests.push_back(t_test_entry(name, s.first, s.second, alpha, pooling));
        }
    }

    // Accuracy as a function of difficulty.
    auto fit = [&](const std::string& name, const StratifiedAccuracy& sa) {
        tests.push_back(ols_entry(name, ols_points(sa, settings.ols_points), alpha, settings.ols_points));
    };
    if (!roster.machines.empty()) {
        const DifficultyScore ma = agreement(frame, roster.machines, std::nullopt, DifficultyMetric::MachineAgreement);
        fit("ols_machine_accuracy_vs_machine_agreement", stratify(frame, roster.machines, ma, bins_for(settings, ma)));
        if (!roster.humans.empty()) {
            fit("ols_human_accuracy_vs_machine_agreement", stratify(frame, roster.humans, ma, bins_for(settings, ma)));
        }
    }
    if (!roster.humans.empty()) {
        const DifficultyScore ha = agreement(frame, roster.humans, std::nullopt, DifficultyMetric::HumanAgreement);
        fit("ols_human_accuracy_vs_human_agreement", stratify(frame, roster.humans, ha, bins_for(settings, ha)));
        if (!roster.machines.empty()) {
            fit("ols_machine_accuracy_vs_human_agreement", stratify(frame, roster.machines, ha, bins_for(settings, ha)));
        }
    }
    if (!roster.soft_machines.empty()) {
        // Each machine stratified by its own confidence; points pooled.
        StratifiedAccuracy pooled;
        std::vector<std::vector<std::optional<double>>> rows;
        for (const auto& m : roster.soft_machines) {
            const DifficultyScore mc = machine_confidence(m);
            StratifiedAccuracy sa = stratify(frame, {m}, mc, bins_for(settings, mc));
            if (pooled.bins.empty()) pooled.bins = sa.bins;
            rows.push_back(sa.per_classifier.front().accuracy);
            pooled.per_classifier.push_back(std::move(sa.per_classifier.front()));
        }
        pooled.band = band_over(rows);
        fit("ols_machine_accuracy_vs_machine_confidence", pooled);
    }

    // Threshold selection: each eta against the per-base best.
    ojson selections = ojson::array();
    for (const auto& run : threshold_runs(frame, roster, settings)) {
        selections.push_back(selection_json(run));
        if (!run.selection) continue;
        const auto& s = *run.selection;
        for (std::size_t g = 0; g < s.grid.size(); ++g) {
            const std::string name = "threshold_" + run.group + "_eta_" + short_real(s.grid[g]);
            std::vector<double> at(s.base_ids.size());
            for (std::size_t b = 0; b < at.size(); ++b) at[b] = s.accuracy[b][g];
            ojson e = t_test_entry(name, at, s.best_accuracy, alpha, "bases");
            const EtaTest& t = s.tests[g];
            e["eta"] = t.eta;
            e["mean_accuracy"] = t.mean_accuracy;
            e["zero_variance"] = t.zero_variance;
            e["retained"] = t.retained;
            tests.push_back(e);
        }
    }

    ojson report{{"alpha", alpha},
                 {"pooling", pooling},
                 {"error_filter", to_string(settings.error_filter)},
                 {"ols_points", to_string(settings.ols_points)},
                 {"tests", tests},
                 {"threshold_selection", selections}};
    return {{"stats_report.json", dump(report)}};
}

ReportFiles teaming_report(const EvalFrame& frame, const RunSettings& settings) {
    const Roster roster(frame, settings);
    const auto runs = threshold_runs(frame, roster, settings);
    const ThresholdRun& overall = runs.front();  // "all" sorts before "group:*"

    std::optional<double> eta;
    if (settings.mode == TeamingMode::Swap) {
        if (settings.eta) {
            eta = settings.eta;
        } else if (overall.selection) {
            eta = overall.selection->eta_star;
        } else {
            throw Error(ErrorCode::InvalidConfig, "swap mode needs --eta (threshold selection failed: " +
                                                      overall.error + ")");
        }
    }

    std::vector<PartnerPool> pools;
    if (!roster.humans.empty()) pools.push_back({"human", roster.humans});
    if (roster.aggre) pools.push_back({"aggre", {roster.aggre->view()}});
    if (!roster.machines.empty()) pools.push_back({"model", roster.machines});

    const auto& bases = settings.mode == TeamingMode::Swap ? roster.soft_machines : roster.machines;
    std::vector<PairRow> all_pairs;
    std::vector<BestPairRow> best;
    for (const auto& base : bases) {
        std::vector<PartnerPool> usable;
        for (const auto& p : pools) {
            if (std::any_of(p.members.begin(), p.members.end(), [&](const ClassifierView& v) { return v.id != base.id; })) {
                usable.push_back(p);
            }
        }
        if (usable.empty()) continue;
        auto r = best_pair_search(frame, {base}, usable, settings.mode, eta);
        all_pairs.insert(all_pairs.end(), r.all_pairs.begin(), r.all_pairs.end());
        best.insert(best.end(), r.best.begin(), r.best.end());
    }
    std::sort(all_pairs.begin(), all_pairs.end(), [](const PairRow& a, const PairRow& b) {
        return std::tie(a.base_id, a.pool, a.partner_id) < std::tie(b.base_id, b.pool, b.partner_id);
    });
    std::sort(best.begin(), best.end(), [](const BestPairRow& a, const BestPairRow& b) {
        return std::tie(a.base_id, a.pool) < std::tie(b.base_id, b.pool);
    });

    std::string csv = "base,partner_pool,partner,base_acc,partner_acc,teamed_acc,boost,n_swapped\n";
    for (const auto& r : all_pairs) {
        csv += r.base_id + "," + r.pool + "," + r.partner_id + "," + format_real(r.cell.base_acc) + "," +
               format_real(r.cell.partner_acc) + "," + format_real(r.cell.teamed_acc) + "," +
               format_real(r.cell.boost) + "," + std::to_string(r.n_swapped) + "\n";
    }
    ojson cells = ojson::array();
    for (const auto& r : best) {
        cells.push_back(ojson{{"base", r.base_id},
                              {"partner_pool", r.pool},
                              {"best_partner", r.best_partner},
                              {"base_acc", r.cell.base_acc},
                              {"partner_acc", r.cell.partner_acc},
                              {"teamed_acc", r.cell.teamed_acc},
                              {"boost", r.cell.boost},
                              {"n_swapped", r.n_swapped}});
    }
    ojson report{{"mode", to_string(settings.mode)},
                 {"eta", real_or_null(eta)},
                 {"grid", settings.eta_grid},
                 {"eta_star", overall.selection ? ojson(overall.selection->eta_star) : ojson(nullptr)},
                 {"eta_star_fallback", overall.selection ? ojson(overall.selection->fallback) : ojson(nullptr)},
                 {"threshold_partner", overall.partner},
                 {"alpha", settings.alpha},
                 {"tie_rule", to_string(settings.tie)},
                 {"cells", cells}};
    return {{"teaming_report.json", dump(report)}, {"teaming_matrix.csv", csv}};
}

// ---- orchestration --------------------------------------------------------------------

std::string_view to_string(ReportKind kind) {
    switch (kind) {
        case ReportKind::Accuracy: return "accuracy";
        case ReportKind::Confusion: return "confusion";
        case ReportKind::Difficulty: return "difficulty";
        case ReportKind::Matching: return "matching";
        case ReportKind::Stats: return "stats";
        case ReportKind::Teaming: return "teaming";
        case ReportKind::All: return "all";
    }
    return "all";
}

ReportKind parse_report_kind(std::string_view text) {
    for (auto k : {ReportKind::Accuracy, ReportKind::Confusion, ReportKind::Difficulty, ReportKind::Matching,
                   ReportKind::Stats, ReportKind::Teaming, ReportKind::All}) {
        if (to_string(k) == text) return k;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown report '" + std::string(text) + "'");
}

namespace {

ojson settings_object(const RunSettings& s) {
    ojson bins = ojson::object();
    for (const auto& [metric, spec] : s.bins) bins[std::string(to_string(metric))] = to_string(spec);
    return ojson{{"seed", s.seed},
                 {"alpha", s.alpha},
                 {"eta_grid", s.eta_grid},
                 {"eta", real_or_null(s.eta)},
                 {"mode", to_string(s.mode)},
                 {"error_filter", to_string(s.error_filter)},
                 {"sd_norm", to_string(s.sd_norm)},
                 {"pooling", to_string(s.pooling)},
                 {"tie", to_string(s.tie)},
                 {"ols_points", to_string(s.ols_points)},
                 {"bins", bins},
                 {"quadrant_thresholds", {{"machine", s.quadrant_thresholds.machine}, {"human", s.quadrant_thresholds.human}}},
                 {"threshold_partner", s.threshold_partner ? ojson(*s.threshold_partner) : ojson(nullptr)}};
}

}  // namespace

std::string settings_json(const RunSettings& settings) { return settings_object(settings).dump(); }

ReportFiles build_reports(const LoadedInputs& inputs, const RunSettings& settings, ReportKind kind) {
    settings.validate();
    const EvalFrame& frame = inputs.frame;
    ReportFiles files;
    auto add = [&](ReportKind k, ReportFiles (*fn)(const EvalFrame&, const RunSettings&)) {
        if (kind != ReportKind::All && kind != k) return;
        try {
            for (auto& [name, body] : fn(frame, settings)) files[name] = std::move(body);
        } catch (const Error& e) {
            throw Error(e.code(), "report " + std::string(to_string(k)) + ": " + e.what());
        }
    };
    add(ReportKind::Accuracy, accuracy_report);
    add(ReportKind::Confusion, confusion_report);
    add(ReportKind::Difficulty, difficulty_report);
    add(ReportKind::Matching, matching_report);
    add(ReportKind::Stats, stats_report);
    add(ReportKind::Teaming, teaming_report);

    ojson input_list = ojson::array();
    std::string digest_text = settings_json(settings) + "\n";
    for (const auto& f : inputs.files) {
        input_list.push_back(ojson{{"role", f.role}, {"name", f.name}, {"id", f.id}, {"rows", f.rows}, {"sha256", f.sha256}});
        digest_text += f.role + " " + f.name + " " + f.id + " " + f.sha256 + "\n";
    }
    ojson outputs = ojson::array();
    for (const auto& [name, body] : files) {
        outputs.push_back(ojson{{"name", name}, {"bytes", body.size()}, {"sha256", sha256_hex(body)}});
    }
    ojson manifest{{"tool", kToolName},
                   {"version", kToolVersion},
                   {"random_stream_version", kRandomStreamVersion},
                   {"report", to_string(kind)},
                   {"seed", settings.seed},
                   {"config_digest", sha256_hex(digest_text)},
                   {"num_samples", frame.size()},
                   {"num_classes", frame.num_classes()},
                   {"settings", settings_object(settings)},
                   {"inputs", input_list},
                   {"outputs", outputs}};
    files["manifest.json"] = dump(manifest);
    return files;
}

}  // namespace hmdiff
