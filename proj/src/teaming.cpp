#include "hmdiff/teaming.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "hmdiff/error.hpp"
#include "hmdiff/metrics.hpp"
#include "hmdiff/random.hpp"

namespace hmdiff {

namespace {

void check_aligned(const EvalFrame& frame, const ClassifierView& view) {
    if (view.size() != frame.size()) {
        throw Error(ErrorCode::CoverageMismatch, "classifier '" + std::string(view.id) + "' is not aligned with the frame");
    }
}

double fraction(std::size_t count, std::size_t n) {
    return static_cast<double>(count) / static_cast<double>(n);
}

TeamingCell make_cell(const EvalFrame& frame, const ClassifierView& base, const ClassifierView& partner,
                      const std::vector<int>& teamed) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < frame.size(); ++i) correct += teamed[i] == frame.truth()[i];
    TeamingCell cell;
    cell.base_acc = accuracy(frame, base);
    cell.partner_acc = accuracy(frame, partner);
    cell.teamed_acc = fraction(correct, frame.size());
    cell.boost = cell.teamed_acc - cell.base_acc;
    return cell;
}

}  // namespace

std::string to_string(const TieRule& rule) {
    return rule.kind == TieRule::Kind::Lowest ? "lowest" : "random:" + std::to_string(rule.seed);
}

TieRule parse_tie_rule(std::string_view text) {
    if (text == "lowest") return TieRule::lowest();
    constexpr std::string_view prefix = "random:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string_view digits = text.substr(prefix.size());
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
            return TieRule::random(seed);
        }
    }
    throw Error(ErrorCode::InvalidConfig, "tie rule must be lowest|random:<seed>, got '" + std::string(text) + "'");
}

AnnotationSet majority_vote(const std::vector<ClassifierView>& annotators, const EvalFrame& frame,
                            TieRule tie) {
    if (annotators.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "majority vote needs at least 2 annotators");
    }
    for (const auto& a : annotators) check_aligned(frame, a);
    const std::size_t k = frame.num_classes();
    std::optional<RandomStream> rng;
    if (tie.kind == TieRule::Kind::Random) rng.emplace(tie.seed, "majority_vote_ties");

    std::vector<AnnotationSet::Row> rows;
    rows.reserve(frame.size());
    std::vector<std::size_t> votes(k);
    std::vector<int> tied;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& a : annotators) ++votes[static_cast<std::size_t>(a.labels[i])];
        const std::size_t top = *std::max_element(votes.begin(), votes.end());
        // Tied labels in the order annotators first voted for them.
        tied.clear();
        for (const auto& a : annotators) {
            const int label = a.labels[i];
            if (votes[static_cast<std::size_t>(label)] == top &&
                std::find(tied.begin(), tied.end(), label) == tied.end()) {
                tied.push_back(label);
            }
        }
        int winner = tied.front();
        if (rng && tied.size() > 1) winner = tied[static_cast<std::size_t>(rng->below(tied.size()))];
        rows.push_back({frame.sample_ids()[i], winner, std::nullopt});
    }
    return AnnotationSet::make(kAggregateId, k, std::move(rows), "majority vote");
}

std::string_view to_string(TeamingMode mode) { return mode == TeamingMode::Oracle ? "oracle" : "swap"; }

TeamingMode parse_teaming_mode(std::string_view text) {
    if (text == "oracle") return TeamingMode::Oracle;
    if (text == "swap" || text == "realistic") return TeamingMode::Swap;
    throw Error(ErrorCode::InvalidConfig, "teaming mode must be oracle|swap, got '" + std::string(text) + "'");
}

std::size_t ComposedClassifier::n_swapped() const {
    return static_cast<std::size_t>(std::count(swap_mask.begin(), swap_mask.end(), std::uint8_t{1}));
}

TeamingResult oracle_team(const ClassifierView& base, const ClassifierView& partner, const EvalFrame& frame) {
    check_aligned(frame, base);
    check_aligned(frame, partner);
    TeamingResult r;
    r.composed.base_id = std::string(base.id);
    r.composed.partner_id = std::string(partner.id);
    r.composed.mode = TeamingMode::Oracle;
    r.composed.predictions.resize(frame.size());
    r.composed.swap_mask.assign(frame.size(), 0);
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const int y = frame.truth()[i];
        const bool use_partner = base.labels[i] != y && partner.labels[i] == y;
        r.composed.predictions[i] = use_partner ? partner.labels[i] : base.labels[i];
        r.composed.swap_mask[i] = use_partner;
    }
    r.cell = make_cell(frame, base, partner, r.composed.predictions);
    return r;
}

TeamingResult realistic_team(const ClassifierView& base, const ClassifierView& partner, double eta,
                             const EvalFrame& frame) {
    if (!base.is_soft()) {
        throw Error(ErrorCode::KindMismatch, "swap teaming needs a soft base; '" + std::string(base.id) + "' is hard");
    }
    if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must be in [0,1]");
    check_aligned(frame, base);
    check_aligned(frame, partner);
    TeamingResult r;
    r.composed.base_id = std::string(base.id);
    r.composed.partner_id = std::string(partner.id);
    r.composed.mode = TeamingMode::Swap;
    r.composed.eta = eta;
    r.composed.predictions.resize(frame.size());
    r.composed.swap_mask.assign(frame.size(), 0);
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const bool swap = base.confidence(i) <= eta;
        r.composed.predictions[i] = swap ? partner.labels[i] : base.labels[i];
        r.composed.swap_mask[i] = swap;
    }
    r.cell = make_cell(frame, base, partner, r.composed.predictions);
    return r;
}

std::vector<double> swap_accuracy_curve(const ClassifierView& base, const ClassifierView& partner,
                                        const std::vector<double>& grid, const EvalFrame& frame) {
    if (!base.is_soft()) {
        throw Error(ErrorCode::KindMismatch, "swap teaming needs a soft base; '" + std::string(base.id) + "' is hard");
    }
    check_aligned(frame, base);
    check_aligned(frame, partner);
    const std::size_t n = frame.size();
    // Sort samples by confidence; swapping at eta replaces a prefix.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> conf(n);
    for (std::size_t i = 0; i < n; ++i) conf[i] = base.confidence(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return conf[a] < conf[b]; });

    std::size_t base_correct = 0;
    for (std::size_t i = 0; i < n; ++i) base_correct += base.labels[i] == frame.truth()[i];
    // prefix_gain[j] = sum over the j least confident samples of (partner ok - base ok).
    std::vector<long long> prefix_gain(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = order[j];
        prefix_gain[j + 1] = prefix_gain[j] + static_cast<long long>(partner.labels[i] == frame.truth()[i]) -
                             static_cast<long long>(base.labels[i] == frame.truth()[i]);
    }
    std::vector<double> out;
    out.reserve(grid.size());
    for (double eta : grid) {
        const auto swapped = static_cast<std::size_t>(
            std::upper_bound(order.begin(), order.end(), eta,
                             [&](double e, std::size_t i) { return e < conf[i]; }) -
            order.begin());
        const long long correct = static_cast<long long>(base_correct) + prefix_gain[swapped];
        out.push_back(static_cast<double>(correct) / static_cast<double>(n));
    }
    return out;
}

std::vector<double> default_eta_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    return grid;
}

ThresholdSelection select_threshold(const std::vector<ClassifierView>& bases, const ClassifierView& partner,
                                    const std::vector<double>& grid, double alpha, const EvalFrame& frame) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "threshold grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0 || grid.back() > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "threshold grid must be ascending within [0,1]");
    }
    if (bases.size() < 2) throw Error(ErrorCode::InvalidArgument, "threshold selection needs >= 2 bases");

    ThresholdSelection sel;
    sel.alpha = alpha;
    sel.grid = grid;
    for (const auto& b : bases) {
        sel.base_ids.emplace_back(b.id);
        sel.accuracy.push_back(swap_accuracy_curve(b, partner, grid, frame));
        sel.best_accuracy.push_back(*std::max_element(sel.accuracy.back().begin(), sel.accuracy.back().end()));
    }

    std::optional<std::size_t> chosen;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        EtaTest t;
        t.eta = grid[g];
        std::vector<double> at_eta(bases.size());
        for (std::size_t b = 0; b < bases.size(); ++b) {
            at_eta[b] = sel.accuracy[b][g];
            t.mean_accuracy += at_eta[b];
        }
        t.mean_accuracy /= static_cast<double>(bases.size());
        try {
            t.test = paired_t_test(at_eta, sel.best_accuracy);
            t.retained = !decide(t.test->p_two_sided, alpha).reject_null;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroVariance) throw;
            t.zero_variance = true;
            // Identical differences: equal to the per-base best only if they are all zero.
            t.retained = at_eta == sel.best_accuracy;
        }
        if (t.retained && !chosen) chosen = g;
        sel.tests.push_back(t);
    }
    if (chosen) {
        sel.eta_star = grid[*chosen];
    } else {
        sel.fallback = true;
        std::size_t best = 0;
        for (std::size_t g = 1; g < grid.size(); ++g) {
            if (sel.tests[g].mean_accuracy > sel.tests[best].mean_accuracy) best = g;
        }
        sel.eta_star = grid[best];
    }
    return sel;
}

PairSearchResult best_pair_search(const EvalFrame& frame, const std::vector<ClassifierView>& bases,
                                  const std::vector<PartnerPool>& pools, TeamingMode mode,
                                  std::optional<double> eta) {
    if (bases.empty() || pools.empty()) throw Error(ErrorCode::EmptyPool, "no bases or partner pools");
    if (mode == TeamingMode::Swap && !eta) throw Error(ErrorCode::InvalidArgument, "swap teaming needs eta");
    PairSearchResult out;
    out.mode = mode;
    if (mode == TeamingMode::Swap) out.eta = eta;

    for (const auto& base : bases) {
        if (mode == TeamingMode::Swap && !base.is_soft()) {
            throw Error(ErrorCode::KindMismatch, "swap teaming needs a soft base; '" + std::string(base.id) + "' is hard");
        }
        for (const auto& pool : pools) {
            std::optional<BestPairRow> best;
            for (const auto& partner : pool.members) {
                if (partner.id == base.id) continue;
                const TeamingResult r = mode == TeamingMode::Oracle ? oracle_team(base, partner, frame)
                                                                    : realistic_team(base, partner, *eta, frame);
                PairRow row{std::string(base.id), pool.name, std::string(partner.id), r.cell,
                            r.composed.n_swapped()};
                if (!best || row.cell.boost > best->cell.boost ||
                    (row.cell.boost == best->cell.boost && row.partner_id < best->best_partner)) {
                    best = BestPairRow{row.base_id, row.pool, row.partner_id, row.cell, row.n_swapped};
                }
                out.all_pairs.push_back(std::move(row));
            }
            if (!best) {
                throw Error(ErrorCode::EmptyPool, "pool '" + pool.name + "' is empty for base '" +
                                                      std::string(base.id) + "' after excluding itself");
            }
            out.best.push_back(std::move(*best));
        }
    }
    std::sort(out.all_pairs.begin(), out.all_pairs.end(), [](const PairRow& a, const PairRow& b) {
        return std::tie(a.base_id, a.pool, a.partner_id) < std::tie(b.base_id, b.pool, b.partner_id);
    });
    std::sort(out.best.begin(), out.best.end(), [](const BestPairRow& a, const BestPairRow& b) {
        return std::tie(a.base_id, a.pool) < std::tie(b.base_id, b.pool);
    });
    return out;
}

}  // namespace hmdiff
