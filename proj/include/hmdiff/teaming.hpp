#pragma once

// Post-hoc human-machine teaming: majority-vote aggregation, the oracle
// upper bound, confidence-threshold swapping, threshold selection by paired
// t-test, and best-partner search.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmdiff/ingest.hpp"
#include "hmdiff/stats.hpp"

namespace hmdiff {

inline constexpr const char* kAggregateId = "aggre";

// Tie rule for majority vote. Lowest: among tied labels, the one given by
// the earliest annotator in list order. Random: uniform among tied labels
// from a stream seeded by `seed`.
struct TieRule {
    enum class Kind { Lowest, Random };
    Kind kind = Kind::Lowest;
    std::uint64_t seed = 0;

    static TieRule lowest() { return {}; }
    static TieRule random(std::uint64_t seed) { return {Kind::Random, seed}; }
};
std::string to_string(const TieRule& rule);
// "lowest" or "random:<seed>".
TieRule parse_tie_rule(std::string_view text);

// Per-sample plurality label over >= 2 aligned annotation sets; id "aggre".
AnnotationSet majority_vote(const std::vector<ClassifierView>& annotators, const EvalFrame& frame,
                            TieRule tie = TieRule::lowest());

enum class TeamingMode { Oracle, Swap };
std::string_view to_string(TeamingMode mode);
TeamingMode parse_teaming_mode(std::string_view text);

struct ComposedClassifier {
    std::string base_id;
    std::string partner_id;
    TeamingMode mode = TeamingMode::Oracle;
    std::optional<double> eta;          // swap only
    std::vector<int> predictions;       // aligned with frame.sample_ids()
    std::vector<std::uint8_t> swap_mask;  // 1 where the partner's label was used

    std::size_t n_swapped() const;
};

struct TeamingCell {
    double base_acc = 0.0;
    double partner_acc = 0.0;
    double teamed_acc = 0.0;
    double boost = 0.0;  // teamed_acc - base_acc
};

struct TeamingResult {
    ComposedClassifier composed;
    TeamingCell cell;
};

// Correct whenever either party is correct; keeps the base label when both
// are wrong.
TeamingResult oracle_team(const ClassifierView& base, const ClassifierView& partner, const EvalFrame& frame);

// Partner label wherever the base's confidence is <= eta, base argmax otherwise.
TeamingResult realistic_team(const ClassifierView& base, const ClassifierView& partner, double eta,
                             const EvalFrame& frame);

// Swap-mode accuracy of `base` at each threshold in `grid`, in one pass.
std::vector<double> swap_accuracy_curve(const ClassifierView& base, const ClassifierView& partner,
                                        const std::vector<double>& grid, const EvalFrame& frame);

std::vector<double> default_eta_grid();

struct EtaTest {
    double eta = 0.0;
    double mean_accuracy = 0.0;            // mean over bases of Acc(eta)
    std::optional<TTestResult> test;       // nullopt when the differences are degenerate
    bool zero_variance = false;
    bool retained = false;                 // H0 (no difference from per-base best) kept
};

struct ThresholdSelection {
    double eta_star = 0.0;
    bool fallback = false;  // no eta retained; eta_star maximizes mean accuracy
    double alpha = kDefaultAlpha;
    std::vector<double> grid;
    std::vector<std::string> base_ids;
    std::vector<std::vector<double>> accuracy;  // [base][eta]
    std::vector<double> best_accuracy;          // per base, max over grid
    std::vector<EtaTest> tests;
};

// For each eta, paired t-test of {Acc_b(eta)} vs {max_eta' Acc_b(eta')} over
// bases; eta_star is the smallest eta that retains H0 at alpha.
ThresholdSelection select_threshold(const std::vector<ClassifierView>& bases, const ClassifierView& partner,
                                    const std::vector<double>& grid, double alpha, const EvalFrame& frame);

struct PartnerPool {
    std::string name;  // e.g. "human", "aggre", "model"
    std::vector<ClassifierView> members;
};

struct PairRow {
    std::string base_id;
    std::string pool;
    std::string partner_id;
    TeamingCell cell;
    std::size_t n_swapped = 0;
};

struct BestPairRow {
    std::string base_id;
    std::string pool;
    std::string best_partner;
    TeamingCell cell;
    std::size_t n_swapped = 0;
};

struct PairSearchResult {
    TeamingMode mode = TeamingMode::Oracle;
    std::optional<double> eta;
    std::vector<PairRow> all_pairs;  // sorted by (base, pool, partner)
    std::vector<BestPairRow> best;   // sorted by (base, pool)
};

// Evaluates every base against every pool member except itself and keeps
// the maximal boost per (base, pool); boost ties go to the smaller partner id.
PairSearchResult best_pair_search(const EvalFrame& frame, const std::vector<ClassifierView>& bases,
                                  const std::vector<PartnerPool>& pools, TeamingMode mode,
                                  std::optional<double> eta = std::nullopt);

}  // namespace hmdiff
