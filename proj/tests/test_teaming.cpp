#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "hmdiff/error.hpp"
#include "hmdiff/metrics.hpp"
#include "hmdiff/synth.hpp"
#include "hmdiff/teaming.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hmdiff;
using testutil::FrameBuilder;
using testutil::peaked;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an hmdiff::Error");
    return ErrorCode::InvalidArgument;
}

std::vector<ClassifierView> views(const EvalFrame& f, std::initializer_list<const char*> ids) {
    std::vector<ClassifierView> out;
    for (const char* id : ids) out.push_back(f.view(id));
    return out;
}

PopulationConfig population(std::uint64_t seed, std::size_t n, std::size_t k, std::size_t machines, std::size_t humans) {
    PopulationConfig cfg;
    for (std::size_t c = 0; c < k; ++c) cfg.class_names.push_back("c" + std::to_string(c));
    cfg.n_samples = n;
    cfg.class_prior.assign(k, 1.0 / static_cast<double>(k));
    cfg.seed = seed;
    cfg.shared_confusion = symmetric_confusion(k, 0.7);
    for (std::size_t m = 0; m < machines; ++m) {
        cfg.machines.push_back({"m" + std::to_string(m), 0.5, symmetric_confusion(k, 0.6 + 0.07 * static_cast<double>(m)),
                                1.0 + static_cast<double>(m), PredictionKind::Soft, m % 2 ? "odd" : "even"});
    }
    for (std::size_t h = 0; h < humans; ++h) {
        cfg.humans.push_back({"h" + std::to_string(h), symmetric_confusion(k, 0.75), std::nullopt});
    }
    return cfg;
}

}  // namespace

TEST_CASE("majority vote examples") {
    // Labels per sample across (h0,h1,h2): (a,a,b) and (a,b,c) with a=0,b=1,c=2.
    const auto f = FrameBuilder(3, {0, 0}).human("h0", {0, 0}).human("h1", {0, 1}).human("h2", {1, 2}).build();
    const auto agg = majority_vote(views(f, {"h0", "h1", "h2"}), f);
    CHECK(agg.annotator_id == "aggre");
    CHECK(agg.labels == std::vector<int>{0, 0});
    // Tie (c,b,a) with annotator order reversed: the first annotator's label wins.
    const auto rev = majority_vote(views(f, {"h2", "h1", "h0"}), f);
    CHECK(rev.labels[1] == 2);
    CHECK(code_of([&] { majority_vote(views(f, {"h0"}), f); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("majority vote is order-invariant without ties") {
    const auto f = FrameBuilder(3, {0, 1, 2}).human("a", {0, 1, 2}).human("b", {0, 1, 1}).human("c", {1, 1, 2}).build();
    const auto x = majority_vote(views(f, {"a", "b", "c"}), f);
    const auto y = majority_vote(views(f, {"c", "a", "b"}), f);
    CHECK(x.labels == y.labels);
}

TEST_CASE("random tie rule is seeded and picks among tied labels") {
    const auto f = FrameBuilder(3, {0, 0, 0, 0}).human("a", {0, 0, 0, 0}).human("b", {1, 1, 1, 1}).build();
    const auto r1 = majority_vote(views(f, {"a", "b"}), f, TieRule::random(5));
    const auto r2 = majority_vote(views(f, {"a", "b"}), f, TieRule::random(5));
    CHECK(r1.labels == r2.labels);
    for (int l : r1.labels) CHECK((l == 0 || l == 1));
    CHECK(parse_tie_rule("random:5").seed == 5);
    CHECK(to_string(parse_tie_rule("lowest")) == "lowest");
    CHECK(code_of([] { parse_tie_rule("coin"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("oracle teaming examples") {
    // base correct on s0,s1; partner correct on s1,s2; N = 4.
    const auto f = FrameBuilder(2, {0, 0, 0, 0}).hard("base", {0, 0, 1, 1}).hard("partner", {1, 0, 0, 1}).build();
    const auto r = oracle_team(f.view("base"), f.view("partner"), f);
    CHECK(r.cell.teamed_acc == 0.75);
    CHECK(r.cell.boost == 0.25);
    CHECK(r.composed.predictions[3] == 1);  // both wrong: base kept
    const auto self = oracle_team(f.view("base"), f.view("base"), f);
    CHECK(self.cell.teamed_acc == self.cell.base_acc);
}

TEST_CASE("realistic teaming examples") {
    // Confidences 0.4 (wrong) and 0.9 (right); partner right on both.
    const auto f = FrameBuilder(3, {0, 0}).soft("base", {peaked(3, 1, 0.4), peaked(3, 0, 0.9)}).hard("partner", {0, 0})
                       .human("h", {1, 1}).build();
    const auto r = realistic_team(f.view("base"), f.view("partner"), 0.6, f);
    CHECK(r.composed.swap_mask == std::vector<std::uint8_t>{1, 0});
    CHECK(r.cell.teamed_acc == 1.0);
    CHECK(realistic_team(f.view("base"), f.view("h"), 0.0, f).cell.teamed_acc == accuracy(f, "base"));
    CHECK(realistic_team(f.view("base"), f.view("h"), 1.0, f).cell.teamed_acc == accuracy(f, "h"));
    CHECK(code_of([&] { realistic_team(f.view("partner"), f.view("h"), 0.5, f); }) == ErrorCode::KindMismatch);
}

TEST_CASE("oracle teaming properties against brute force") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto f = generate(population(seed, 1000, 6, 3, 2));
        std::vector<ClassifierView> all;
        for (const auto& m : f.machines()) all.push_back(m.view());
        for (const auto& h : f.humans()) all.push_back(h.view());
        for (const auto& a : all) {
            for (const auto& b : all) {
                const auto ab = oracle_team(a, b, f).cell;
                const auto ba = oracle_team(b, a, f).cell;
                CHECK(ab.teamed_acc == oracle::union_accuracy(f, a, b));
                CHECK(ab.teamed_acc == ba.teamed_acc);
                CHECK(ab.teamed_acc >= std::max(ab.base_acc, ab.partner_acc));
                CHECK(ab.teamed_acc <= std::min(1.0, ab.base_acc + ab.partner_acc) + 1e-15);
            }
        }
    }
}

TEST_CASE("swap properties: mask consistency and recount identity") {
    const auto f = generate(population(8, 800, 5, 3, 2));
    const auto partner = f.view("h0");
    for (const auto& m : f.machines()) {
        const auto base = m.view();
        for (double eta : {0.0, 0.25, 0.37, 0.5, 0.8, 1.0}) {
            const auto r = realistic_team(base, partner, eta, f);
            long delta = 0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double mc = oracle::max_prob(base, i);
                CHECK(static_cast<bool>(r.composed.swap_mask[i]) == (mc <= eta));
                if (!r.composed.swap_mask[i]) continue;
                const bool base_ok = base.labels[i] == f.truth()[i];
                const bool partner_ok = partner.labels[i] == f.truth()[i];
                delta += static_cast<long>(partner_ok) - static_cast<long>(base_ok);
            }
            const double expected = accuracy(f, base) + static_cast<double>(delta) / static_cast<double>(f.size());
            CHECK(r.cell.teamed_acc == doctest::Approx(expected).epsilon(1e-12));
            CHECK(r.cell.teamed_acc == oracle::swap_accuracy(f, base, partner, eta));
        }
        const auto grid = default_eta_grid();
        const auto curve = swap_accuracy_curve(base, partner, grid, f);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            CHECK(curve[g] == realistic_team(base, partner, grid[g], f).cell.teamed_acc);
        }
    }
}

TEST_CASE("select_threshold examples") {
    const auto f = generate(population(4, 500, 5, 4, 1));
    std::vector<ClassifierView> bases;
    for (const auto& m : f.machines()) bases.push_back(m.view());
    const auto single = select_threshold(bases, f.view("h0"), {0.5}, 0.05, f);
    CHECK(single.eta_star == 0.5);
    CHECK(single.tests[0].zero_variance);
    CHECK(single.tests[0].retained);

    // Both bases are wrong at confidences 0.45-0.55 (partner right there) and
    // right above; the partner is wrong on the confident samples, so every
    // base peaks at eta = 0.6 and the low-eta differences are identical.
    std::vector<int> truth(6, 0);
    FrameBuilder b(3, truth);
    b.soft("a", {peaked(3, 1, 0.5), peaked(3, 1, 0.55), peaked(3, 0, 0.7), peaked(3, 0, 0.8), peaked(3, 0, 0.9), peaked(3, 0, 0.95)});
    b.soft("b", {peaked(3, 2, 0.45), peaked(3, 1, 0.55), peaked(3, 0, 0.65), peaked(3, 0, 0.85), peaked(3, 0, 0.9), peaked(3, 0, 0.99)});
    b.hard("p", {0, 0, 1, 1, 1, 1});
    const auto g = b.build();
    const std::vector<double> grid{0.4, 0.5, 0.6, 0.7, 0.8};
    const auto sel = select_threshold(views(g, {"a", "b"}), g.view("p"), grid, 0.05, g);
    CHECK(sel.eta_star == 0.6);
    CHECK(sel.tests[2].zero_variance);
    CHECK_FALSE(sel.fallback);

    CHECK(code_of([&] { select_threshold(views(g, {"a"}), g.view("p"), grid, 0.05, g); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { select_threshold(views(g, {"a", "b"}), g.view("p"), {}, 0.05, g); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { select_threshold(views(g, {"a", "b"}), g.view("p"), {0.5, 0.4}, 0.05, g); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("select_threshold matches the brute-force oracle") {
    const auto grid = default_eta_grid();
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto f = generate(population(seed, 300, 4, 5, 1));
        std::vector<ClassifierView> bases;
        for (const auto& m : f.machines()) bases.push_back(m.view());
        const auto sel = select_threshold(bases, f.view("h0"), grid, 0.05, f);
        CHECK(sel.eta_star == oracle::smallest_retained_eta(f, bases, f.view("h0"), grid, 0.05));
    }
}

TEST_CASE("best pair search examples") {
    // base correct on s0; p1 correct on s0,s1 (superset); p2 correct on s2.
    const auto f = FrameBuilder(2, {0, 0, 0, 0}).hard("base", {0, 1, 1, 1}).hard("p1", {0, 0, 1, 1}).hard("p2", {1, 1, 0, 1}).build();
    const std::vector<PartnerPool> self_only{{"model", views(f, {"base"})}};
    CHECK(code_of([&] { best_pair_search(f, views(f, {"base"}), self_only, TeamingMode::Oracle); }) == ErrorCode::EmptyPool);

    const std::vector<PartnerPool> pools{{"model", views(f, {"p2", "p1", "base"})}};
    const auto r = best_pair_search(f, views(f, {"base"}), pools, TeamingMode::Oracle);
    REQUIRE(r.best.size() == 1);
    // p1 and p2 both add one sample; ties go to the smaller id.
    CHECK(r.best[0].best_partner == "p1");
    CHECK(r.best[0].cell.boost == doctest::Approx(accuracy(f, "p1") - accuracy(f, "base")));
    CHECK(r.all_pairs.size() == 2);
    CHECK(r.all_pairs[0].partner_id == "p1");
    CHECK(code_of([&] { best_pair_search(f, views(f, {"base"}), pools, TeamingMode::Swap); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("teaming mode parsing") {
    CHECK(parse_teaming_mode("oracle") == TeamingMode::Oracle);
    CHECK(parse_teaming_mode("swap") == TeamingMode::Swap);
    CHECK(parse_teaming_mode("realistic") == TeamingMode::Swap);
    CHECK(code_of([] { parse_teaming_mode("x"); }) == ErrorCode::InvalidConfig);
}
