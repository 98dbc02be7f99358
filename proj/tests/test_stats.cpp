#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "hmdiff/error.hpp"
#include "hmdiff/stats.hpp"
#include "oracles.hpp"

using namespace hmdiff;

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

ConfusionMatrix diag_matrix(const std::vector<double>& diag, std::int64_t scale = 1000) {
    // Row p: diag[p] on the diagonal, the rest on the next class.
    const std::size_t k = diag.size();
    std::vector<std::int64_t> counts(k * k, 0);
    for (std::size_t p = 0; p < k; ++p) {
        const auto d = static_cast<std::int64_t>(std::llround(diag[p] * static_cast<double>(scale)));
        counts[p * k + p] = d;
        counts[p * k + (p + 1) % k] = scale - d;
    }
    return ConfusionMatrix::from_counts(k, counts);
}

}  // namespace

TEST_CASE("incomplete beta agrees with an independent implementation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ab(0.05, 60.0);
    std::uniform_real_distribution<double> xs(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = ab(rng);
        const double b = ab(rng);
        const double x = xs(rng);
        CHECK(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-11));
    }
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("t_cdf examples") {
    for (int df : {1, 2, 5, 30, 200}) CHECK(t_cdf(0.0, df) == 0.5);
    CHECK(std::abs(t_cdf(1e6, 10) - 1.0) < 1e-10);
    CHECK(code_of([] { t_cdf(1.0, 0); }) == ErrorCode::InvalidArgument);

    const double p = 2.0 * (1.0 - oracle::t_cdf_quadrature(2.0, 10.0));
    CHECK(std::abs(t_two_sided_p(2.0, 10) - p) <= 1e-9);
    CHECK(std::abs(2.0 * (1.0 - t_cdf(2.0, 10)) - p) <= 1e-9);
}

TEST_CASE("t_cdf matches quadrature and boost on a grid") {
    for (int df : {1, 2, 3, 7, 19, 50, 120, 200}) {
        for (double t = -30.0; t <= 30.0; t += 1.7) {
            const double q = oracle::t_cdf_quadrature(t, df);
            CHECK(std::abs(t_cdf(t, df) - q) <= 1e-9);
            const boost::math::students_t dist(df);
            CHECK(std::abs(t_cdf(t, df) - boost::math::cdf(dist, t)) <= 1e-12);
        }
    }
}

TEST_CASE("t_cdf symmetry and monotonicity") {
    for (int df = 1; df <= 200; df += 7) {
        for (double t = 0.0; t <= 50.0; t += 0.37) CHECK(std::abs(t_cdf(t, df) + t_cdf(-t, df) - 1.0) <= 1e-10);
    }
    for (int df : {1, 4, 60}) {
        double prev = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double t = -60.0 + 120.0 * i / 9999.0;
            const double c = t_cdf(t, df);
            CHECK(c >= prev);
            prev = c;
        }
    }
}

TEST_CASE("two-sided p is floored, never exactly zero") {
    CHECK(t_two_sided_p(1e200, 3) >= kPValueFloor);
    CHECK(t_two_sided_p(0.0, 3) == doctest::Approx(1.0));
}

TEST_CASE("paired t-test examples") {
    const std::vector<double> xs{1, 2, 3};
    const std::vector<double> ys{0, 0, 0};
    const auto r = paired_t_test(xs, ys);
    CHECK(std::abs(r.statistic - 2.0 * std::sqrt(3.0)) <= 1e-12);
    CHECK(r.df == 2);
    CHECK(r.n == 3);
    const auto flipped = paired_t_test(ys, xs);
    CHECK(flipped.statistic == -r.statistic);
    CHECK(flipped.p_two_sided == r.p_two_sided);

    CHECK(code_of([&] { paired_t_test(xs, xs); }) == ErrorCode::ZeroVariance);
    CHECK(code_of([&] { paired_t_test(xs, std::vector<double>{1, 2}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { paired_t_test(std::vector<double>{1}, std::vector<double>{0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("paired t-test p-value against boost students_t") {
    const std::vector<double> xs{0.81, 0.77, 0.92, 0.85, 0.88, 0.79};
    const std::vector<double> ys{0.80, 0.70, 0.90, 0.86, 0.84, 0.75};
    const auto r = paired_t_test(xs, ys);
    const boost::math::students_t dist(5);
    CHECK(r.p_two_sided == doctest::Approx(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)))).epsilon(1e-10));
}

TEST_CASE("paired t-test is invariant to a common shift") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> xs(20);
    std::vector<double> ys(20);
    for (std::size_t i = 0; i < 20; ++i) {
        xs[i] = nd(rng);
        ys[i] = nd(rng);
    }
    const auto base = paired_t_test(xs, ys);
    for (auto& x : xs) x += 7.25;
    for (auto& y : ys) y += 7.25;
    const auto shifted = paired_t_test(xs, ys);
    CHECK(shifted.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
}

TEST_CASE("ols examples") {
    const std::vector<std::pair<double, double>> two{{0, 0}, {1, 1}};
    const auto f2 = ols_fit(two);
    CHECK(std::abs(f2.slope - 1.0) <= 1e-12);
    CHECK(std::abs(f2.intercept) <= 1e-12);
    CHECK_FALSE(f2.slope_p.has_value());

    const std::vector<std::pair<double, double>> flat{{0, 1}, {1, 1}, {2, 1}};
    const auto ff = ols_fit(flat);
    CHECK(std::abs(ff.slope) <= 1e-12);
    CHECK(std::abs(ff.intercept - 1.0) <= 1e-12);
    REQUIRE(ff.slope_p.has_value());
    CHECK(*ff.slope_p == 1.0);

    const std::vector<std::pair<double, double>> constant_x{{1, 0}, {1, 1}, {1, 2}};
    CHECK(code_of([&] { ols_fit(constant_x); }) == ErrorCode::SingularDesign);
}

TEST_CASE("ols exact-fit recovery and normal-equation identities") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = u(rng);
        const double b = u(rng);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 12; ++i) {
            const double x = u(rng);
            pts.emplace_back(x, a * x + b);
        }
        const auto fit = ols_fit(pts);
        CHECK(std::abs(fit.slope - a) <= 1e-12 * std::max(1.0, std::abs(a)) * 10);
        CHECK(std::abs(fit.intercept - b) <= 1e-12 * std::max(1.0, std::abs(b)) * 10);
        CHECK(fit.ss_res <= 1e-20);

        std::vector<std::pair<double, double>> noisy;
        for (const auto& [x, y] : pts) noisy.emplace_back(x, y + u(rng));
        const auto nf = ols_fit(noisy);
        double sum_r = 0.0;
        double sum_rx = 0.0;
        for (const auto& [x, y] : noisy) {
            const double r = y - (nf.intercept + nf.slope * x);
            sum_r += r;
            sum_rx += r * x;
        }
        CHECK(std::abs(sum_r) <= 1e-9);
        CHECK(std::abs(sum_rx) <= 1e-9);
        CHECK(nf.r2 >= 0.0);
        CHECK(nf.r2 <= 1.0);
    }
}

TEST_CASE("ols slope p-value matches the t distribution") {
    const std::vector<std::pair<double, double>> pts{{0, 0.1}, {1, 0.9}, {2, 2.3}, {3, 2.8}, {4, 4.2}};
    const auto fit = ols_fit(pts);
    const double t = fit.slope / *fit.slope_se;
    const boost::math::students_t dist(3);
    CHECK(*fit.slope_p == doctest::Approx(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))).epsilon(1e-10));
}

TEST_CASE("diag/offdiag test examples") {
    const std::vector<ConfusionMatrix> c1{diag_matrix({0.8, 0.8, 0.8})};
    const std::vector<ConfusionMatrix> c2{diag_matrix({0.7, 0.75, 0.85})};
    CHECK(code_of([&] { diag_offdiag_test(c1, c1); }) == ErrorCode::ZeroVariance);

    const auto samples = diag_offdiag_samples(c1, c2, true, Pooling::Cells);
    REQUIRE(samples.first.size() == 3);
    // Spreadsheet-style oracle: d = [.1, .05, -.05], mean 1/30, sd by hand.
    const double d[] = {0.1, 0.05, -0.05};
    const double mean = (d[0] + d[1] + d[2]) / 3.0;
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double expected = mean / (std::sqrt(ss / 2.0) / std::sqrt(3.0));
    const auto r = paired_t_test(samples.first, samples.second);
    CHECK(r.statistic == doctest::Approx(expected).epsilon(1e-9));

    // Constant positive shift with cross-cell variation: statistic positive.
    const std::vector<ConfusionMatrix> hi{diag_matrix({0.9, 0.8, 0.7, 0.6})};
    const std::vector<ConfusionMatrix> lo{diag_matrix({0.8, 0.7, 0.6, 0.5}), diag_matrix({0.8, 0.7, 0.6, 0.5})};
    const auto shifted = diag_offdiag_samples(hi, lo, true, Pooling::Cells);
    double dsum = 0.0;
    for (std::size_t i = 0; i < shifted.first.size(); ++i) dsum += shifted.first[i] - shifted.second[i];
    CHECK(dsum > 0.0);
}

TEST_CASE("diag/offdiag pooling modes") {
    const std::vector<ConfusionMatrix> a{diag_matrix({0.9, 0.8, 0.7}), diag_matrix({0.6, 0.8, 0.9})};
    const std::vector<ConfusionMatrix> b{diag_matrix({0.5, 0.5, 0.5})};
    const auto cells = diag_offdiag_samples(a, b, true, Pooling::Cells);
    CHECK(cells.first.size() == 3);
    CHECK(cells.first[0] == doctest::Approx(0.75));
    const auto pairs = diag_offdiag_samples(a, b, true, Pooling::Pairs);
    CHECK(pairs.first.size() == 6);
    const auto off = diag_offdiag_samples(a, b, false, Pooling::Cells);
    CHECK(off.first.size() == 6);
    CHECK(parse_pooling("pairs") == Pooling::Pairs);
}

TEST_CASE("decide boundary convention") {
    CHECK(decide(0.0005, 0.05).reject_null);
    CHECK_FALSE(decide(0.0555, 0.05).reject_null);
    CHECK_FALSE(decide(0.05, 0.05).reject_null);
    CHECK(decide(0.01).alpha == 0.05);
}
