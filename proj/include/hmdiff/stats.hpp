#pragma once

// Student-t distribution, paired t-test, simple OLS with coefficient
// p-values, and the diagonal / off-diagonal confusion-matrix comparison.

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hmdiff/metrics.hpp"

namespace hmdiff {

inline constexpr double kPValueFloor = 1e-300;
inline constexpr double kDefaultAlpha = 0.05;

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

// CDF of Student's t with `df` degrees of freedom. Throws InvalidArgument for df < 1.
double t_cdf(double t, int df);

// P(|T| >= |t|), floored at kPValueFloor.
double t_two_sided_p(double t, int df);

struct TTestResult {
    double statistic = 0.0;
    int df = 0;
    double p_two_sided = 1.0;
    std::size_t n = 0;
};

// t = mean(d) / (sd(d) / sqrt(n)), d = xs - ys, sd with n-1 denominator.
// Throws LengthMismatch, InvalidArgument (n < 2), ZeroVariance (all d equal).
TTestResult paired_t_test(std::span<const double> xs, std::span<const double> ys);

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::optional<double> slope_p;      // nullopt when n < 3
    std::optional<double> intercept_p;  // nullopt when n < 3
    std::optional<double> slope_se;
    std::optional<double> intercept_se;
    std::size_t n = 0;
    double r2 = 0.0;
    double ss_res = 0.0;
};

// y = intercept + slope * x. Throws SingularDesign for constant x,
// InvalidArgument for n < 2.
OlsFit ols_fit(std::span<const std::pair<double, double>> points);

// How the two families of confusion matrices enter the paired test.
// Cells: average each family cellwise, then pair cell positions.
// Pairs: every (m1, m2) across families contributes one pair per cell.
enum class Pooling { Cells, Pairs };
std::string_view to_string(Pooling pooling);
Pooling parse_pooling(std::string_view text);

struct DiagOffdiagResult {
    TTestResult diag;
    TTestResult offdiag;
};

struct CellSamples {
    std::vector<double> first;
    std::vector<double> second;
};

// Paired observations the test would use. Cells from an empty matrix row are
// skipped; positions with no data in either family are dropped.
CellSamples diag_offdiag_samples(const std::vector<ConfusionMatrix>& first,
                                 const std::vector<ConfusionMatrix>& second, bool diagonal,
                                 Pooling pooling);

DiagOffdiagResult diag_offdiag_test(const std::vector<ConfusionMatrix>& first,
                                    const std::vector<ConfusionMatrix>& second,
                                    Pooling pooling = Pooling::Cells);

struct Decision {
    double alpha = kDefaultAlpha;
    bool reject_null = false;
};

// Rejects iff p < alpha; p == alpha retains the null.
Decision decide(double p, double alpha = kDefaultAlpha);

}  // namespace hmdiff
