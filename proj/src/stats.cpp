#include "hmdiff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hmdiff/error.hpp"

namespace hmdiff {

namespace {

constexpr double kCfEpsilon = 1e-14;
constexpr double kCfTiny = 1e-300;
constexpr int kCfMaxIterations = 100000;

// Continued fraction for I_x(a, b), valid (fast) for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kCfTiny) d = kCfTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kCfTiny) d = kCfTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kCfTiny) c = kCfTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kCfTiny) d = kCfTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kCfTiny) c = kCfTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kCfEpsilon) return h;
    }
    throw Error(ErrorCode::InvalidArgument, "incomplete beta continued fraction did not converge");
}

// I_x(a, b) with y = 1 - x supplied separately so callers can avoid
// cancellation when x is close to 1.
double incomplete_beta_xy(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

void check_df(int df) {
    if (df < 1) throw Error(ErrorCode::InvalidArgument, "t distribution needs df >= 1, got " + std::to_string(df));
}

// P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
double two_sided_tail(double t, int df) {
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    const double denom = static_cast<double>(df) + t2;
    return incomplete_beta_xy(0.5 * df, 0.5, static_cast<double>(df) / denom, t2 / denom);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0 and x in [0,1]");
    }
    return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double t_cdf(double t, int df) {
    check_df(df);
    if (std::isnan(t)) throw Error(ErrorCode::InvalidArgument, "t_cdf of NaN");
    const double half_tail = 0.5 * two_sided_tail(t, df);
    return t < 0.0 ? half_tail : 1.0 - half_tail;
}

double t_two_sided_p(double t, int df) {
    check_df(df);
    return std::clamp(two_sided_tail(t, df), kPValueFloor, 1.0);
}

TTestResult paired_t_test(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw Error(ErrorCode::LengthMismatch, "paired t-test: " + std::to_string(xs.size()) + " vs " +
                                                   std::to_string(ys.size()) + " values");
    }
    const std::size_t n = xs.size();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "paired t-test needs at least 2 pairs");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = xs[i] - ys[i];
    if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); })) {
        throw Error(ErrorCode::ZeroVariance, "all paired differences are identical");
    }
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "paired differences have zero variance");

    TTestResult r;
    r.n = n;
    r.df = static_cast<int>(n - 1);
    r.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p_two_sided = t_two_sided_p(r.statistic, r.df);
    return r;
}

OlsFit ols_fit(std::span<const std::pair<double, double>> points) {
    const std::size_t n = points.size();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "OLS needs at least 2 points");
    double x_mean = 0.0, y_mean = 0.0;
    for (const auto& [x, y] : points) {
        x_mean += x;
        y_mean += y;
    }
    x_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    const bool constant_x = std::all_of(points.begin(), points.end(),
                                        [&](const auto& p) { return p.first == points.front().first; });
    if (constant_x || !(sxx > 0.0)) throw Error(ErrorCode::SingularDesign, "all x values are equal");

    OlsFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    for (const auto& [x, y] : points) {
        const double r = y - (fit.intercept + fit.slope * x);
        fit.ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? std::clamp(1.0 - fit.ss_res / syy, 0.0, 1.0) : 1.0;
    if (n < 3) return fit;

    const int df = static_cast<int>(n - 2);
    const double sigma2 = fit.ss_res / static_cast<double>(df);
    fit.slope_se = std::sqrt(sigma2 / sxx);
    fit.intercept_se = std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + x_mean * x_mean / sxx));
    auto p_of = [df](double coef, double se) {
        if (se > 0.0) return t_two_sided_p(coef / se, df);
        return coef == 0.0 ? 1.0 : kPValueFloor;
    };
    fit.slope_p = p_of(fit.slope, *fit.slope_se);
    fit.intercept_p = p_of(fit.intercept, *fit.intercept_se);
    return fit;
}

std::string_view to_string(Pooling pooling) { return pooling == Pooling::Cells ? "cells" : "pairs"; }

Pooling parse_pooling(std::string_view text) {
    if (text == "cells") return Pooling::Cells;
    if (text == "pairs") return Pooling::Pairs;
    throw Error(ErrorCode::InvalidConfig, "pooling must be cells|pairs, got '" + std::string(text) + "'");
}

CellSamples diag_offdiag_samples(const std::vector<ConfusionMatrix>& first,
                                 const std::vector<ConfusionMatrix>& second, bool diagonal,
                                 Pooling pooling) {
    if (first.empty() || second.empty()) {
        throw Error(ErrorCode::InvalidArgument, "matrix comparison needs two nonempty families");
    }
    const std::size_t k = first.front().num_classes();
    for (const auto* family : {&first, &second}) {
        for (const auto& m : *family) {
            if (m.num_classes() != k) throw Error(ErrorCode::InvalidArgument, "matrices differ in K");
        }
    }
    CellSamples out;
    auto selected = [diagonal](std::size_t p, std::size_t q) { return diagonal == (p == q); };

    if (pooling == Pooling::Cells) {
        auto family_mean = [](const std::vector<ConfusionMatrix>& family, std::size_t p,
                              std::size_t q) -> std::optional<double> {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& m : family) {
                if (m.row_empty(p)) continue;
                sum += m.cell(p, q);
                ++n;
            }
            if (n == 0) return std::nullopt;
            return sum / static_cast<double>(n);
        };
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = 0; q < k; ++q) {
                if (!selected(p, q)) continue;
                const auto a = family_mean(first, p, q);
                const auto b = family_mean(second, p, q);
                if (!a || !b) continue;
                out.first.push_back(*a);
                out.second.push_back(*b);
            }
        }
        return out;
    }

    for (const auto& m1 : first) {
        for (const auto& m2 : second) {
            for (std::size_t p = 0; p < k; ++p) {
                if (m1.row_empty(p) || m2.row_empty(p)) continue;
                for (std::size_t q = 0; q < k; ++q) {
                    if (!selected(p, q)) continue;
                    out.first.push_back(m1.cell(p, q));
                    out.second.push_back(m2.cell(p, q));
                }
            }
        }
    }
    return out;
}

DiagOffdiagResult diag_offdiag_test(const std::vector<ConfusionMatrix>& first,
                                    const std::vector<ConfusionMatrix>& second, Pooling pooling) {
    const CellSamples diag = diag_offdiag_samples(first, second, true, pooling);
    const CellSamples off = diag_offdiag_samples(first, second, false, pooling);
    return {paired_t_test(diag.first, diag.second), paired_t_test(off.first, off.second)};
}

Decision decide(double p, double alpha) {
    if (!(p >= 0.0 && p <= 1.0) || !(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "decide needs p and alpha in [0,1]");
    }
    return Decision{alpha, p < alpha};
}

}  // namespace hmdiff
