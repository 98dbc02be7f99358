#pragma once

// Independent numerical oracles for the statistics code, built on Boost
// rather than on anything in the library under test.

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

// Student-t density.
inline double t_pdf(double x, double df) {
    const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * M_PI);
    return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

// CDF by adaptive Gauss-Kronrod quadrature of the density from 0 to |t|.
inline double t_cdf_quadrature(double t, double df) {
    if (t == 0.0) return 0.5;
    auto f = [df](double x) { return t_pdf(x, df); };
    const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::abs(t), 15, 1e-13);
    return t > 0 ? 0.5 + half : 0.5 - half;
}

}  // namespace oracle

// ---- brute-force teaming oracles ---------------------------------------------------------

#include <algorithm>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "hmdiff/ingest.hpp"

namespace oracle {

inline double max_prob(const hmdiff::ClassifierView& v, std::size_t i) {
    double best = 0.0;
    for (std::size_t c = 0; c < v.num_classes; ++c) best = std::max(best, v.probs[i * v.num_classes + c]);
    return best;
}

// Swap accuracy by per-sample recount.
inline double swap_accuracy(const hmdiff::EvalFrame& frame, const hmdiff::ClassifierView& base,
                            const hmdiff::ClassifierView& partner, double eta) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const int label = max_prob(base, i) <= eta ? partner.labels[i] : base.labels[i];
        correct += label == frame.truth()[i];
    }
    return static_cast<double>(correct) / static_cast<double>(frame.size());
}

inline double union_accuracy(const hmdiff::EvalFrame& frame, const hmdiff::ClassifierView& a,
                             const hmdiff::ClassifierView& b) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        correct += a.labels[i] == frame.truth()[i] || b.labels[i] == frame.truth()[i];
    }
    return static_cast<double>(correct) / static_cast<double>(frame.size());
}

// Smallest eta whose paired t-test against the per-base best retains H0;
// falls back to the first eta with maximal mean accuracy.
inline double smallest_retained_eta(const hmdiff::EvalFrame& frame, const std::vector<hmdiff::ClassifierView>& bases,
                                    const hmdiff::ClassifierView& partner, const std::vector<double>& grid,
                                    double alpha) {
    const std::size_t nb = bases.size();
    std::vector<std::vector<double>> acc(nb, std::vector<double>(grid.size()));
    std::vector<double> best(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t g = 0; g < grid.size(); ++g) acc[b][g] = swap_accuracy(frame, bases[b], partner, grid[g]);
        best[b] = *std::max_element(acc[b].begin(), acc[b].end());
    }
    std::vector<double> means(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> d(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            d[b] = acc[b][g] - best[b];
            means[g] += acc[b][g];
        }
        const bool identical = std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; });
        bool retained;
        if (identical) {
            retained = d[0] == 0.0;
        } else {
            double mean = 0.0;
            for (double v : d) mean += v;
            mean /= static_cast<double>(nb);
            double ss = 0.0;
            for (double v : d) ss += (v - mean) * (v - mean);
            const double t = mean / (std::sqrt(ss / static_cast<double>(nb - 1)) / std::sqrt(static_cast<double>(nb)));
            const boost::math::students_t dist(static_cast<double>(nb - 1));
            const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
            retained = !(p < alpha);
        }
        if (retained) return grid[g];
    }
    return grid[static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin())];
}

}  // namespace oracle
