#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "errors.hpp"

namespace avf {

struct GroupStats {
    std::string label;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation
};

template <class Range>
GroupStats summarize(const Range& xs, std::string label = {}) {
    GroupStats g;
    g.label = std::move(label);
    for (double x : xs) {
        ++g.n;
        g.mean += x;
    }
    if (g.n == 0) return g;
    g.mean /= static_cast<double>(g.n);
    double ss = 0.0;
    for (double x : xs) ss += (x - g.mean) * (x - g.mean);
    g.sd = g.n > 1 ? std::sqrt(ss / static_cast<double>(g.n - 1)) : 0.0;
    return g;
}

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

inline WelchResult welch_t_test(const GroupStats& g1, const GroupStats& g2) {
    if (g1.n < 2 || g2.n < 2) throw PreconditionError("each group needs at least two samples");
    if (g1.sd < 0.0 || g2.sd < 0.0) throw PreconditionError("standard deviation must be non-negative");
    const double v1 = g1.sd * g1.sd / static_cast<double>(g1.n);
    const double v2 = g2.sd * g2.sd / static_cast<double>(g2.n);
    const double diff = g1.mean - g2.mean;
    const double se2 = v1 + v2;
    if (se2 == 0.0) {
        if (diff == 0.0) throw DegenerateGroupError("both groups have zero spread and equal means");
        return {diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::quiet_NaN(), 0.0};
    }
    WelchResult r;
    r.t = diff / std::sqrt(se2);
    const double d1 = g1.n > 1 ? v1 * v1 / static_cast<double>(g1.n - 1) : 0.0;
    const double d2 = g2.n > 1 ? v2 * v2 / static_cast<double>(g2.n - 1) : 0.0;
    r.df = se2 * se2 / (d1 + d2);
    if (r.t == 0.0) {
        r.p = 1.0;
        return r;
    }
    const boost::math::students_t_distribution<double> dist(r.df);
    r.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 0.0, 1.0);
    return r;
}

template <class Range>
WelchResult welch_t_test(const Range& a, const Range& b) {
    return welch_t_test(summarize(a), summarize(b));
}

} // namespace avf
