#pragma once

// Test-side oracles, independent of the library's computation paths.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "ncerg/dyadic.hpp"

namespace oracle {

// Classical scalar stopping construction on the dyadic grid: q_n(x) = 1 when
// every coarser average of f starting at level n stays <= lambda on x's cell.
struct ScalarStop {
    int m_lambda = 0;
    // level -> (cell start -> 0/1)
    std::vector<std::map<long, int>> q;
};

inline ScalarStop scalar_cuculescu(const std::map<long, double>& f, double lambda,
                                   int window) {
    auto mean_at = [&](int level, long start) {
        const long w = 1L << level;
        double s = 0;
        for (long pos = start; pos < start + w; ++pos) {
            auto it = f.find(pos);
            if (it != f.end()) s += it->second;
        }
        return s / static_cast<double>(w);
    };
    int m = 0;
    for (;; ++m) {
        const long w = 1L << m;
        double top = 0;
        for (long start = 0; start < (1L << std::max(window, m)); start += w)
            top = std::max(top, mean_at(m, start));
        if (top <= lambda + 1e-12) break;
        if (m > 40) break;
    }
    ScalarStop out;
    out.m_lambda = m;
    out.q.resize(static_cast<size_t>(m) + 1);
    const long span = 1L << std::max(window, m);
    for (int n = m; n >= 0; --n) {
        const long w = 1L << n;
        for (long start = 0; start < span; start += w) {
            int keep = 1;
            for (int level = n; level < m; ++level) {
                const long lw = 1L << level;
                const long lstart = (start / lw) * lw;
                if (mean_at(level, lstart) > lambda + 1e-12) keep = 0;
            }
            out.q[static_cast<size_t>(n)][start] = keep;
        }
    }
    return out;
}

// Classical dyadic oscillation sup for one scalar sequence over [0, 2^K).
inline double scalar_bmo(const std::vector<double>& values) {
    const long n = static_cast<long>(values.size());
    double best = 0;
    for (long w = 1; w <= n; w <<= 1) {
        for (long start = 0; start + w <= n; start += w) {
            double mean = 0;
            for (long i = start; i < start + w; ++i) mean += values[static_cast<size_t>(i)];
            mean /= static_cast<double>(w);
            double osc = 0;
            for (long i = start; i < start + w; ++i) {
                const double d = values[static_cast<size_t>(i)] - mean;
                osc += d * d;
            }
            best = std::max(best, osc / static_cast<double>(w));
        }
    }
    return std::sqrt(best);
}

// Dense-grid lower bound for the weak quasi-norm sup.
inline double weak_norm_grid(const ncerg::Element& x, double p, int grid) {
    const double top = ncerg::lp_norm(x, ncerg::PExp::infinity()).value;
    double best = 0;
    for (int i = 1; i <= grid; ++i) {
        const double lam = top * static_cast<double>(i) / (grid + 1.0);
        if (lam <= 0) continue;
        best = std::max(best, lam * std::pow(ncerg::distribution(x, lam), 1.0 / p));
    }
    return best;
}

} // namespace oracle
