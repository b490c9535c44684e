#pragma once

// Dynamic scatter subregion identification: thresholding on the real part
// of the current solution, stability tracking of the active-cell count,
// and the mask-update schedule.

#include "ipdnn/types.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

namespace ipdnn {

// B(i,j) = 1 iff Re(eps(i,j)) >= mu + 3 sigma, with mu, sigma the mean and
// population standard deviation of the smallest ceil(0.3 N) real-part
// values over the full DOI.
inline BinaryMask threshold_mask(const PermittivityMap& eps)
{
    const int n = eps.n_side();
    const int N = n * n;
    std::vector<double> v(N);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v[i * n + j] = eps.values(i, j).real();
    std::sort(v.begin(), v.end());
    const int k = static_cast<int>(std::ceil(0.3 * N));
    double mu = 0.0;
    for (int q = 0; q < k; ++q) mu += v[q];
    mu /= k;
    double var = 0.0;
    for (int q = 0; q < k; ++q) var += (v[q] - mu) * (v[q] - mu);
    const double sigma = std::sqrt(var / k);
    const double thr = mu + 3.0 * sigma;

    // slack absorbs accumulation error in mu so a uniform map stays fully
    // active instead of flipping on the rounding direction
    const double tol = 1e-12 * std::max(1.0, std::abs(mu));
    BinaryMask b(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b.bits(i, j) = eps.values(i, j).real() >= thr - tol;
    return b;
}

// Ring buffer of recent C_B values. Stability uses the closed interval
// |C_B - mu_C| <= sigma_C evaluated against the buffer before insertion
// (an open interval can never fire once the count settles, sigma_C = 0).
struct StabilityTracker {
    int window = 5;
    std::deque<int> history;

    double mean() const
    {
        double s = 0.0;
        for (int v : history) s += v;
        return history.empty() ? 0.0 : s / history.size();
    }

    double stddev() const
    {
        if (history.empty()) return 0.0;
        const double mu = mean();
        double var = 0.0;
        for (int v : history) var += (v - mu) * (v - mu);
        return std::sqrt(var / history.size()); // population
    }
};

inline bool stability_update(StabilityTracker& t, int c_b)
{
    bool stable = false;
    if (static_cast<int>(t.history.size()) >= t.window)
        stable = std::abs(c_b - t.mean()) <= t.stddev();
    t.history.push_back(c_b);
    while (static_cast<int>(t.history.size()) > t.window) t.history.pop_front();
    return stable;
}

// First update unions with B^(0) so the true support cannot be dropped;
// later updates replace the mask outright.
inline BinaryMask update_mask(const BinaryMask& current, const BinaryMask& b_k,
                              const BinaryMask& b_0, bool is_first_update, bool* kept_current = nullptr)
{
    if (kept_current) *kept_current = false;
    if (is_first_update) {
        BinaryMask u = b_0.union_with(b_k);
        if (u.empty()) throw std::invalid_argument("update_mask: empty union");
        return u;
    }
    if (b_k.empty()) {
        if (kept_current) *kept_current = true;
        return current; // degenerate input, keep going with what we have
    }
    return b_k;
}

enum class ScheduleAction { none, threshold_only, threshold_and_maybe_update };

inline ScheduleAction schedule(int iter, int threshold_period = 100, int min_update_iter = 500)
{
    if (iter <= 0 || iter % threshold_period != 0) return ScheduleAction::none;
    return iter >= min_update_iter ? ScheduleAction::threshold_and_maybe_update
                                   : ScheduleAction::threshold_only;
}

} // namespace ipdnn
