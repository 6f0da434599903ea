#pragma once

// Observables from switching records: histograms, upper/lower branch labels
// of a telegraph sequence, dwell statistics, and bootstrap intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "jjqj/engine.hpp"
#include "jjqj/errors.hpp"
#include "jjqj/rng.hpp"

namespace jjqj {

struct Histogram {
    std::vector<double> bin_edges;  // A, uniform, strictly increasing
    std::vector<std::uint64_t> counts;
    std::uint64_t n_total = 0;

    double bin_width() const { return bin_edges[1] - bin_edges[0]; }
    double bin_center(std::size_t b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
};

/// Uniform bins of `bin_width` starting at `lo`; every value must lie in [lo, hi].
inline Histogram histogram(const std::vector<double>& values, double bin_width, double lo, double hi) {
    if (values.empty()) throw DomainError("histogram: no values");
    if (!(bin_width > 0.0)) throw DomainError("histogram: bin width must be > 0");
    const auto n_bins = static_cast<std::size_t>(std::floor((hi - lo) / bin_width)) + 1;
    Histogram h;
    h.bin_edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b) h.bin_edges[b] = lo + bin_width * static_cast<double>(b);
    h.counts.assign(n_bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
        b = std::min(b, n_bins - 1);
        ++h.counts[b];
    }
    h.n_total = values.size();
    return h;
}

/// Bins covering [min, max] of the values, half-open [lo, hi).
inline Histogram histogram(const std::vector<double>& values, double bin_width) {
    if (values.empty()) throw DomainError("histogram: no values");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    return histogram(values, bin_width, *mn, *mx);
}

inline std::vector<double> switching_currents(const std::vector<SwitchRecord>& records) {
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(r.switching_current);
    return v;
}

inline Histogram histogram(const std::vector<SwitchRecord>& records, double bin_width) {
    return histogram(switching_currents(records), bin_width);
}

/// Three-bin moving average; edge bins average over the bins that exist.
inline std::vector<double> smooth3(const std::vector<std::uint64_t>& counts) {
    std::vector<double> out(counts.size(), 0.0);
    for (std::size_t b = 0; b < counts.size(); ++b) {
        double sum = 0.0;
        int n = 0;
        for (std::size_t j = (b == 0 ? 0 : b - 1); j <= std::min(b + 1, counts.size() - 1); ++j, ++n)
            sum += static_cast<double>(counts[j]);
        out[b] = sum / n;
    }
    return out;
}

/// Indices of local maxima of a smoothed histogram (plateaus report their first bin).
inline std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
    std::vector<std::size_t> peaks;
    const std::size_t n = y.size();
    for (std::size_t b = 0; b < n; ++b) {
        if (y[b] <= 0.0) continue;
        if (b > 0 && !(y[b] > y[b - 1])) continue;
        std::size_t e = b;
        while (e + 1 < n && y[e + 1] == y[b]) ++e;
        if (e + 1 < n && y[e + 1] > y[b]) continue;
        peaks.push_back(b);
    }
    return peaks;
}

enum class BranchLabel { upper, lower };

inline const char* to_string(BranchLabel b) noexcept { return b == BranchLabel::upper ? "upper" : "lower"; }

struct BranchStats {
    std::vector<BranchLabel> labels;
    double threshold = 0.0;    // A
    double mode_upper = 0.0;   // A
    double mode_lower = 0.0;   // A
    std::vector<std::uint64_t> dwell_upper;
    std::vector<std::uint64_t> dwell_lower;
    double mean_dwell_upper = 0.0;
    double mean_dwell_lower = 0.0;
    double mean_dwell = 0.0;  // over all runs of both branches
    std::uint64_t jumps = 0;
    double mean_is_upper = 0.0;  // A
    double mean_is_lower = 0.0;  // A
};

inline constexpr double classification_bin_width = 0.005e-6;  // A

/// Two modes of the smoothed histogram: the tallest peak, and the tallest other
/// peak at least 3 bins away whose valley towards the first drops below half
/// its own height. Returns bin indices (lower, upper).
inline std::pair<std::size_t, std::size_t> dominant_modes(const std::vector<double>& y) {
    const auto peaks = local_maxima(y);
    if (peaks.empty()) throw UnimodalSequenceError("classify_branches: empty histogram");
    const std::size_t first = *std::max_element(peaks.begin(), peaks.end(), [&](auto a, auto b) { return y[a] < y[b]; });
    std::size_t second = y.size();
    for (std::size_t p : peaks) {
        const std::size_t gap = p > first ? p - first : first - p;
        if (gap < 3) continue;
        const auto [lo, hi] = std::minmax(p, first);
        const double valley = *std::min_element(y.begin() + static_cast<std::ptrdiff_t>(lo),
                                                y.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        if (!(valley < 0.5 * y[p])) continue;
        if (second == y.size() || y[p] > y[second]) second = p;
    }
    if (second == y.size())
        throw UnimodalSequenceError("classify_branches: only one switching-current mode found");
    return std::minmax(first, second);
}

/// Run lengths of consecutive equal labels, split by branch.
inline void dwell_runs(const std::vector<BranchLabel>& labels, std::vector<std::uint64_t>& upper,
                       std::vector<std::uint64_t>& lower) {
    upper.clear();
    lower.clear();
    std::size_t k = 0;
    while (k < labels.size()) {
        std::size_t e = k;
        while (e < labels.size() && labels[e] == labels[k]) ++e;
        (labels[k] == BranchLabel::upper ? upper : lower).push_back(e - k);
        k = e;
    }
}

inline double mean_of(const std::vector<std::uint64_t>& v) {
    if (v.empty()) return 0.0;
    return static_cast<double>(std::accumulate(v.begin(), v.end(), std::uint64_t{0})) / static_cast<double>(v.size());
}

/// Dwell statistics for a given labeling.
inline BranchStats branch_stats(std::vector<BranchLabel> labels, const std::vector<double>& currents,
                                double threshold) {
    BranchStats s;
    s.labels = std::move(labels);
    s.threshold = threshold;
    dwell_runs(s.labels, s.dwell_upper, s.dwell_lower);
    s.mean_dwell_upper = mean_of(s.dwell_upper);
    s.mean_dwell_lower = mean_of(s.dwell_lower);
    s.mean_dwell = static_cast<double>(s.labels.size()) / static_cast<double>(s.dwell_upper.size() + s.dwell_lower.size());
    s.jumps = s.dwell_upper.size() + s.dwell_lower.size() - 1;
    double su = 0.0, sl = 0.0;
    std::size_t nu = 0, nl = 0;
    for (std::size_t k = 0; k < currents.size(); ++k) {
        if (s.labels[k] == BranchLabel::upper) {
            su += currents[k];
            ++nu;
        } else {
            sl += currents[k];
            ++nl;
        }
    }
    s.mean_is_upper = nu ? su / static_cast<double>(nu) : 0.0;
    s.mean_is_lower = nl ? sl / static_cast<double>(nl) : 0.0;
    return s;
}

/// Labels each switching current upper or lower against the midpoint of the
/// two histogram modes. Engine flags are not consulted.
inline BranchStats classify_branches(const std::vector<double>& currents) {
    if (currents.empty()) throw UnimodalSequenceError("classify_branches: empty sequence");
    const Histogram h = histogram(currents, classification_bin_width);
    const auto y = smooth3(h.counts);
    const auto [lo, hi] = dominant_modes(y);
    const double mode_lower = h.bin_center(lo);
    const double mode_upper = h.bin_center(hi);
    const double threshold = 0.5 * (mode_lower + mode_upper);
    std::vector<BranchLabel> labels;
    labels.reserve(currents.size());
    for (double i : currents) labels.push_back(i > threshold ? BranchLabel::upper : BranchLabel::lower);
    BranchStats s = branch_stats(std::move(labels), currents, threshold);
    s.mode_lower = mode_lower;
    s.mode_upper = mode_upper;
    return s;
}

inline BranchStats classify_branches(const std::vector<SwitchRecord>& records) {
    return classify_branches(switching_currents(records));
}

/// Fraction of records whose measured branch matches the engine flag (upper = g, lower = e).
inline double label_fidelity(const std::vector<SwitchRecord>& records, const BranchStats& stats) {
    if (records.size() != stats.labels.size()) throw DomainError("label_fidelity: size mismatch");
    std::size_t agree = 0;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const BranchLabel expected = records[k].flag_at_switch == 0 ? BranchLabel::upper : BranchLabel::lower;
        agree += stats.labels[k] == expected;
    }
    return static_cast<double>(agree) / static_cast<double>(records.size());
}

inline double label_fidelity(const std::vector<SwitchRecord>& records) {
    return label_fidelity(records, classify_branches(records));
}

/// Branch changes per unit time.
inline double jump_rate(const BranchStats& stats, double ramp_period) {
    if (!(ramp_period > 0.0)) throw DomainError("jump_rate: ramp period must be > 0");
    if (stats.labels.empty()) return 0.0;
    return static_cast<double>(stats.jumps) / (static_cast<double>(stats.labels.size()) * ramp_period);
}

struct BootstrapInterval {
    double estimate = 0.0;  // statistic on the original samples
    double lo = 0.0;        // 2.5 % percentile
    double hi = 0.0;        // 97.5 % percentile
};

/// Percentile bootstrap of mean(b) - mean(a), resampling each set independently.
template <class T>
BootstrapInterval bootstrap_mean_difference(const std::vector<T>& a, const std::vector<T>& b,
                                            std::size_t resamples = 10000, std::uint64_t seed = 7) {
    if (a.empty() || b.empty()) throw DomainError("bootstrap: empty sample");
    auto mean = [](const std::vector<T>& v) {
        double s = 0.0;
        for (const T& x : v) s += static_cast<double>(x);
        return s / static_cast<double>(v.size());
    };
    RngStream rng(seed, 0);
    auto resampled_mean = [&](const std::vector<T>& v) {
        double s = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(v.size()));
            s += static_cast<double>(v[std::min(idx, v.size() - 1)]);
        }
        return s / static_cast<double>(v.size());
    };
    std::vector<double> diffs(resamples);
    for (auto& d : diffs) {
        const double ma = resampled_mean(a);
        d = resampled_mean(b) - ma;
    }
    std::sort(diffs.begin(), diffs.end());
    auto pct = [&](double q) {
        const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1)));
        return diffs[k];
    };
    return {mean(b) - mean(a), pct(0.025), pct(0.975)};
}

}  // namespace jjqj
