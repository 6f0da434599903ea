#include <numeric>

#include <gtest/gtest.h>

#include "jjqj/analysis.hpp"

using namespace jjqj;

namespace {

std::vector<SwitchRecord> records_from(const std::vector<double>& currents, const std::vector<int>& flags) {
    std::vector<SwitchRecord> out(currents.size());
    for (std::size_t k = 0; k < currents.size(); ++k) {
        out[k].ramp_index = k;
        out[k].switching_current = currents[k];
        out[k].flag_at_switch = flags[k];
    }
    return out;
}

/// Two well separated clusters following a label pattern, with a little jitter.
std::vector<double> two_branch_currents(const std::vector<int>& upper, std::uint64_t seed = 1) {
    RngStream rng(seed, 0);
    std::vector<double> v;
    for (int u : upper) v.push_back((u ? 35.60e-6 : 35.48e-6) + 0.01e-6 * (rng.uniform() - 0.5));
    return v;
}

}  // namespace

TEST(Analysis, HistogramSingleRecord) {
    const Histogram h = histogram(std::vector<double>{35.6e-6}, 0.01e-6);
    EXPECT_EQ(h.n_total, 1u);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}), 1u);
    EXPECT_EQ(std::count_if(h.counts.begin(), h.counts.end(), [](auto c) { return c > 0; }), 1);
}

TEST(Analysis, HistogramCountConservationProperty) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream rng(seed, 1);
        std::vector<double> v(1 + static_cast<std::size_t>(rng.uniform() * 500));
        for (auto& x : v) x = 35.3e-6 + 0.5e-6 * rng.uniform();
        const Histogram h = histogram(v, 0.003e-6 + 0.02e-6 * rng.uniform());
        EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}), v.size());
        for (std::size_t b = 1; b < h.bin_edges.size(); ++b) EXPECT_GT(h.bin_edges[b], h.bin_edges[b - 1]);
        EXPECT_LE(h.bin_edges.front(), *std::min_element(v.begin(), v.end()));
        EXPECT_GE(h.bin_edges.back(), *std::max_element(v.begin(), v.end()));
    }
}

TEST(Analysis, HistogramErrors) {
    EXPECT_THROW(histogram(std::vector<double>{}, 1.0), DomainError);
    EXPECT_THROW(histogram(std::vector<double>{1.0}, 0.0), DomainError);
}

TEST(Analysis, HalfOpenBins) {
    const Histogram h = histogram(std::vector<double>{0.0, 1.0, 1.5, 2.0}, 1.0, 0.0, 2.0);
    ASSERT_EQ(h.counts.size(), 3u);
    EXPECT_EQ(h.counts[0], 1u);
    EXPECT_EQ(h.counts[1], 2u);
    EXPECT_EQ(h.counts[2], 1u);
}

TEST(Analysis, AlternatingSequence) {
    std::vector<int> pattern;
    for (int k = 0; k < 40; ++k) pattern.push_back(k % 2);
    const auto s = classify_branches(two_branch_currents(pattern));
    EXPECT_EQ(s.jumps, 39u);
    for (auto d : s.dwell_upper) EXPECT_EQ(d, 1u);
    for (auto d : s.dwell_lower) EXPECT_EQ(d, 1u);
    EXPECT_DOUBLE_EQ(s.mean_dwell, 1.0);
    EXPECT_NEAR(jump_rate(s, 1e-2), 39.0 / (40 * 1e-2), 1e-12);
}

TEST(Analysis, ConstantSequenceIsUnimodal) {
    const std::vector<int> pattern(30, 1);
    EXPECT_THROW(classify_branches(two_branch_currents(pattern)), UnimodalSequenceError);
    EXPECT_THROW(classify_branches(std::vector<double>{}), UnimodalSequenceError);
}

TEST(Analysis, CloseModesAreUnimodal) {
    // Two clusters two bins apart.
    std::vector<double> v;
    for (int k = 0; k < 50; ++k) v.push_back(k % 2 ? 35.600e-6 : 35.610e-6);
    EXPECT_THROW(classify_branches(v), UnimodalSequenceError);
}

TEST(Analysis, DwellBookkeeping) {
    const std::vector<int> pattern{1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1};
    const auto s = classify_branches(two_branch_currents(pattern));
    const std::vector<std::uint64_t> up{3, 1, 2}, low{2, 4};
    EXPECT_EQ(s.dwell_upper, up);
    EXPECT_EQ(s.dwell_lower, low);
    EXPECT_EQ(s.jumps, 4u);
    const auto total = std::accumulate(up.begin(), up.end(), 0ull) + std::accumulate(low.begin(), low.end(), 0ull);
    EXPECT_EQ(total, pattern.size());
    EXPECT_EQ(s.jumps + 1, s.dwell_upper.size() + s.dwell_lower.size());
    EXPECT_DOUBLE_EQ(s.mean_dwell_upper, 2.0);
    EXPECT_DOUBLE_EQ(s.mean_dwell_lower, 3.0);
    EXPECT_DOUBLE_EQ(s.mean_dwell, 12.0 / 5.0);
    EXPECT_GT(s.mean_is_upper, s.mean_is_lower);
}

TEST(Analysis, ShiftInvariance) {
    std::vector<int> pattern;
    RngStream rng(4, 0);
    for (int k = 0; k < 300; ++k) pattern.push_back(rng.uniform() < 0.6);
    auto v = two_branch_currents(pattern, 5);
    const auto a = classify_branches(v);
    for (auto& x : v) x += 0.0123e-6;
    const auto b = classify_branches(v);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_NEAR(b.threshold - a.threshold, 0.0123e-6, 1e-15);
}

TEST(Analysis, FidelityIgnoresFlagsForLabels) {
    std::vector<int> pattern{1, 0, 0, 1, 1, 1, 0, 1, 0, 0};
    const auto v = two_branch_currents(pattern);
    std::vector<int> flags;
    for (int u : pattern) flags.push_back(u ? 0 : 1);
    auto recs = records_from(v, flags);
    EXPECT_DOUBLE_EQ(label_fidelity(recs), 1.0);
    recs[2].flag_at_switch = 0;
    const auto s = classify_branches(recs);
    EXPECT_EQ(s.labels[2], BranchLabel::lower);
    EXPECT_DOUBLE_EQ(label_fidelity(recs, s), 0.9);
}

TEST(Analysis, JumpRateEdgeCases) {
    BranchStats s;
    s.labels.assign(10, BranchLabel::upper);
    EXPECT_EQ(jump_rate(s, 1.0), 0.0);
    EXPECT_THROW(jump_rate(s, 0.0), DomainError);
}

TEST(Analysis, SmoothingAndPeaks) {
    const std::vector<std::uint64_t> c{0, 3, 0, 0, 0, 6, 6, 0};
    const auto y = smooth3(c);
    EXPECT_DOUBLE_EQ(y[0], 1.5);
    EXPECT_DOUBLE_EQ(y[1], 1.0);
    EXPECT_DOUBLE_EQ(y[7], 3.0);
    const auto p = local_maxima(y);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0], 0u);
    EXPECT_EQ(p[1], 5u);
}

TEST(Analysis, BootstrapSeparatesShiftedSamples) {
    std::vector<std::uint64_t> a, b;
    RngStream rng(8, 0);
    for (int k = 0; k < 400; ++k) {
        a.push_back(1 + static_cast<std::uint64_t>(6 * rng.uniform()));
        b.push_back(2 + static_cast<std::uint64_t>(6 * rng.uniform()));
    }
    const auto ci = bootstrap_mean_difference(a, b, 2000);
    EXPECT_GT(ci.lo, 0.0);
    EXPECT_LT(ci.lo, ci.estimate);
    EXPECT_GT(ci.hi, ci.estimate);
    EXPECT_NEAR(ci.estimate, 1.0, 0.4);
    const auto same = bootstrap_mean_difference(a, a, 2000);
    EXPECT_LT(same.lo, 0.0);
    EXPECT_GT(same.hi, 0.0);
    EXPECT_THROW(bootstrap_mean_difference(std::vector<std::uint64_t>{}, a), DomainError);
}
