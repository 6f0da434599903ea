#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "jjqj/analysis.hpp"
#include "jjqj/oracle.hpp"

using namespace jjqj;

namespace {

Model bare(double rabi_mhz) {
    Model m;
    m.tls.coupling = 0.0;
    m.drive.microwave_amplitude = microwave_amplitude_for_rabi(m.junction, two_pi * rabi_mhz * 1e6,
                                                               two_pi * 9.02e9);
    return m;
}

RateSet sample_rates() {
    RateSet r;
    r.relaxation = 6e5;
    r.tunnel(BasisState::g0) = 1e3;
    r.tunnel(BasisState::g1) = 4e6;
    r.tunnel(BasisState::e0) = 3e4;
    r.tunnel(BasisState::e1) = 9e6;
    return r;
}

DensityMatrix<4> random_state(std::uint64_t seed) {
    RngStream rng(seed, 0);
    ComplexMatrix<4> a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    DensityMatrix<4> rho = a * a.adjoint();
    return rho / rho.trace().real();
}

}  // namespace

TEST(Oracle, ClosedFormRelaxation) {
    // Diagonal H, only gamma10: rho11 = exp(-g t), rho00 = 1 - exp(-g t).
    const Model m = bare(0.0);
    RateSet r;
    r.relaxation = 6e5;
    const auto rho = integrate_master_static<2>(m, 35.4e-6, r, {1e-6, 3e-6}, BasisState::g1);
    for (std::size_t k = 0; k < 2; ++k) {
        const double t = k == 0 ? 1e-6 : 3e-6;
        EXPECT_NEAR(rho[k](1, 1).real(), std::exp(-6e5 * t), 1e-8);
        EXPECT_NEAR(rho[k](0, 0).real(), 1.0 - std::exp(-6e5 * t), 1e-8);
    }
}

TEST(Oracle, UnitaryLimitConservesTrace) {
    const Model m = bare(10.0);
    const auto h = hamiltonian_4(m.junction, m.tls, m.drive, 35.6e-6, 0.0, Frame::rwa);
    const auto d = lindblad_rhs<4>(random_state(1), h, RateSet{});
    EXPECT_LT(std::abs(d.trace()), 1e-6);  // |H| ~ 1e9, so this is machine precision
    EXPECT_LT(std::abs(d.trace()) / h.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Oracle, TraceIdentityOfEscape) {
    const Model m = bare(10.0);
    const auto h = hamiltonian_4(m.junction, m.tls, m.drive, 35.6e-6, 0.0, Frame::rwa);
    const RateSet r = sample_rates();
    const auto rho = random_state(2);
    const auto d = lindblad_rhs<4>(rho, h, r);
    double expect = 0.0;
    for (auto s : {BasisState::g0, BasisState::g1, BasisState::e0, BasisState::e1})
        expect -= r.tunnel(s) * rho(index_of(s), index_of(s)).real();
    EXPECT_NEAR(d.trace().real(), expect, 1e-9 * std::abs(expect));
    EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-12 * d.cwiseAbs().maxCoeff());
}

TEST(Oracle, EffectiveHamiltonianIsNoJumpPart) {
    // L rho = -i (Heff rho - rho Heff^dagger) + jump feeding.
    const Model m = bare(10.0);
    const auto h = hamiltonian_4(m.junction, m.tls, m.drive, 35.6e-6, 0.0, Frame::rwa);
    const RateSet r = sample_rates();
    const auto rho = random_state(3);
    const auto heff = effective_hamiltonian<4>(h, r);
    const complex i(0.0, 1.0);
    DensityMatrix<4> expect = -i * (heff * rho - rho * heff.adjoint());
    expect(0, 0) += r.relaxation * rho(1, 1);
    expect(2, 2) += r.relaxation * rho(3, 3);
    EXPECT_LT((lindblad_rhs<4>(rho, h, r) - expect).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Oracle, NormalizationAndMonotoneSurvival) {
    const Model m = bare(10.0);
    const auto d = integrate_master<2>(m);  // default grid resolves the Rabi oscillation
    for (std::size_t k = 1; k < d.bias.size(); ++k) {
        EXPECT_LE(d.survival[k], d.survival[k - 1] + 1e-12);  // integrator tolerance is 1e-12 absolute
        EXPECT_GE(d.density[k], 0.0);
    }
    EXPECT_NEAR(d.survival.front(), 1.0, 1e-15);
    EXPECT_LT(d.normalization_defect(), 1e-6);
    EXPECT_LT(d.survival.back(), 1e-10);
}

TEST(Oracle, NoMicrowaveIsUnimodal) {
    const Model m = bare(0.0);
    MasterOptions o;
    o.grid_points = 2000;
    const auto d = integrate_master<2>(m, o);
    std::size_t maxima = 0;
    for (std::size_t k = 1; k + 1 < d.density.size(); ++k)
        if (d.density[k] > d.density[k - 1] && d.density[k] >= d.density[k + 1] && d.density[k] > 1e-3 * d.density[0] + 1.0)
            ++maxima;
    EXPECT_EQ(maxima, 1u);
}

TEST(Oracle, ResonantPeakNearResonanceCurrent) {
    const Model m = bare(10.0);
    MasterOptions o;
    o.grid_points = 2000;
    const auto d = integrate_master<2>(m, o);
    const double ires = resonance_current(m.junction, m.drive.microwave_frequency);
    // Densities at the resonance exceed those half a width below it, and there are two peaks.
    const auto peak = d.mode();
    EXPECT_NEAR(peak, ires, 0.01e-6);
    std::vector<std::uint64_t> coarse;
    const double w = 0.01e-6;
    for (double lo = 35.45e-6; lo < 35.85e-6; lo += w)
        coarse.push_back(static_cast<std::uint64_t>(1e6 * (d.survival_at(lo) - d.survival_at(lo + w))));
    const auto peaks = local_maxima(smooth3(coarse));
    EXPECT_EQ(peaks.size(), 2u);
}

TEST(Oracle, StaysPositiveAndHermitian) {
    Model m;
    m.drive.microwave_amplitude = microwave_amplitude_for_rabi(m.junction, two_pi * 10e6, two_pi * 9.02e9);
    m.junction.tls_critical_suppression = 5e-3;
    std::vector<double> eig;
    MasterOptions o;
    o.grid_points = 200;
    o.min_eigenvalues = &eig;
    const auto d = integrate_master<4>(m, o);
    ASSERT_FALSE(eig.empty());
    for (double e : eig) EXPECT_GE(e, -1e-10);
    EXPECT_GT(d.escaped_e(), 0.0);
    EXPECT_LE(d.escaped_e(), d.escaped() + 1e-9);
}

TEST(Oracle, LabAndRwaFramesAgreeOnShortWindow) {
    // Lab-frame integration resolves the 9 GHz carrier; keep the window short.
    Model m = bare(10.0);
    const double ires = resonance_current(m.junction, m.drive.microwave_frequency);
    RateSet r = rate_set(m.junction, ires);
    const std::vector<double> times{0.05e-6, 0.1e-6, 0.2e-6};
    const auto a = integrate_master_static<2>(m, ires, r, times, BasisState::g0, Frame::rwa);
    const auto b = integrate_master_static<2>(m, ires, r, times, BasisState::g0, Frame::lab);
    for (std::size_t k = 0; k < times.size(); ++k)
        EXPECT_NEAR(a[k](1, 1).real(), b[k](1, 1).real(), 0.02) << k;
}

TEST(Oracle, DistanceProperties) {
    const Model m = bare(0.0);
    MasterOptions o;
    o.grid_points = 2000;
    const auto d = integrate_master<2>(m, o);

    // Sample exactly from the distribution by inverting the survival function.
    auto sample = [&](std::size_t n) {
        std::vector<double> v;
        RngStream rng(9, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const double u = rng.uniform();
            std::size_t j = 0;
            while (j + 1 < d.survival.size() && 1.0 - d.survival[j + 1] < u) ++j;
            v.push_back(d.bias[j] + rng.uniform() * (d.bias[1] - d.bias[0]));
        }
        return v;
    };
    const double small = distribution_distance(histogram(sample(1000), 0.01e-6), d);
    const double large = distribution_distance(histogram(sample(40000), 0.01e-6), d);
    EXPECT_LT(large, small);
    EXPECT_LT(large, 0.03);

    const Histogram far = histogram(std::vector<double>{1e-6, 1.01e-6}, 0.01e-6);
    EXPECT_THROW(distribution_distance(far, d), DisjointSupportError);
    const Histogram off = histogram(std::vector<double>{35.36e-6}, 0.01e-6);
    EXPECT_NEAR(distribution_distance(off, d), 1.0, 1e-3);
}
