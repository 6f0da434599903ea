#pragma once

// Deterministic ensemble reference: the Lindblad master equation whose
// unraveling is the jump engine, integrated along the ramp. Escape removes
// population (trace decreases), and the escape flux over the ramp rate is the
// switching-current density.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "jjqj/engine.hpp"
#include "jjqj/errors.hpp"
#include "jjqj/hamiltonian.hpp"
#include "jjqj/physics.hpp"

namespace jjqj {

template <int Dim>
using DensityMatrix = ComplexMatrix<Dim>;

/// d rho/dt for coherent part H (rad/s), relaxation |0x><1x| at gamma10,
/// optional TLS relaxation, and non-refeeding escape from each basis state.
template <int Dim>
DensityMatrix<Dim> lindblad_rhs(const DensityMatrix<Dim>& rho, const ComplexMatrix<Dim>& h, const RateSet& r) {
    static_assert(Dim == 2 || Dim == 4);
    const complex i(0.0, 1.0);
    DensityMatrix<Dim> d = -i * (h * rho - rho * h);

    // Jump part: L rho L^dagger feeds the target diagonal from the source diagonal.
    // Anticommutator part: -1/2 {L^dagger L, rho} with L^dagger L = |source><source|.
    std::array<double, Dim> loss{};
    for (Channel c : all_channels) {
        if (!channel_exists<Dim>(c)) continue;
        const double rate = channel_rate(c, r);
        if (rate == 0.0) continue;
        const int src = index_of(source_of(c));
        loss[src] += rate;
        if (kind_of(c) == JumpKind::relax) {
            const int dst = index_of(target_of(c));
            d(dst, dst) += rate * rho(src, src);
        }
    }
    for (int a = 0; a < Dim; ++a)
        for (int b = 0; b < Dim; ++b) d(a, b) -= 0.5 * (loss[a] + loss[b]) * rho(a, b);
    return d;
}

struct SwitchingDistribution {
    std::vector<double> bias;      // A, uniform grid
    std::vector<double> density;   // 1/A
    std::vector<double> survival;  // probability of no escape yet
    std::vector<double> density_e; // part of `density` escaping from the e branch, 1/A

    /// Probability of escaping from the e branch (TLS flag 1).
    double escaped_e() const {
        double sum = 0.0;
        for (std::size_t k = 1; k < bias.size(); ++k) sum += 0.5 * (density_e[k] + density_e[k - 1]) * (bias[k] - bias[k - 1]);
        return sum;
    }

    double escaped() const { return 1.0 - survival.back(); }

    /// |integral of density + final survival - 1|, with composite Simpson on the grid.
    double normalization_defect() const {
        const std::size_t n = bias.size();
        if (n < 3) throw DomainError("normalization_defect: grid too short");
        const double h = (bias.back() - bias.front()) / static_cast<double>(n - 1);
        const std::size_t even = (n - 1) % 2 == 0 ? n - 1 : n - 2;  // intervals covered by Simpson
        double sum = density[0] + density[even];
        for (std::size_t k = 1; k < even; ++k) sum += (k % 2 ? 4.0 : 2.0) * density[k];
        double integral = sum * h / 3.0;
        if (even != n - 1) integral += 0.5 * h * (density[n - 2] + density[n - 1]);
        return std::abs(integral + survival.back() - 1.0);
    }

    /// Survival at an arbitrary bias, linear between grid points, clamped outside.
    double survival_at(double i) const {
        if (i <= bias.front()) return survival.front();
        if (i >= bias.back()) return survival.back();
        const double step = (bias.back() - bias.front()) / static_cast<double>(bias.size() - 1);
        const auto k = std::min(static_cast<std::size_t>((i - bias.front()) / step), bias.size() - 2);
        const double f = (i - bias[k]) / (bias[k + 1] - bias[k]);
        return survival[k] + f * (survival[k + 1] - survival[k]);
    }

    /// Grid point with the largest density.
    double mode() const {
        return bias[static_cast<std::size_t>(std::max_element(density.begin(), density.end()) - density.begin())];
    }
};

struct MasterOptions {
    Frame frame = Frame::rwa;
    std::size_t grid_points = 20000;
    double bias_end = 0.0;  // 0 means the g-branch critical current
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    TunnelingMode tunneling_mode = TunnelingMode::analytic;
    BasisState initial = BasisState::g0;
    bool populations_only = false;  // debug: rate equations (coherences zeroed each evaluation)
    std::vector<double>* min_eigenvalues = nullptr;  // receives the smallest eigenvalue of rho at every grid point
};

namespace detail {

template <int Dim>
using PackedRho = std::array<double, 2 * Dim * Dim>;

template <int Dim>
DensityMatrix<Dim> unpack(const PackedRho<Dim>& x) {
    DensityMatrix<Dim> rho;
    for (int k = 0; k < Dim * Dim; ++k) rho(k / Dim, k % Dim) = complex(x[2 * k], x[2 * k + 1]);
    return rho;
}

template <int Dim>
void pack(const DensityMatrix<Dim>& rho, PackedRho<Dim>& x) {
    for (int k = 0; k < Dim * Dim; ++k) {
        const complex v = rho(k / Dim, k % Dim);
        x[2 * k] = v.real();
        x[2 * k + 1] = v.imag();
    }
}

}  // namespace detail

/// Integrates the master equation from rho = |initial><initial| at dc_start and reports
/// survival and escape density on a uniform bias grid from dc_start to the
/// critical current (or opts.bias_end).
template <int Dim>
SwitchingDistribution integrate_master(const Model& m, const MasterOptions& opts = {}) {
    namespace ode = boost::numeric::odeint;
    m.validate();
    if (opts.grid_points < 2) throw ConfigError("master equation grid needs at least 2 points");
    const double end = opts.bias_end > 0.0 ? opts.bias_end : m.junction.critical_current;
    if (!(end > m.drive.dc_start)) throw DomainError("integrate_master: empty bias range");

    const auto provider = physical_rates(m, opts.tunneling_mode);
    const double limit = coherent_bias_limit(m.junction);
    const double ramp = m.drive.ramp_rate;

    auto rhs = [&](const detail::PackedRho<Dim>& x, detail::PackedRho<Dim>& dxdt, double t) {
        const double bias = m.drive.bias_at(t);
        DensityMatrix<Dim> rho = detail::unpack<Dim>(x);
        if (opts.populations_only) rho = DensityMatrix<Dim>(rho.diagonal().asDiagonal());
        const auto h = detail::coherent_hamiltonian<Dim>(m, std::min(bias, limit), t, opts.frame);
        detail::pack<Dim>(lindblad_rhs<Dim>(rho, h, provider(bias)), dxdt);
    };

    SwitchingDistribution out;
    out.bias.resize(opts.grid_points);
    out.density.assign(opts.grid_points, 0.0);
    out.survival.assign(opts.grid_points, 0.0);
    out.density_e.assign(opts.grid_points, 0.0);
    const double step = (end - m.drive.dc_start) / static_cast<double>(opts.grid_points - 1);
    for (std::size_t k = 0; k < opts.grid_points; ++k) out.bias[k] = m.drive.dc_start + step * static_cast<double>(k);

    detail::PackedRho<Dim> x{};
    if (Dim == 2 && branch_of(opts.initial) != Branch::g) throw ConfigError("a bare junction has no e branch");
    x[2 * (index_of(opts.initial) * Dim + index_of(opts.initial))] = 1.0;
    auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<detail::PackedRho<Dim>>());
    stepper.initialize(x, 0.0, 1e-10);

    auto record = [&](std::size_t k, const detail::PackedRho<Dim>& state) {
        const DensityMatrix<Dim> rho = detail::unpack<Dim>(state);
        const RateSet r = provider(out.bias[k]);
        double flux = 0.0, flux_e = 0.0;
        for (int s = 0; s < Dim; ++s) {
            // Populations of order -1e-16 appear in the far tail from integration noise.
            const double f = r.tunnel(static_cast<BasisState>(s)) * std::max(0.0, rho(s, s).real());
            flux += f;
            if (s >= 2) flux_e += f;
        }
        out.survival[k] = std::max(0.0, rho.trace().real());
        out.density[k] = flux / ramp;
        out.density_e[k] = flux_e / ramp;
        if (opts.min_eigenvalues) {
            Eigen::SelfAdjointEigenSolver<DensityMatrix<Dim>> es(0.5 * (rho + rho.adjoint()));
            opts.min_eigenvalues->push_back(es.eigenvalues().minCoeff());
        }
    };
    record(0, x);

    std::size_t steps = 0;
    for (std::size_t k = 1; k < opts.grid_points; ++k) {
        const double t_target = (out.bias[k] - m.drive.dc_start) / ramp;
        while (stepper.current_time() < t_target) {
            stepper.do_step(rhs);
            if (++steps > 100'000'000) throw NumericalError("integrate_master: step budget exhausted");
        }
        detail::PackedRho<Dim> xk;
        stepper.calc_state(t_target, xk);
        record(k, xk);
        // Once everything has escaped the rest of the grid is zero.
        if (out.survival[k] < 1e-15) {
            for (std::size_t j = k + 1; j < opts.grid_points; ++j) out.survival[j] = out.survival[k];
            break;
        }
    }
    return out;
}

inline SwitchingDistribution integrate_master(const Model& m, int dimension, const MasterOptions& opts = {}) {
    return dimension == 2 ? integrate_master<2>(m, opts) : integrate_master<4>(m, opts);
}

/// Constant-bias master-equation populations at `times` (s); used to check the
/// unraveling against trajectory averages.
template <int Dim>
std::vector<DensityMatrix<Dim>> integrate_master_static(const Model& m, double bias, const RateSet& rates,
                                                        const std::vector<double>& times,
                                                        BasisState initial = BasisState::g0,
                                                        Frame frame = Frame::rwa) {
    namespace ode = boost::numeric::odeint;
    const double limit = coherent_bias_limit(m.junction);
    auto rhs = [&](const detail::PackedRho<Dim>& x, detail::PackedRho<Dim>& dxdt, double t) {
        const auto h = detail::coherent_hamiltonian<Dim>(m, std::min(bias, limit), t, frame);
        detail::pack<Dim>(lindblad_rhs<Dim>(detail::unpack<Dim>(x), h, rates), dxdt);
    };
    detail::PackedRho<Dim> x{};
    x[2 * (index_of(initial) * Dim + index_of(initial))] = 1.0;
    std::vector<DensityMatrix<Dim>> out;
    double t = 0.0;
    for (double target : times) {
        if (target > t)
            ode::integrate_adaptive(ode::make_controlled(1e-12, 1e-10, ode::runge_kutta_dopri5<detail::PackedRho<Dim>>()),
                                    rhs, x, t, target, std::min(1e-10, target - t));
        t = target;
        out.push_back(detail::unpack<Dim>(x));
    }
    return out;
}

/// Total-variation distance between a histogram of switching currents and the
/// distribution's escape probability over the same bins. Both sides are
/// normalized to the escaped fraction; distribution mass outside the
/// histogram's range is counted as one extra bin.
template <class Hist>
double distribution_distance(const Hist& h, const SwitchingDistribution& dist) {
    if (h.n_total == 0) throw DomainError("distribution_distance: empty histogram");
    const double lo = h.bin_edges.front();
    const double hi = h.bin_edges.back();
    if (hi < dist.bias.front() || lo > dist.bias.back())
        throw DisjointSupportError("distribution_distance: histogram and distribution do not overlap");
    const double total = dist.escaped();
    if (!(total > 0.0)) throw DisjointSupportError("distribution_distance: distribution has no escape");
    double tv = 0.0;
    double inside = 0.0;
    for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b) {
        const double q = (dist.survival_at(h.bin_edges[b]) - dist.survival_at(h.bin_edges[b + 1])) / total;
        const double p = static_cast<double>(h.counts[b]) / static_cast<double>(h.n_total);
        inside += q;
        tv += std::abs(p - q);
    }
    tv += std::max(0.0, 1.0 - inside);
    return std::clamp(0.5 * tv, 0.0, 1.0);
}

}  // namespace jjqj
