#pragma once

// Closed-form physics of a current-biased junction in the cubic-well
// approximation: plasma frequency, barrier height, level splitting and the
// incoherent rates (relaxation, escape) as functions of the bias current.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "jjqj/constants.hpp"
#include "jjqj/errors.hpp"

namespace jjqj {

/// TLS branch. |e> couples to the smaller critical current.
enum class Branch : int { g = 0, e = 1 };

/// Junction level inside the well.
enum class Level : int { ground = 0, excited = 1 };

/// Product basis {|0g>, |1g>, |0e>, |1e>}; the 2-level model uses the first two.
enum class BasisState : int { g0 = 0, g1 = 1, e0 = 2, e1 = 3 };

constexpr BasisState basis_state(Level level, Branch branch) noexcept {
    return static_cast<BasisState>(2 * static_cast<int>(branch) + static_cast<int>(level));
}
constexpr Branch branch_of(BasisState s) noexcept {
    return static_cast<int>(s) >= 2 ? Branch::e : Branch::g;
}
constexpr Level level_of(BasisState s) noexcept {
    return static_cast<int>(s) % 2 == 0 ? Level::ground : Level::excited;
}
constexpr int index_of(BasisState s) noexcept { return static_cast<int>(s); }

inline const char* to_string(BasisState s) noexcept {
    switch (s) {
        case BasisState::g0: return "0g";
        case BasisState::g1: return "1g";
        case BasisState::e0: return "0e";
        case BasisState::e1: return "1e";
    }
    return "?";
}

enum class TunnelingMode { analytic, quadrature };

inline constexpr double default_tls_suppression = 5.0e-3;

struct JunctionParams {
    double critical_current = 35.9e-6;   // A
    double capacitance = 4.0e-12;        // F
    double shunt_resistance = 1.0 / (0.6e6 * 4.0e-12);  // Ohm, gives gamma10 = 0.6/us at T = 0
    double temperature = 0.018;          // K
    double tls_critical_suppression = default_tls_suppression;  // eta

    void validate() const {
        if (!(critical_current > 0.0)) throw DomainError("critical_current must be > 0");
        if (!(capacitance > 0.0)) throw DomainError("capacitance must be > 0");
        if (!(shunt_resistance > 0.0)) throw DomainError("shunt_resistance must be > 0");
        if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
        if (!(tls_critical_suppression >= 0.0 && tls_critical_suppression < 1.0))
            throw DomainError("tls_critical_suppression must lie in [0, 1)");
    }

    double effective_critical_current(Branch b) const noexcept {
        return b == Branch::g ? critical_current
                              : critical_current * (1.0 - tls_critical_suppression);
    }
};

/// Classical bias: dc ramp plus a microwave tone.
struct BiasDrive {
    double dc_start = 35.3e-6;            // A
    double ramp_rate = 4.5e-3;            // A/s
    double microwave_amplitude = 0.0;     // A
    double microwave_frequency = two_pi * 9.02e9;  // rad/s

    void validate(const JunctionParams& p) const {
        if (!(ramp_rate > 0.0)) throw DomainError("ramp_rate must be > 0");
        if (!(microwave_amplitude >= 0.0)) throw DomainError("microwave_amplitude must be >= 0");
        if (!(microwave_frequency > 0.0)) throw DomainError("microwave_frequency must be > 0");
        if (!(dc_start < p.critical_current)) throw DomainError("dc_start must be below the critical current");
    }

    double bias_at(double t) const noexcept { return dc_start + ramp_rate * t; }
};

/// All incoherent rates at one bias point, in 1/s.
struct RateSet {
    double relaxation = 0.0;                // gamma10, |1> -> |0> on either branch
    std::array<double, 4> tunneling{};      // escape from each BasisState
    double tls_relaxation = 0.0;            // |e> -> |g>, zero unless configured

    double tunnel(BasisState s) const noexcept { return tunneling[static_cast<std::size_t>(s)]; }
    double& tunnel(BasisState s) noexcept { return tunneling[static_cast<std::size_t>(s)]; }
};

namespace detail {

inline void check_bias(const JunctionParams& p, double bias, Branch branch) {
    if (!(bias >= 0.0))
        throw DomainError("bias current must be >= 0, got " + std::to_string(bias));
    if (bias > p.effective_critical_current(branch))
        throw DomainError("bias current " + std::to_string(bias) +
                          " A exceeds the effective critical current");
}

inline double reduced_headroom(const JunctionParams& p, double bias, Branch branch) {
    return 1.0 - bias / p.effective_critical_current(branch);
}

}  // namespace detail

/// Small-oscillation frequency at the bottom of the tilted well (rad/s).
inline double plasma_frequency(const JunctionParams& p, double bias, Branch branch = Branch::g) {
    detail::check_bias(p, bias, branch);
    const double i0 = p.effective_critical_current(branch);
    const double w0 = std::sqrt(two_pi * i0 / (PhysicalConstants::flux_quantum * p.capacitance));
    return std::sqrt(std::numbers::sqrt2) * w0 * std::sqrt(std::sqrt(detail::reduced_headroom(p, bias, branch)));
}

/// Barrier height of the cubic well (J).
inline double barrier_height(const JunctionParams& p, double bias, Branch branch = Branch::g) {
    detail::check_bias(p, bias, branch);
    const double i0 = p.effective_critical_current(branch);
    return (2.0 * std::numbers::sqrt2 * i0 * PhysicalConstants::flux_quantum / (3.0 * std::numbers::pi)) *
           (detail::reduced_headroom(p, bias, branch) * std::sqrt(detail::reduced_headroom(p, bias, branch)));
}

/// Barrier in units of the plasma quantum, dU / (hbar w_p).
inline double barrier_in_quanta(const JunctionParams& p, double bias, Branch branch = Branch::g) {
    return barrier_height(p, bias, branch) / (PhysicalConstants::hbar * plasma_frequency(p, bias, branch));
}

/// |0> -> |1> transition frequency with the anharmonic correction (rad/s).
inline double level_splitting(const JunctionParams& p, double bias, Branch branch = Branch::g) {
    const double wp = plasma_frequency(p, bias, branch);
    const double du = barrier_height(p, bias, branch);
    if (!(du > 0.0)) throw DomainError("level_splitting: barrier vanished");
    const double w10 = wp * (1.0 - (5.0 / 36.0) * PhysicalConstants::hbar * wp / du);
    if (!(w10 > 0.0)) throw DomainError("level_splitting: well too shallow for two levels");
    return w10;
}

/// Bias current at which level_splitting equals `target` (rad/s).
inline double resonance_current(const JunctionParams& p, double target, Branch branch = Branch::g) {
    if (!(target > 0.0)) throw NoBracketError("resonance_current: target frequency must be > 0");
    const double i0 = p.effective_critical_current(branch);
    const double w_zero_bias = level_splitting(p, 0.0, branch);
    if (target > w_zero_bias)
        throw NoBracketError("resonance_current: target above the zero-bias splitting");
    if (target == w_zero_bias) return 0.0;

    // The splitting reaches zero where dU/(hbar w_p) = 5/36; that ratio scales as headroom^(5/4).
    const double r0 = barrier_in_quanta(p, 0.0, branch);
    const double headroom_min = std::pow((5.0 / 36.0) / r0, 0.8);
    if (headroom_min >= 1.0) throw NoBracketError("resonance_current: junction has no two-level well");
    const double upper = i0 * (1.0 - headroom_min * (1.0 + 1e-9));

    auto f = [&](double bias) { return level_splitting(p, bias, branch) - target; };
    if (f(upper) > 0.0) throw NoBracketError("resonance_current: target below the attainable splitting");

    std::uintmax_t iterations = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(
        f, 0.0, upper, f(0.0), f(upper), boost::math::tools::eps_tolerance<double>(52), iterations);
    const double bias = 0.5 * (lo + hi);
    if (std::abs(f(bias)) > 1e-10 * target)
        throw NumericalError("resonance_current: root did not converge");
    return bias;
}

/// |<0|delta|1>|^2 for a harmonic well of mass C (Phi0/2pi)^2.
inline double phase_matrix_element_squared(const JunctionParams& p, double bias) {
    const double e = PhysicalConstants::elementary_charge;
    return 2.0 * e * e / (PhysicalConstants::hbar * level_splitting(p, bias) * p.capacitance);
}

/// Energy relaxation rate gamma10 (1/s). Reduces to 1/(RC) at T = 0.
inline double relaxation_rate(const JunctionParams& p, double bias) {
    const double w10 = level_splitting(p, bias);
    double thermal = 2.0;  // 1 + coth(inf)
    if (p.temperature > 0.0) {
        const double x = PhysicalConstants::hbar * w10 / (2.0 * PhysicalConstants::boltzmann * p.temperature);
        thermal = 1.0 + 1.0 / std::tanh(x);
    }
    return (w10 / two_pi) * (PhysicalConstants::resistance_quantum / p.shunt_resistance) * thermal *
           phase_matrix_element_squared(p, bias);
}

/// Finite escape rate used once a level no longer sits below the barrier.
inline double saturation_rate(const JunctionParams& p, Branch branch = Branch::g) {
    return plasma_frequency(p, 0.0, branch) / two_pi;
}

namespace detail {

/// WKB attempt period and under-barrier action for the zero-point level of a
/// cubic well, in units hbar = m = w_p = 1. `barrier` is dU / (hbar w_p).
struct CubicWellWkb {
    double action = 0.0;  // S_f / hbar
    double period = 0.0;  // T * w_p
};

inline CubicWellWkb cubic_well_wkb(double barrier) {
    // U(y) = y^2/2 - b y^3 has its maximum U = 1/(54 b^2) at y = 1/(3b).
    const double b = std::sqrt(1.0 / (54.0 * barrier));
    const double energy = 0.5;
    auto excess = [b, energy](double y) { return 0.5 * y * y - b * y * y * y - energy; };

    const auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto root = [&](double lo, double hi) {
        std::uintmax_t it = 200;
        auto [a, c] = boost::math::tools::toms748_solve(excess, lo, hi, tol, it);
        return 0.5 * (a + c);
    };
    const double y_top = 1.0 / (3.0 * b);
    const double y1 = root(-2.0, 0.0);
    const double y2 = root(0.0, y_top);
    const double y3 = root(y_top, 1.0 / b);

    // U - E = -b (y - y1)(y - y2)(y - y3); the factored form keeps the
    // integrands accurate next to the turning points.
    boost::math::quadrature::tanh_sinh<double> integrator;
    constexpr double rel_tol = 1e-10;
    double err = 0.0, l1 = 0.0;

    auto forbidden = [&](double y) {
        return std::sqrt(2.0 * b * std::max(0.0, (y - y1) * (y - y2) * (y3 - y)));
    };
    const double action = integrator.integrate(forbidden, y2, y3, rel_tol, &err, &l1);
    if (!(err <= 1e-8 * std::abs(action)))
        throw NumericalError("tunneling quadrature: action integral did not converge");

    // y = y1 + (y2 - y1) sin^2(th) removes both inverse-square-root endpoints.
    auto allowed = [&](double th) {
        const double s = std::sin(th);
        return 2.0 / std::sqrt(2.0 * b * (y3 - y1 - (y2 - y1) * s * s));
    };
    const double half_period = integrator.integrate(allowed, 0.0, 0.5 * std::numbers::pi, rel_tol, &err, &l1);
    if (!(err <= 1e-8 * std::abs(half_period)))
        throw NumericalError("tunneling quadrature: period integral did not converge");

    return {action, 2.0 * half_period};
}

}  // namespace detail

/// Escape rate out of `level` on `branch` (1/s).
///
/// Both modes treat the excited level as the ground level of a well whose
/// barrier is lowered by one plasma quantum. The analytic mode is the
/// cubic-well closed form; the quadrature mode evaluates (1/T) exp(-2 S_f/hbar)
/// numerically. Rates are capped at saturation_rate(), which is also returned
/// once the level is no longer bound.
inline double tunneling_rate(const JunctionParams& p, double bias, Level level, Branch branch = Branch::g,
                             TunnelingMode mode = TunnelingMode::analytic) {
    if (!(bias >= 0.0)) throw DomainError("tunneling_rate: bias current must be >= 0");
    const double cap = saturation_rate(p, branch);
    if (bias >= p.effective_critical_current(branch)) return cap;

    const double wp = plasma_frequency(p, bias, branch);
    const double quantum = PhysicalConstants::hbar * wp;
    const double barrier = (barrier_height(p, bias, branch) - static_cast<int>(level) * quantum) / quantum;
    if (barrier <= 0.0) return cap;

    double rate = 0.0;
    if (mode == TunnelingMode::analytic) {
        rate = (wp / two_pi) * std::sqrt(120.0 * std::numbers::pi * 7.2 * barrier) * std::exp(-7.2 * barrier);
    } else {
        if (barrier <= 0.5) return cap;  // zero-point level above the barrier top
        const auto wkb = detail::cubic_well_wkb(barrier);
        rate = wp * std::exp(-2.0 * wkb.action) / wkb.period;
    }
    return std::min(rate, cap);
}

inline RateSet rate_set(const JunctionParams& p, double bias, TunnelingMode mode = TunnelingMode::analytic,
                        double tls_relaxation = 0.0) {
    RateSet r;
    r.relaxation = relaxation_rate(p, bias);
    for (Branch b : {Branch::g, Branch::e})
        for (Level l : {Level::ground, Level::excited})
            r.tunnel(basis_state(l, b)) = tunneling_rate(p, bias, l, b, mode);
    r.tls_relaxation = tls_relaxation;
    return r;
}

/// Drive matrix element Omega_m = I_uw / sqrt(2 hbar w10 C) (rad/s).
inline double rabi_frequency(const JunctionParams& p, double microwave_amplitude, double bias) {
    return microwave_amplitude * std::sqrt(1.0 / (2.0 * PhysicalConstants::hbar * level_splitting(p, bias) * p.capacitance));
}

/// Inverse of rabi_frequency at a known splitting.
inline double microwave_amplitude_for_rabi(const JunctionParams& p, double rabi, double splitting) {
    return rabi * std::sqrt(2.0 * PhysicalConstants::hbar * splitting * p.capacitance);
}

}  // namespace jjqj
