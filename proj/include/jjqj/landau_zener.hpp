#pragma once

// Direct integration of a two-level avoided crossing swept at constant rate,
// for comparison with the asymptotic Landau-Zener formula.

#include <algorithm>
#include <cmath>
#include <string>

#include "jjqj/constants.hpp"
#include "jjqj/errors.hpp"
#include "jjqj/hamiltonian.hpp"
#include "jjqj/physics.hpp"
#include "jjqj/propagator.hpp"

namespace jjqj {

struct LzIntegration {
    double probability = 0.0;  // population left in the starting diabatic state
    double coupling_scaled = 0.0;  // Omega_c / sqrt(a), a = energy_rate / hbar
    double half_span = 0.0;        // integration runs over scaled time [-half_span, half_span]
    std::uint64_t steps = 0;
};

/// Integrates i dpsi/dt = [[a t/2, Omega_c], [Omega_c, -a t/2]] psi from one
/// diabatic state, in scaled time tau = sqrt(a) t where the problem depends
/// only on g = Omega_c / sqrt(a).
inline LzIntegration landau_zener_numeric(double coupling, double energy_rate, double dtau = 0.01) {
    if (!(energy_rate > 0.0)) throw DomainError("landau_zener_numeric: sweep rate must be > 0");
    if (!(coupling >= 0.0)) throw DomainError("landau_zener_numeric: coupling must be >= 0");
    const double a = energy_rate / PhysicalConstants::hbar;
    const double g = coupling / std::sqrt(a);
    // The finite-time ripple in the diabatic population falls off like g / tau.
    const double span = std::max(400.0, 100.0 * g);
    const auto steps = static_cast<std::uint64_t>(std::ceil(2.0 * span / dtau));
    const double h = 2.0 * span / static_cast<double>(steps);

    ComplexVector<2> psi(1.0, 0.0);
    Matrix2 ham;
    ham(0, 1) = ham(1, 0) = g;
    for (std::uint64_t k = 0; k < steps; ++k) {
        const double tau = -span + (static_cast<double>(k) + 0.5) * h;
        ham(0, 0) = 0.5 * tau;
        ham(1, 1) = -0.5 * tau;
        psi = step_propagator<2>(ham, h) * psi;
    }
    return {std::clamp(std::norm(psi(0)), 0.0, 1.0), g, span, steps};
}

}  // namespace jjqj
