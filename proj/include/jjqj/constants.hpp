#pragma once

#include <numbers>

namespace jjqj {

/// Exact SI (CODATA 2018) values. Everything inside the library is SI with
/// angular frequencies; laboratory units only appear in the config layer.
struct PhysicalConstants {
    static constexpr double elementary_charge = 1.602176634e-19;  // C
    static constexpr double planck = 6.62607015e-34;              // J s
    static constexpr double hbar = planck / (2.0 * std::numbers::pi);
    static constexpr double boltzmann = 1.380649e-23;             // J/K
    static constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb
    static constexpr double resistance_quantum =
        planck / (4.0 * elementary_charge * elementary_charge);  // ~6.45 kOhm
};

inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace jjqj
