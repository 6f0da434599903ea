#pragma once

// Hamiltonians of the bare junction (basis {|0>, |1>}) and of the junction
// coupled to a two-level defect (basis {|0g>, |1g>, |0e>, |1e>}), stored as
// H/hbar in rad/s, in the lab frame or the frame rotating at the drive.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "jjqj/constants.hpp"
#include "jjqj/errors.hpp"
#include "jjqj/physics.hpp"

namespace jjqj {

using complex = std::complex<double>;

template <int Dim>
using ComplexMatrix = Eigen::Matrix<complex, Dim, Dim>;
template <int Dim>
using ComplexVector = Eigen::Matrix<complex, Dim, 1>;

using Matrix2 = ComplexMatrix<2>;
using Matrix4 = ComplexMatrix<4>;

struct TlsParams {
    double frequency = two_pi * 8.7e9;  // w_TLS, rad/s
    double coupling = two_pi * 200e6;   // Omega_c, rad/s
    double relaxation = 0.0;            // |e> -> |g>, 1/s; off unless configured

    void validate() const {
        if (!(frequency > 0.0)) throw DomainError("TLS frequency must be > 0");
        if (!(coupling >= 0.0)) throw DomainError("TLS coupling must be >= 0");
        if (!(relaxation >= 0.0)) throw DomainError("TLS relaxation rate must be >= 0");
    }

    /// Measured couplings usually fall between 20 and 200 MHz.
    bool coupling_in_typical_range() const noexcept {
        const double f = coupling / two_pi;
        return f >= 20e6 * (1.0 - 1e-9) && f <= 200e6 * (1.0 + 1e-9);
    }
};

enum class Frame { lab, rwa };

inline const char* to_string(Frame f) noexcept { return f == Frame::lab ? "lab" : "rwa"; }

inline Matrix2 hamiltonian_2(const JunctionParams& p, const BiasDrive& d, double bias, double t, Frame frame) {
    const double w10 = level_splitting(p, bias);
    const double rabi = rabi_frequency(p, d.microwave_amplitude, bias);
    Matrix2 h = Matrix2::Zero();
    if (frame == Frame::lab) {
        const double drive = rabi * std::cos(d.microwave_frequency * t);
        h(0, 1) = h(1, 0) = drive;
        h(1, 1) = w10;
    } else {
        h(0, 1) = h(1, 0) = 0.5 * rabi;
        h(1, 1) = w10 - d.microwave_frequency;
    }
    return h;
}

/// In the rotating frame the basis states carry 0, 1, 1, 2 drive quanta.
inline Matrix4 hamiltonian_4(const JunctionParams& p, const TlsParams& tls, const BiasDrive& d, double bias,
                             double t, Frame frame) {
    const double w10 = level_splitting(p, bias);
    const double rabi = rabi_frequency(p, d.microwave_amplitude, bias);
    Matrix4 h = Matrix4::Zero();
    double drive = 0.0;
    if (frame == Frame::lab) {
        drive = rabi * std::cos(d.microwave_frequency * t);
        h(1, 1) = w10;
        h(2, 2) = tls.frequency;
        h(3, 3) = w10 + tls.frequency;
    } else {
        drive = 0.5 * rabi;
        const double detuning = w10 - d.microwave_frequency;
        const double tls_detuning = tls.frequency - d.microwave_frequency;
        h(1, 1) = detuning;
        h(2, 2) = tls_detuning;
        h(3, 3) = detuning + tls_detuning;
    }
    h(0, 1) = h(1, 0) = drive;
    h(2, 3) = h(3, 2) = drive;
    h(1, 2) = h(2, 1) = tls.coupling;
    return h;
}

/// Adds the non-Hermitian decay diagonal: -(i/2) x (total loss rate of each state).
template <int Dim>
ComplexMatrix<Dim> effective_hamiltonian(const ComplexMatrix<Dim>& h, const RateSet& r) {
    static_assert(Dim == 2 || Dim == 4);
    ComplexMatrix<Dim> heff = h;
    const complex half_i(0.0, 0.5);
    heff(0, 0) -= half_i * r.tunnel(BasisState::g0);
    heff(1, 1) -= half_i * (r.relaxation + r.tunnel(BasisState::g1));
    if constexpr (Dim == 4) {
        heff(2, 2) -= half_i * (r.tunnel(BasisState::e0) + r.tls_relaxation);
        heff(3, 3) -= half_i * (r.relaxation + r.tunnel(BasisState::e1) + r.tls_relaxation);
    }
    return heff;
}

inline Matrix2 effective_hamiltonian_2(const Matrix2& h, const RateSet& r) { return effective_hamiltonian<2>(h, r); }
inline Matrix4 effective_hamiltonian_4(const Matrix4& h, const RateSet& r) { return effective_hamiltonian<4>(h, r); }

/// Largest of Omega_m, |w10 - w|, Omega_c, |w_TLS - w| relative to w. The
/// rotating-wave description is trustworthy while this stays below 0.1.
inline double rwa_validity_ratio(const JunctionParams& p, const BiasDrive& d, double bias,
                                 const TlsParams* tls = nullptr) {
    const double w = d.microwave_frequency;
    double worst = std::max(rabi_frequency(p, d.microwave_amplitude, bias), std::abs(level_splitting(p, bias) - w));
    if (tls) worst = std::max({worst, tls->coupling, std::abs(tls->frequency - w)});
    return worst / w;
}

/// Lorentzian pumping rate |0g> -> |1g> for a weak drive.
inline double resonant_transition_rate(double rabi, double relaxation, double escape_0g, double escape_1g,
                                       double detuning) {
    if (rabi == 0.0) return 0.0;
    if (!(relaxation >= 0.0 && escape_0g >= 0.0 && escape_1g >= 0.0))
        throw DomainError("resonant_transition_rate: rates must be >= 0");
    const double gamma = 0.5 * (relaxation + escape_0g + escape_1g);
    return rabi * rabi * gamma / (2.0 * (detuning * detuning + gamma * gamma));
}

/// Probability of staying diabatic through an avoided crossing with gap
/// 2 hbar Omega_c swept at `energy_rate` (J/s).
inline double landau_zener_probability(double coupling, double energy_rate) {
    if (!(energy_rate > 0.0)) throw DomainError("landau_zener_probability: sweep rate must be > 0");
    if (!(coupling >= 0.0)) throw DomainError("landau_zener_probability: coupling must be >= 0");
    const double exponent = two_pi * PhysicalConstants::hbar * coupling * coupling / energy_rate;
    return std::clamp(std::exp(-exponent), 0.0, 1.0);
}

/// Rate of change of the |1g>/|0e> diabatic energy difference at the crossing (J/s).
inline double sweep_rate(const JunctionParams& p, const TlsParams& tls, const BiasDrive& d) {
    const double crossing = resonance_current(p, tls.frequency);
    if (crossing < d.dc_start)
        throw DomainError("sweep_rate: the TLS crossing lies below the start of the ramp");
    const double h = 1e-6 * crossing;
    const double slope = (level_splitting(p, crossing + h) - level_splitting(p, crossing - h)) / (2.0 * h);
    return PhysicalConstants::hbar * std::abs(slope) * d.ramp_rate;
}

}  // namespace jjqj
