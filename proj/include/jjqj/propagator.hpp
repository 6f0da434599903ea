#pragma once

// Single-step propagators for i dpsi/dt = H psi with H (rad/s) frozen over the step.

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "jjqj/hamiltonian.hpp"

namespace jjqj {

/// exp(-i H dt) for a frozen (possibly non-Hermitian) H.
template <int Dim>
ComplexMatrix<Dim> step_propagator(const ComplexMatrix<Dim>& h, double dt) {
    const ComplexMatrix<Dim> a = complex(0.0, -dt) * h;
    if constexpr (Dim == 2) {
        // A = m I + B with B traceless, B^2 = s^2 I.
        const complex m = 0.5 * (a(0, 0) + a(1, 1));
        const complex half_diff = 0.5 * (a(0, 0) - a(1, 1));
        const complex s = std::sqrt(half_diff * half_diff + a(0, 1) * a(1, 0));
        const complex sinhc = std::abs(s) < 1e-4 ? 1.0 + s * s / 6.0 : std::sinh(s) / s;
        const complex ch = std::cosh(s);
        const complex em = std::exp(m);
        ComplexMatrix<2> u;
        u(0, 0) = em * (ch + sinhc * half_diff);
        u(1, 1) = em * (ch - sinhc * half_diff);
        u(0, 1) = em * sinhc * a(0, 1);
        u(1, 0) = em * sinhc * a(1, 0);
        return u;
    } else {
        return a.exp();
    }
}

/// One classical fourth-order Runge-Kutta step.
template <int Dim>
ComplexVector<Dim> rk4_step(const ComplexMatrix<Dim>& h, const ComplexVector<Dim>& psi, double dt) {
    const ComplexMatrix<Dim> a = complex(0.0, -1.0) * h;
    const ComplexVector<Dim> k1 = a * psi;
    const ComplexVector<Dim> k2 = a * (psi + 0.5 * dt * k1);
    const ComplexVector<Dim> k3 = a * (psi + 0.5 * dt * k2);
    const ComplexVector<Dim> k4 = a * (psi + dt * k3);
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace jjqj
