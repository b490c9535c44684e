#pragma once

// Analytic series solution for a centered homogeneous circular cylinder
// under TM line-source incidence; validation oracle for the MoM forward
// model. Same conventions as em_core (e^{+j omega t}, unit line current
// with the omega mu0 amplitude factor).

#include "ipdnn/special.hpp"
#include "ipdnn/types.hpp"

#include <Eigen/Dense>
#include <vector>

namespace ipdnn {

namespace detail {

// Orders 0..n of H^(2) at fixed argument, grown on demand by the upward
// recurrence (stable: the error tracks the dominant Y solution).
struct HankelLadder {
    double x = 0.0;
    std::vector<cplx> h;

    explicit HankelLadder(double arg) : x(arg)
    {
        h.push_back(hankel2(0, x));
        h.push_back(hankel2(1, x));
    }

    cplx operator()(int n)
    {
        while (static_cast<int>(h.size()) <= n) {
            const int m = static_cast<int>(h.size()) - 1;
            h.push_back((2.0 * m / x) * h[m] - h[m - 1]);
        }
        return h[n];
    }
};

} // namespace detail

// Scattering coefficient of cylindrical harmonic n for a dielectric
// cylinder of radius R: continuity of Ez and dEz/drho at rho = R.
inline cplx mie_coefficient(int n, double k0, cplx eps, double radius)
{
    const cplx k1 = k0 * std::sqrt(eps);
    const double x0 = k0 * radius;
    const cplx x1 = k1 * radius;
    const cplx jn1 = bessel_j_complex(n, x1);
    const cplx jn1p = bessel_j_complex_prime(n, x1);
    const double jn0 = bessel_j(n, x0);
    const double jn0p = bessel_j_prime(n, x0);
    const cplx hn0 = hankel2(n, x0);
    const cplx hn0p = hankel2_prime(n, x0);
    const cplx num = k1 * jn1p * jn0 - k0 * jn1 * jn0p;
    const cplx den = k0 * jn1 * hn0p - k1 * jn1p * hn0;
    return num / den;
}

inline MeasurementSet mie_cylinder_scattered(double radius, cplx eps, const Setup& setup)
{
    setup.validate();
    if (!(radius > 0.0) || radius > 0.5 * setup.doi_side)
        throw std::invalid_argument("mie_cylinder_scattered: disk must lie inside the DOI");

    const double k0 = setup.k0();
    const int T = static_cast<int>(setup.tx_positions.size());
    const int M = static_cast<int>(setup.rx_positions.size());
    constexpr int max_terms = 200;
    constexpr double rel_tol = 1e-12;

    std::vector<cplx> a;
    auto coeff = [&](int n) {
        while (static_cast<int>(a.size()) <= n)
            a.push_back(mie_coefficient(static_cast<int>(a.size()), k0, eps, radius));
        return a[n];
    };

    std::vector<detail::HankelLadder> h_tx, h_rx;
    std::vector<double> phi_tx(T), phi_rx(M);
    h_tx.reserve(T);
    h_rx.reserve(M);
    for (int t = 0; t < T; ++t) {
        h_tx.emplace_back(k0 * setup.tx_positions[t].norm());
        phi_tx[t] = std::atan2(setup.tx_positions[t].y(), setup.tx_positions[t].x());
    }
    for (int m = 0; m < M; ++m) {
        h_rx.emplace_back(k0 * setup.rx_positions[m].norm());
        phi_rx[m] = std::atan2(setup.rx_positions[m].y(), setup.rx_positions[m].x());
    }

    MeasurementSet out;
    out.samples.resize(M, T);
    out.setup_fingerprint = setup.fingerprint();
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < M; ++m) {
            const double dphi = phi_rx[m] - phi_tx[t];
            cplx sum = coeff(0) * h_tx[t](0) * h_rx[m](0);
            int small_streak = 0;
            bool converged = false;
            for (int n = 1; n <= max_terms; ++n) {
                const cplx term = 2.0 * std::cos(n * dphi) * coeff(n) * h_tx[t](n) * h_rx[m](n);
                sum += term;
                if (!std::isfinite(std::abs(term))) break;
                if (std::abs(term) < rel_tol * std::abs(sum) + 1e-300) {
                    if (++small_streak >= 3) {
                        converged = true;
                        break;
                    }
                } else {
                    small_streak = 0;
                }
            }
            if (!converged)
                throw std::runtime_error("mie_cylinder_scattered: series did not converge in 200 terms");
            out.samples(m, t) = 2.0 * M_PI * setup.frequency * mu0 * sum / cplx(0.0, 4.0);
        }
    return out;
}

} // namespace ipdnn
