#pragma once

// Cylinder special functions for the 2-D scattering kernels.
// Real-argument Bessel/Hankel functions wrap the C++17 math special
// functions; complex-argument J_n (needed for lossy Mie coefficients)
// uses the ascending power series, which is accurate for the moderate
// |z| that occur at desk scale (k1 * radius well below ~30).

#include <cmath>
#include <complex>
#include <stdexcept>

namespace ipdnn {

using cplx = std::complex<double>;

inline double bessel_j(int n, double x) { return std::cyl_bessel_j(static_cast<double>(n), x); }
inline double bessel_y(int n, double x) { return std::cyl_neumann(static_cast<double>(n), x); }

// H_n^(2)(x) = J_n(x) - i Y_n(x), time convention e^{+j omega t}.
inline cplx hankel2(int n, double x) { return {bessel_j(n, x), -bessel_y(n, x)}; }

inline cplx hankel2_0(double x) { return hankel2(0, x); }
inline cplx hankel2_1(double x) { return hankel2(1, x); }

// J_n(z), complex argument, n >= 0, via the ascending series.
inline cplx bessel_j_complex(int n, cplx z)
{
    if (n < 0) throw std::invalid_argument("bessel_j_complex: n must be >= 0");
    const cplx h = 0.5 * z;
    // leading term (h)^n / n!
    cplx term = 1.0;
    for (int k = 1; k <= n; ++k) term *= h / static_cast<double>(k);
    cplx sum = term;
    const cplx h2 = -h * h;
    for (int m = 1; m < 400; ++m) {
        term *= h2 / static_cast<double>(m * (m + n));
        sum += term;
        if (std::abs(term) < 1e-17 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

// d/dz J_n(z) = J_{n-1}(z) - (n/z) J_n(z); J_0' = -J_1.
inline cplx bessel_j_complex_prime(int n, cplx z)
{
    if (n == 0) return -bessel_j_complex(1, z);
    return bessel_j_complex(n - 1, z) - (static_cast<double>(n) / z) * bessel_j_complex(n, z);
}

inline double bessel_j_prime(int n, double x)
{
    if (n == 0) return -bessel_j(1, x);
    return bessel_j(n - 1, x) - (static_cast<double>(n) / x) * bessel_j(n, x);
}

// d/dx H_n^(2)(x)
inline cplx hankel2_prime(int n, double x)
{
    if (n == 0) return -hankel2(1, x);
    return hankel2(n - 1, x) - (static_cast<double>(n) / x) * hankel2(n, x);
}

} // namespace ipdnn
