#pragma once

// Discretized 2-D TM forward scattering model (method of moments,
// pulse basis / point matching with equal-area equivalent disks).
//
// Time convention e^{+j omega t}; Green's function g = (1/4j) H0^(2)(k0 R).
// State equation:  E_tot = E_inc + G_D * J,  J = (eps_r - 1) .* E_tot
// Data equation:   E_sca = G_S * J
// The k0^2 of the continuous equations and the cell quadrature are folded
// into G_D and G_S.

#include "ipdnn/special.hpp"
#include "ipdnn/types.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace ipdnn {

struct degenerate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GreensOperators {
    Eigen::MatrixXcd G_D; // N x N, interior-to-interior
    Eigen::MatrixXcd G_S; // M x N, interior-to-receiver
    std::uint64_t setup_fingerprint = 0;
};

struct FieldSet {
    Eigen::MatrixXcd E_inc; // N x T
    Eigen::MatrixXcd E_tot; // N x T
    Eigen::MatrixXcd J;     // N x T, zero off the active mask
};

// Equivalent-disk quadrature of the cell integral:
//   k0^2 Int_cell g dA = (pi k0 a / 2j) J1(k0 a) H0^(2)(k0 rho)   (rho > 0)
//   self term          = (pi k0 a / 2j) H1^(2)(k0 a) - 1
inline GreensOperators assemble_greens(const Setup& setup, const Grid& grid)
{
    setup.validate();
    const int n = setup.n_side;
    const int N = n * n;
    const int M = static_cast<int>(setup.rx_positions.size());
    const double k0 = setup.k0();
    const double a = grid.equiv_radius;
    const cplx coeff = M_PI * k0 * a / cplx(0.0, 2.0) * bessel_j(1, k0 * a);
    const cplx self = M_PI * k0 * a / cplx(0.0, 2.0) * hankel2_1(k0 * a) - 1.0;

    // A uniform grid has only n x n distinct |di|,|dj| separations.
    Eigen::MatrixXcd tab(n, n);
    const double h = grid.cell_size;
    for (int di = 0; di < n; ++di)
        for (int dj = 0; dj < n; ++dj) {
            if (di == 0 && dj == 0) continue;
            tab(di, dj) = coeff * hankel2_0(k0 * h * std::hypot(double(di), double(dj)));
        }

    GreensOperators g;
    g.setup_fingerprint = setup.fingerprint();
    g.G_D.resize(N, N);
    for (int i1 = 0; i1 < n; ++i1)
        for (int j1 = 0; j1 < n; ++j1) {
            const int m = i1 * n + j1;
            for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < n; ++j2) {
                    const int q = i2 * n + j2;
                    g.G_D(m, q) = (m == q) ? self : tab(std::abs(i1 - i2), std::abs(j1 - j2));
                }
        }

    g.G_S.resize(M, N);
    for (int m = 0; m < M; ++m)
        for (int q = 0; q < N; ++q) {
            const double rho = (setup.rx_positions[m] - grid.cell_centers[q]).norm();
            g.G_S(m, q) = coeff * hankel2_0(k0 * rho);
        }
    return g;
}

// Unit line-current source: E_inc(r) = (omega mu0 / 4j) H0^(2)(k0 |r - r_tx|).
// The omega mu0 factor is the physical radiation impedance of a 1 A
// filament; it sets the absolute field scale (V/m) of all synthetic data.
inline Eigen::VectorXcd incident_field(const Setup& setup, const Grid& grid, int tx_index)
{
    if (tx_index < 0 || tx_index >= static_cast<int>(setup.tx_positions.size()))
        throw std::out_of_range("incident_field: tx_index");
    const double k0 = setup.k0();
    const double omega_mu0 = 2.0 * M_PI * setup.frequency * mu0;
    const Eigen::Vector2d& tx = setup.tx_positions[tx_index];
    const int N = static_cast<int>(grid.cell_centers.size());
    Eigen::VectorXcd e(N);
    for (int q = 0; q < N; ++q)
        e[q] = omega_mu0 * hankel2_0(k0 * (grid.cell_centers[q] - tx).norm()) / cplx(0.0, 4.0);
    return e;
}

inline Eigen::MatrixXcd incident_fields(const Setup& setup, const Grid& grid)
{
    const int T = static_cast<int>(setup.tx_positions.size());
    Eigen::MatrixXcd E(grid.cell_centers.size(), T);
    for (int t = 0; t < T; ++t) E.col(t) = incident_field(setup, grid, t);
    return E;
}

// Factorized masked state solve, shared across transmitters and reused by
// the adjoint gradient.
struct MaskedForward {
    std::vector<int> active;                   // cell indices with mask bit set
    Eigen::VectorXcd chi_act;                  // contrast on active cells
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;  // of A = I - G_D[act,act] diag(chi)
    Eigen::MatrixXcd E_act;                    // C x T total field on active cells
    Eigen::MatrixXcd J_act;                    // C x T induced current on active cells
};

inline MaskedForward factorize_masked(const PermittivityMap& eps, const GreensOperators& greens,
                                      const Eigen::MatrixXcd& E_inc_all, const BinaryMask& mask)
{
    MaskedForward f;
    f.active = mask.active_cells();
    if (f.active.empty()) throw std::invalid_argument("solve_state: empty mask");
    const int C = static_cast<int>(f.active.size());
    const int T = static_cast<int>(E_inc_all.cols());
    const Eigen::VectorXcd chi_full = eps.flat().array() - 1.0;
    f.chi_act.resize(C);
    for (int c = 0; c < C; ++c) f.chi_act[c] = chi_full[f.active[c]];

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(C, C);
    for (int c = 0; c < C; ++c)
        for (int d = 0; d < C; ++d) A(c, d) -= greens.G_D(f.active[c], f.active[d]) * f.chi_act[d];
    f.lu.compute(A);

    Eigen::MatrixXcd rhs(C, T);
    for (int c = 0; c < C; ++c) rhs.row(c) = E_inc_all.row(f.active[c]);
    f.E_act = f.lu.solve(rhs);
    if (!f.E_act.allFinite() || (A * f.E_act - rhs).norm() > 1e-8 * (rhs.norm() + 1e-300))
        throw degenerate_error("solve_state: restricted system is singular or ill-conditioned");
    f.J_act = f.chi_act.asDiagonal() * f.E_act;
    return f;
}

// Full-grid FieldSet from the masked solve; off-mask cells get one
// application of G_D to the active currents.
inline FieldSet solve_state(const PermittivityMap& eps, const GreensOperators& greens,
                            const Eigen::MatrixXcd& E_inc_all, const BinaryMask& mask)
{
    const MaskedForward f = factorize_masked(eps, greens, E_inc_all, mask);
    const int N = static_cast<int>(E_inc_all.rows());
    const int T = static_cast<int>(E_inc_all.cols());
    const int C = static_cast<int>(f.active.size());

    Eigen::MatrixXcd G_D_cols(N, C);
    for (int c = 0; c < C; ++c) G_D_cols.col(c) = greens.G_D.col(f.active[c]);

    FieldSet fs;
    fs.E_inc = E_inc_all;
    fs.E_tot = E_inc_all + G_D_cols * f.J_act;
    for (int c = 0; c < C; ++c) fs.E_tot.row(f.active[c]) = f.E_act.row(c);
    fs.J = Eigen::MatrixXcd::Zero(N, T);
    for (int c = 0; c < C; ++c) fs.J.row(f.active[c]) = f.J_act.row(c);
    return fs;
}

inline MeasurementSet scattered_field(const FieldSet& fs, const GreensOperators& greens)
{
    MeasurementSet m;
    m.samples = greens.G_S * fs.J;
    m.setup_fingerprint = greens.setup_fingerprint;
    return m;
}

inline MeasurementSet forward(const PermittivityMap& eps, const Setup& setup, const Grid& grid,
                              const GreensOperators& greens,
                              const std::optional<BinaryMask>& mask = std::nullopt)
{
    const Eigen::MatrixXcd E_inc = incident_fields(setup, grid);
    const BinaryMask m = mask.value_or(BinaryMask::full(setup.n_side));
    const MaskedForward f = factorize_masked(eps, greens, E_inc, m);
    MeasurementSet out;
    const int C = static_cast<int>(f.active.size());
    Eigen::MatrixXcd G_S_cols(greens.G_S.rows(), C);
    for (int c = 0; c < C; ++c) G_S_cols.col(c) = greens.G_S.col(f.active[c]);
    out.samples = G_S_cols * f.J_act;
    out.setup_fingerprint = setup.fingerprint();
    return out;
}

inline MeasurementSet forward(const PermittivityMap& eps, const Setup& setup,
                              const std::optional<BinaryMask>& mask = std::nullopt)
{
    const Grid grid = Grid::make(setup);
    const GreensOperators greens = assemble_greens(setup, grid);
    return forward(eps, setup, grid, greens, mask);
}

// Backpropagation (adjoint imaging) initial estimate eps_hat^(0).
// Per transmitter: J_bp = gamma * G_S^H * E_sca with the classical
// single-step gain, E_tot approximated by E_inc + G_D J_bp, then a per-cell
// least-squares contrast over transmitters.
inline PermittivityMap bp_initializer(const MeasurementSet& meas, const Setup& setup,
                                      const GreensOperators& greens, bool* degenerate = nullptr)
{
    const Grid grid = Grid::make(setup);
    const int N = setup.n_cells();
    const int T = meas.n_tx();
    if (meas.n_rx() != static_cast<int>(setup.rx_positions.size()))
        throw std::invalid_argument("bp_initializer: measurement/receiver mismatch");

    if (degenerate) *degenerate = false;
    if (meas.samples.norm() == 0.0) {
        if (degenerate) *degenerate = true;
        return PermittivityMap(setup.n_side);
    }

    const Eigen::MatrixXcd E_inc = incident_fields(setup, grid);
    Eigen::VectorXcd num = Eigen::VectorXcd::Zero(N);
    Eigen::VectorXd den = Eigen::VectorXd::Zero(N);
    for (int t = 0; t < T; ++t) {
        const Eigen::VectorXcd e = meas.samples.col(t);
        const Eigen::VectorXcd gse = greens.G_S.adjoint() * e;
        const Eigen::VectorXcd ggse = greens.G_S * gse;
        const double nrm2 = ggse.squaredNorm();
        if (nrm2 == 0.0) continue;
        const cplx gamma = e.dot(ggse) / nrm2; // <G G^H e, e> / ||G G^H e||^2
        const Eigen::VectorXcd j_bp = gamma * gse;
        const Eigen::VectorXcd e_tot = E_inc.col(t) + greens.G_D * j_bp;
        num += e_tot.conjugate().cwiseProduct(j_bp);
        den += e_tot.cwiseAbs2();
    }

    Eigen::VectorXcd eps_flat(N);
    for (int q = 0; q < N; ++q) {
        const cplx chi = den[q] > 0.0 ? num[q] / den[q] : cplx(0.0);
        double re = 1.0 + chi.real();
        double im = chi.imag();
        if (re < 1.0) re = 1.0;
        if (im > 0.0) im = 0.0; // lossy media have Im(eps) <= 0 under e^{+j omega t}
        eps_flat[q] = cplx(re, im);
    }
    return PermittivityMap::from_flat(eps_flat, setup.n_side);
}

} // namespace ipdnn
