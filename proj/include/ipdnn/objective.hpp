#pragma once

// Three-term physics loss (data / bound / TV), its exact gradient with
// respect to the network parameters via the adjoint-state method, and a
// plain Adam optimizer.
//
// Data term is the unsquared 2-norm as printed; its gradient uses the
// normalized residual direction with a zero-residual guard. The adjoint
// solve reuses the forward factorization: with G_D symmetric,
// B = I - X G_D = A^T, so B^-H q = conj(A^-1 conj(q)).

#include "ipdnn/em_core.hpp"
#include "ipdnn/network.hpp"

#include <Eigen/Dense>

namespace ipdnn {

struct LossWeights {
    double alpha = 2.0; // boundary term
    double beta = 1.0;  // TV term
};

struct LossBreakdown {
    double data = 0.0;
    double bound = 0.0;
    double tv = 0.0;
    double total = 0.0;
};

inline double data_loss(const MeasurementSet& pred, const MeasurementSet& meas)
{
    return (meas.samples - pred.samples).norm();
}

inline double bound_loss(const PermittivityMap& eps)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < eps.values.size(); ++k)
        s += std::max(0.0, 1.0 - eps.values.data()[k].real());
    return s;
}

namespace detail {

inline int mirror_index(int t, int n)
{
    if (n == 1) return 0;
    if (t < 0) return -t;
    if (t >= n) return 2 * n - 2 - t;
    return t;
}

inline double tv_real(const Eigen::MatrixXd& x)
{
    const int n = static_cast<int>(x.rows());
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double d1 = x(i, mirror_index(j - 1, n)) - x(i, j);
            const double d2 = x(mirror_index(i + 1, n), j) - x(i, j);
            s += std::sqrt(d1 * d1 + d2 * d2);
        }
    return s;
}

// smoothed subgradient; the 1e-12 under the root only matters at flats
inline void tv_grad_real(const Eigen::MatrixXd& x, Eigen::MatrixXd& g, double scale)
{
    const int n = static_cast<int>(x.rows());
    constexpr double delta = 1e-12;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int jm = mirror_index(j - 1, n);
            const int ip = mirror_index(i + 1, n);
            const double d1 = x(i, jm) - x(i, j);
            const double d2 = x(ip, j) - x(i, j);
            const double r = std::sqrt(d1 * d1 + d2 * d2 + delta);
            g(i, jm) += scale * d1 / r;
            g(ip, j) += scale * d2 / r;
            g(i, j) -= scale * (d1 + d2) / r;
        }
}

} // namespace detail

inline double tv_loss(const PermittivityMap& eps)
{
    return detail::tv_real(eps.values.real()) + detail::tv_real(eps.values.imag());
}

inline LossBreakdown total_loss(const PermittivityMap& eps, const MeasurementSet& pred,
                                const MeasurementSet& meas, const LossWeights& w)
{
    LossBreakdown b;
    b.data = data_loss(pred, meas);
    b.bound = bound_loss(eps);
    b.tv = tv_loss(eps);
    b.total = b.data + w.alpha * b.bound + w.beta * b.tv;
    return b;
}

struct NetworkGrad {
    Eigen::MatrixXd weight;
    Eigen::VectorXd bias;
    double log_c = 0.0;
    double log_sigma = 0.0;
};

struct ObjectiveResult {
    LossBreakdown loss;
    PermittivityMap eps_hat;
    MeasurementSet pred;
    NetworkGrad grad; // populated only when requested
};

inline ObjectiveResult evaluate_objective(const NetworkParams& params, Activation act,
                                          const PermittivityMap& eps0_input,
                                          const MeasurementSet& meas, const GreensOperators& greens,
                                          const Eigen::MatrixXcd& E_inc_all, const BinaryMask& mask,
                                          const LossWeights& weights, bool want_grad = true)
{
    const int n = params.n_side;
    const int N = n * n;

    ObjectiveResult res;
    const NetTrace trace = net_trace(params, eps0_input, act);
    res.eps_hat = channels_to_map(trace.out, eps0_input);

    const MaskedForward mf = factorize_masked(res.eps_hat, greens, E_inc_all, mask);
    const int C = static_cast<int>(mf.active.size());
    Eigen::MatrixXcd G_S_act(greens.G_S.rows(), C);
    for (int c = 0; c < C; ++c) G_S_act.col(c) = greens.G_S.col(mf.active[c]);
    res.pred.samples = G_S_act * mf.J_act;
    res.pred.setup_fingerprint = meas.setup_fingerprint;

    res.loss = total_loss(res.eps_hat, res.pred, meas, weights);
    if (!want_grad) return res;

    Eigen::VectorXd g_re = Eigen::VectorXd::Zero(N); // dL/dRe(eps), flat cell order
    Eigen::VectorXd g_im = Eigen::VectorXd::Zero(N);

    // data term via adjoint solves, one per transmitter, batched
    const Eigen::MatrixXcd r = meas.samples - res.pred.samples;
    const double L = r.norm();
    if (L >= 1e-14) {
        const Eigen::MatrixXcd W = -r / (2.0 * L);
        const Eigen::MatrixXcd Q = G_S_act.adjoint() * W;
        const Eigen::MatrixXcd P = mf.lu.solve(Q.conjugate()).conjugate();
        const Eigen::MatrixXcd phi = P.conjugate().cwiseProduct(mf.E_act);
        const Eigen::VectorXd gre_act = 2.0 * phi.real().rowwise().sum();
        const Eigen::VectorXd gim_act = -2.0 * phi.imag().rowwise().sum();
        for (int c = 0; c < C; ++c) {
            g_re[mf.active[c]] += gre_act[c];
            g_im[mf.active[c]] += gim_act[c];
        }
    }

    // bound term (hinge on Re, subgradient 0 at the kink)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (res.eps_hat.values(i, j).real() < 1.0) g_re[i * n + j] -= weights.alpha;

    // TV term on Re and Im separately
    {
        Eigen::MatrixXd gr = Eigen::MatrixXd::Zero(n, n), gi = Eigen::MatrixXd::Zero(n, n);
        detail::tv_grad_real(res.eps_hat.values.real(), gr, weights.beta);
        detail::tv_grad_real(res.eps_hat.values.imag(), gi, weights.beta);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                g_re[i * n + j] += gr(i, j);
                g_im[i * n + j] += gi(i, j);
            }
    }

    // chain rule through eps = eps0 + out_re - j*out_im and the activation
    Eigen::VectorXd g_out(2 * N);
    g_out.head(N) = g_re;
    g_out.tail(N) = -g_im;

    Eigen::VectorXd g_z(2 * N);
    for (int i = 0; i < 2 * N; ++i) g_z[i] = g_out[i] * activate_prime(act, trace.z[i], params.glow);

    res.grad.weight.noalias() = g_z * trace.input.transpose();
    res.grad.bias = g_z;
    res.grad.log_c = 0.0;
    res.grad.log_sigma = 0.0;
    if (act == Activation::glow) {
        double gc = 0.0, gs = 0.0;
        for (int i = 0; i < 2 * N; ++i) {
            const GlowParamGrads gg = glow_param_grads(trace.z[i], params.glow);
            gc += g_out[i] * gg.d_c;
            gs += g_out[i] * gg.d_sigma;
        }
        res.grad.log_c = gc * params.glow.c();
        res.grad.log_sigma = gs * params.glow.sigma();
    }
    return res;
}

// Spec-shaped convenience wrapper.
inline NetworkGrad loss_gradient(const NetworkParams& params, const PermittivityMap& eps0_input,
                                 const MeasurementSet& meas, const Setup& setup,
                                 const GreensOperators& greens, const BinaryMask& mask,
                                 const LossWeights& weights, Activation act = Activation::glow)
{
    const Grid grid = Grid::make(setup);
    const Eigen::MatrixXcd E_inc = incident_fields(setup, grid);
    return evaluate_objective(params, act, eps0_input, meas, greens, E_inc, mask, weights).grad;
}

// ---- Adam ----

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    long step = 0;
    Eigen::MatrixXd m_w, v_w;
    Eigen::VectorXd m_b, v_b;
    double m_lc = 0.0, v_lc = 0.0, m_ls = 0.0, v_ls = 0.0;

    static AdamState init(const NetworkParams& p, double lr = 1e-3)
    {
        AdamState s;
        s.lr = lr;
        const int d = p.dim();
        s.m_w = Eigen::MatrixXd::Zero(d, d);
        s.v_w = Eigen::MatrixXd::Zero(d, d);
        s.m_b = Eigen::VectorXd::Zero(d);
        s.v_b = Eigen::VectorXd::Zero(d);
        return s;
    }
};

inline void adam_step(NetworkParams& p, const NetworkGrad& g, AdamState& s)
{
    s.step += 1;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));

    auto upd = [&](double& param, double grad, double& m, double& v) {
        m = s.beta1 * m + (1.0 - s.beta1) * grad;
        v = s.beta2 * v + (1.0 - s.beta2) * grad * grad;
        param -= s.lr * (m / bc1) / (std::sqrt(v / bc2) + s.eps_adam);
    };

    const int d = p.dim();
    double* w = p.weight.data();
    const double* gw = g.weight.data();
    double* mw = s.m_w.data();
    double* vw = s.v_w.data();
    for (long k = 0; k < static_cast<long>(d) * d; ++k) upd(w[k], gw[k], mw[k], vw[k]);
    for (int k = 0; k < d; ++k) upd(p.bias[k], g.bias[k], s.m_b[k], s.v_b[k]);
    upd(p.glow.log_c, g.log_c, s.m_lc, s.v_lc);
    upd(p.glow.log_sigma, g.log_sigma, s.m_ls, s.v_ls);
}

} // namespace ipdnn
