#pragma once

// Single affine layer + activation over two channels ([Re; Im] of the
// permittivity estimate). The network input is the fixed initial estimate
// eps_hat^(0); the layer is an optimizable reparameterization of the
// unknown map. The output is a correction on top of the input,
// eps = eps0 + out_re - j * out_im (positive imaginary-channel
// activations mean loss under e^{+j omega t}), so a freshly initialized
// network reproduces eps_hat^(0) instead of a flat background that the
// TV term would lock in.

#include "ipdnn/glow.hpp"
#include "ipdnn/types.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <random>

namespace ipdnn {

struct NetworkParams {
    int n_side = 0;
    Eigen::MatrixXd weight; // 2N x 2N
    Eigen::VectorXd bias;   // 2N
    GlowParams glow;

    int dim() const { return 2 * n_side * n_side; }
};

inline NetworkParams net_init(std::uint64_t seed, int n_side)
{
    NetworkParams p;
    p.n_side = n_side;
    const int d = 2 * n_side * n_side;
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-bound, bound);
    p.weight.resize(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p.weight(i, j) = dist(rng);
    p.bias = Eigen::VectorXd::Zero(d);
    p.glow = {}; // c = sigma = 1
    return p;
}

// Both channel codings are contrast-relative (background maps to zero):
// the input [Re(eps)-1; Im(eps)] matches the output eps = 1 + out_re
// - j*out_im. Feeding raw Re(eps) ~ 1 across all cells makes the per-row
// weight updates add coherently and saturates every neuron within a few
// hundred Adam steps.
inline Eigen::VectorXd map_to_channels(const PermittivityMap& m)
{
    const int N = m.n_cells();
    Eigen::VectorXd v(2 * N);
    const Eigen::VectorXcd f = m.flat();
    for (int q = 0; q < N; ++q) {
        v[q] = f[q].real() - 1.0;
        v[N + q] = f[q].imag();
    }
    return v;
}

inline PermittivityMap channels_to_map(const Eigen::VectorXd& out, const PermittivityMap& base)
{
    const int n = base.n_side();
    const int N = n * n;
    Eigen::VectorXcd f = base.flat();
    for (int q = 0; q < N; ++q) f[q] += cplx(out[q], -out[N + q]);
    return PermittivityMap::from_flat(f, n);
}

// Pre-activations and activations for one forward pass; kept around for
// the chain rule in the gradient.
struct NetTrace {
    Eigen::VectorXd input; // 2N
    Eigen::VectorXd z;     // weight * input + bias
    Eigen::VectorXd out;   // activation(z)
};

inline NetTrace net_trace(const NetworkParams& p, const PermittivityMap& input, Activation act)
{
    if (input.n_side() != p.n_side) throw std::invalid_argument("net_forward: shape mismatch");
    NetTrace t;
    t.input = map_to_channels(input);
    t.z = p.weight * t.input + p.bias;
    t.out.resize(t.z.size());
    for (Eigen::Index i = 0; i < t.z.size(); ++i) t.out[i] = activate(act, t.z[i], p.glow);
    return t;
}

inline PermittivityMap net_forward(const NetworkParams& p, const PermittivityMap& input,
                                   Activation act = Activation::glow)
{
    return channels_to_map(net_trace(p, input, act).out, input);
}

// ---- checkpoint serialization (binary, with the creating setup's
// fingerprint so transfer learning can guard against geometry mismatch) ----

inline void save_checkpoint(const std::string& path, const NetworkParams& p,
                            std::uint64_t setup_fingerprint)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
    const char magic[8] = {'I', 'P', 'D', 'N', 'N', 'C', 'K', '1'};
    f.write(magic, 8);
    const std::int64_t n = p.n_side;
    f.write(reinterpret_cast<const char*>(&n), 8);
    f.write(reinterpret_cast<const char*>(&setup_fingerprint), 8);
    f.write(reinterpret_cast<const char*>(p.weight.data()),
            static_cast<std::streamsize>(sizeof(double) * p.weight.size()));
    f.write(reinterpret_cast<const char*>(p.bias.data()),
            static_cast<std::streamsize>(sizeof(double) * p.bias.size()));
    f.write(reinterpret_cast<const char*>(&p.glow.log_c), 8);
    f.write(reinterpret_cast<const char*>(&p.glow.log_sigma), 8);
    if (!f) throw std::runtime_error("short write on checkpoint: " + path);
}

inline NetworkParams load_checkpoint(const std::string& path, std::uint64_t* setup_fingerprint)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read checkpoint: " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::string(magic, 8) != "IPDNNCK1")
        throw std::runtime_error("not an IPDNN checkpoint: " + path);
    std::int64_t n = 0;
    std::uint64_t fp = 0;
    f.read(reinterpret_cast<char*>(&n), 8);
    f.read(reinterpret_cast<char*>(&fp), 8);
    if (!f || n < 2 || n > 4096) throw std::runtime_error("corrupt checkpoint header: " + path);
    NetworkParams p;
    p.n_side = static_cast<int>(n);
    const int d = p.dim();
    p.weight.resize(d, d);
    p.bias.resize(d);
    f.read(reinterpret_cast<char*>(p.weight.data()),
           static_cast<std::streamsize>(sizeof(double) * p.weight.size()));
    f.read(reinterpret_cast<char*>(p.bias.data()),
           static_cast<std::streamsize>(sizeof(double) * p.bias.size()));
    f.read(reinterpret_cast<char*>(&p.glow.log_c), 8);
    f.read(reinterpret_cast<char*>(&p.glow.log_sigma), 8);
    if (!f) throw std::runtime_error("truncated checkpoint: " + path);
    if (setup_fingerprint) *setup_fingerprint = fp;
    return p;
}

} // namespace ipdnn
