#pragma once

// GLOW activation: sign(x) * x^2/2 inside |x| <= c, saturating
// Gaussian-windowed branch outside, with the continuity constant c^2/2
// added to the outer branch so the function is C^1 at |x| = c.
// c and sigma are trainable, stored in log-space so they stay positive.

#include <cmath>
#include <stdexcept>
#include <string>

namespace ipdnn {

struct GlowParams {
    double log_c = 0.0;
    double log_sigma = 0.0;

    double c() const { return std::exp(log_c); }
    double sigma() const { return std::exp(log_sigma); }
};

inline double glow(double x, const GlowParams& p)
{
    const double c = p.c(), s = p.sigma();
    const double ax = std::abs(x);
    const double sg = x < 0.0 ? -1.0 : 1.0;
    if (ax <= c) return sg * 0.5 * x * x;
    const double u = (c * c - x * x) / (s * s);
    return sg * (0.5 * c * c + 0.5 * s * s * (1.0 - std::exp(u)));
}

inline double glow_prime(double x, const GlowParams& p)
{
    const double c = p.c(), s = p.sigma();
    const double ax = std::abs(x);
    if (ax <= c) return ax;
    return ax * std::exp((c * c - x * x) / (s * s));
}

struct GlowParamGrads {
    double d_c = 0.0;
    double d_sigma = 0.0;
};

// Partials of glow(x) with respect to c and sigma. Both vanish on the
// inner branch and are continuous at |x| = c.
inline GlowParamGrads glow_param_grads(double x, const GlowParams& p)
{
    const double c = p.c(), s = p.sigma();
    const double ax = std::abs(x);
    if (ax <= c) return {};
    const double sg = x < 0.0 ? -1.0 : 1.0;
    const double u = (c * c - x * x) / (s * s);
    const double eu = std::exp(u);
    GlowParamGrads g;
    g.d_c = sg * c * (1.0 - eu);
    g.d_sigma = sg * (s * (1.0 - eu) + s * u * eu);
    return g;
}

enum class Activation { glow, relu, leakyrelu, tanh, softsign };

inline Activation parse_activation(const std::string& name)
{
    if (name == "glow") return Activation::glow;
    if (name == "relu") return Activation::relu;
    if (name == "leakyrelu") return Activation::leakyrelu;
    if (name == "tanh") return Activation::tanh;
    if (name == "softsign") return Activation::softsign;
    throw std::invalid_argument("unknown activation: " + name);
}

inline std::string activation_name(Activation a)
{
    switch (a) {
        case Activation::glow: return "glow";
        case Activation::relu: return "relu";
        case Activation::leakyrelu: return "leakyrelu";
        case Activation::tanh: return "tanh";
        case Activation::softsign: return "softsign";
    }
    return "glow";
}

inline double alt_activation(Activation a, double x)
{
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::leakyrelu: return x > 0.0 ? x : 0.01 * x;
        case Activation::tanh: return std::tanh(x);
        case Activation::softsign: return x / (1.0 + std::abs(x));
        default: throw std::invalid_argument("alt_activation: use glow() for GLOW");
    }
}

inline double alt_activation_prime(Activation a, double x)
{
    switch (a) {
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::leakyrelu: return x > 0.0 ? 1.0 : 0.01;
        case Activation::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::softsign: {
            const double d = 1.0 + std::abs(x);
            return 1.0 / (d * d);
        }
        default: throw std::invalid_argument("alt_activation_prime: use glow_prime() for GLOW");
    }
}

inline double activate(Activation a, double x, const GlowParams& p)
{
    return a == Activation::glow ? glow(x, p) : alt_activation(a, x);
}

inline double activate_prime(Activation a, double x, const GlowParams& p)
{
    return a == Activation::glow ? glow_prime(x, p) : alt_activation_prime(a, x);
}

} // namespace ipdnn
