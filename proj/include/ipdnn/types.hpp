#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipdnn {

using cplx = std::complex<double>;

inline constexpr double c0 = 299792458.0;        // m/s
inline constexpr double mu0 = 1.25663706212e-6;  // H/m

// --------------------------------------------------------------------------
// Measurement / reconstruction geometry.
// Cells are indexed row-major: cell = i * n_side + j, with (i, j) the
// (row, col) grid indices; x grows with j, y grows with i.
// --------------------------------------------------------------------------

struct Setup {
    double frequency = 0.0;  // Hz
    double doi_side = 0.0;   // m, DOI is a centered square
    int n_side = 0;
    std::vector<Eigen::Vector2d> tx_positions;
    std::vector<Eigen::Vector2d> rx_positions;

    double k0() const { return 2.0 * M_PI * frequency / c0; }
    double wavelength() const { return c0 / frequency; }
    int n_cells() const { return n_side * n_side; }

    bool inside_doi(const Eigen::Vector2d& p) const
    {
        const double h = 0.5 * doi_side;
        return std::abs(p.x()) <= h && std::abs(p.y()) <= h;
    }

    void validate() const
    {
        if (!(frequency > 0.0)) throw std::invalid_argument("Setup: frequency must be > 0");
        if (!(doi_side > 0.0)) throw std::invalid_argument("Setup: doi_side must be > 0");
        if (n_side < 2) throw std::invalid_argument("Setup: n_side must be >= 2");
        for (const auto& p : tx_positions)
            if (inside_doi(p)) throw std::invalid_argument("Setup: transmitter inside DOI");
        for (const auto& p : rx_positions)
            if (inside_doi(p)) throw std::invalid_argument("Setup: receiver inside DOI");
    }

    std::uint64_t fingerprint() const;

    // Grid-defining fields only (frequency, DOI, n_side); transfer
    // checkpoints remain reusable under tx/rx subsetting.
    std::uint64_t grid_fingerprint() const;
};

struct Grid {
    std::vector<Eigen::Vector2d> cell_centers;
    double cell_size = 0.0;    // m, side of one square cell
    double cell_area = 0.0;    // m^2
    double equiv_radius = 0.0; // radius of the equal-area disk

    static Grid make(const Setup& s)
    {
        Grid g;
        const int n = s.n_side;
        g.cell_size = s.doi_side / n;
        g.cell_area = g.cell_size * g.cell_size;
        g.equiv_radius = std::sqrt(g.cell_area / M_PI);
        g.cell_centers.reserve(static_cast<size_t>(n) * n);
        const double x0 = -0.5 * s.doi_side + 0.5 * g.cell_size;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                g.cell_centers.emplace_back(x0 + j * g.cell_size, x0 + i * g.cell_size);
        return g;
    }
};

// Complex relative permittivity over the grid.
struct PermittivityMap {
    Eigen::MatrixXcd values; // n_side x n_side

    PermittivityMap() = default;
    explicit PermittivityMap(int n) : values(Eigen::MatrixXcd::Ones(n, n)) {}
    explicit PermittivityMap(Eigen::MatrixXcd v) : values(std::move(v)) {}

    int n_side() const { return static_cast<int>(values.rows()); }
    int n_cells() const { return static_cast<int>(values.size()); }

    // row-major flattening, cell = i * n + j
    Eigen::VectorXcd flat() const
    {
        const int n = n_side();
        Eigen::VectorXcd v(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) v[i * n + j] = values(i, j);
        return v;
    }

    static PermittivityMap from_flat(const Eigen::VectorXcd& v, int n)
    {
        PermittivityMap m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.values(i, j) = v[i * n + j];
        return m;
    }
};

// Scattered-field samples, one complex value per (receiver, transmitter).
struct MeasurementSet {
    Eigen::MatrixXcd samples; // M x T
    std::uint64_t setup_fingerprint = 0;
    std::string provenance = "synthetic";

    int n_rx() const { return static_cast<int>(samples.rows()); }
    int n_tx() const { return static_cast<int>(samples.cols()); }
};

// Active-cell indicator over the grid.
struct BinaryMask {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> bits;

    BinaryMask() = default;
    explicit BinaryMask(int n, bool fill = false)
        : bits(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, fill))
    {
    }

    int n_side() const { return static_cast<int>(bits.rows()); }

    int count() const
    {
        int c = 0;
        for (Eigen::Index k = 0; k < bits.size(); ++k) c += bits.data()[k] ? 1 : 0;
        return c;
    }

    bool empty() const { return count() == 0; }

    std::vector<int> active_cells() const
    {
        const int n = n_side();
        std::vector<int> idx;
        idx.reserve(static_cast<size_t>(count()));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (bits(i, j)) idx.push_back(i * n + j);
        return idx;
    }

    static BinaryMask full(int n) { return BinaryMask(n, true); }

    BinaryMask union_with(const BinaryMask& o) const
    {
        BinaryMask r = *this;
        for (Eigen::Index k = 0; k < bits.size(); ++k)
            r.bits.data()[k] = bits.data()[k] || o.bits.data()[k];
        return r;
    }

    bool operator==(const BinaryMask& o) const { return bits == o.bits; }
};

// FNV-1a over the canonical byte stream of the setup fields.
namespace detail {
inline void fnv_bytes(std::uint64_t& h, const void* data, size_t len)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
}
inline void fnv_double(std::uint64_t& h, double v) { fnv_bytes(h, &v, sizeof v); }
} // namespace detail

inline std::uint64_t Setup::fingerprint() const
{
    std::uint64_t h = 14695981039346656037ull;
    detail::fnv_double(h, frequency);
    detail::fnv_double(h, doi_side);
    detail::fnv_double(h, static_cast<double>(n_side));
    for (const auto& p : tx_positions) {
        detail::fnv_double(h, p.x());
        detail::fnv_double(h, p.y());
    }
    for (const auto& p : rx_positions) {
        detail::fnv_double(h, p.x());
        detail::fnv_double(h, p.y());
    }
    return h;
}

inline std::uint64_t Setup::grid_fingerprint() const
{
    std::uint64_t h = 14695981039346656037ull;
    detail::fnv_double(h, frequency);
    detail::fnv_double(h, doi_side);
    detail::fnv_double(h, static_cast<double>(n_side));
    return h;
}

} // namespace ipdnn
