#pragma once

// Synthetic scenes: canonical scatterer shapes, the default measurement
// geometry, and exact-ratio Gaussian noise injection.

#include "ipdnn/io.hpp"
#include "ipdnn/types.hpp"

#include <random>

namespace ipdnn {

struct Shape {
    enum class Kind { disk, rectangle, ring, polygon, austria };
    Kind kind = Kind::disk;
    cplx eps{2.0, 0.0};
    Eigen::Vector2d center{0.0, 0.0}; // disk, ring, austria
    double radius = 0.0;              // disk
    Eigen::Vector2d corner{0.0, 0.0}; // rectangle (lower-left)
    Eigen::Vector2d size{0.0, 0.0};   // rectangle
    double r_inner = 0.0, r_outer = 0.0; // ring
    std::vector<Eigen::Vector2d> vertices; // polygon
};

struct SceneSpec {
    Setup setup;
    std::vector<Shape> shapes; // later shapes overwrite earlier on overlap
};

namespace detail {

inline bool point_in_polygon(const std::vector<Eigen::Vector2d>& v, const Eigen::Vector2d& p)
{
    bool in = false;
    const size_t n = v.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((v[i].y() > p.y()) != (v[j].y() > p.y()) &&
            p.x() < (v[j].x() - v[i].x()) * (p.y() - v[i].y()) / (v[j].y() - v[i].y()) + v[i].x())
            in = !in;
    }
    return in;
}

// Austria profile scaled to the DOI: two disks above a ring, the
// conventional benchmark layout (fractions of the classical 2 m frame).
inline bool point_in_austria(const Eigen::Vector2d& c, double doi_side, const Eigen::Vector2d& p)
{
    const double L = doi_side;
    const Eigen::Vector2d q = p - c;
    const double disk_r = 0.10 * L;
    if ((q - Eigen::Vector2d(-0.15 * L, 0.30 * L)).norm() <= disk_r) return true;
    if ((q - Eigen::Vector2d(0.15 * L, 0.30 * L)).norm() <= disk_r) return true;
    const double rr = (q - Eigen::Vector2d(0.0, -0.10 * L)).norm();
    return rr >= 0.15 * L && rr <= 0.30 * L;
}

inline bool point_in_shape(const Shape& s, double doi_side, const Eigen::Vector2d& p)
{
    switch (s.kind) {
        case Shape::Kind::disk: return (p - s.center).norm() <= s.radius;
        case Shape::Kind::rectangle:
            return p.x() >= s.corner.x() && p.x() <= s.corner.x() + s.size.x() &&
                   p.y() >= s.corner.y() && p.y() <= s.corner.y() + s.size.y();
        case Shape::Kind::ring: {
            const double r = (p - s.center).norm();
            return r >= s.r_inner && r <= s.r_outer;
        }
        case Shape::Kind::polygon: return point_in_polygon(s.vertices, p);
        case Shape::Kind::austria: return point_in_austria(s.center, doi_side, p);
    }
    return false;
}

} // namespace detail

inline PermittivityMap rasterize(const SceneSpec& scene)
{
    const Grid grid = Grid::make(scene.setup);
    const int n = scene.setup.n_side;
    PermittivityMap eps(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2d& p = grid.cell_centers[i * n + j];
            for (const Shape& s : scene.shapes)
                if (detail::point_in_shape(s, scene.setup.doi_side, p)) eps.values(i, j) = s.eps;
        }
    return eps;
}

inline Setup make_ring_setup(double frequency, double doi_side, int n_side, int n_tx, int n_rx,
                             double ring_radius)
{
    Setup s;
    s.frequency = frequency;
    s.doi_side = doi_side;
    s.n_side = n_side;
    for (int t = 0; t < n_tx; ++t) {
        const double a = 2.0 * M_PI * t / n_tx;
        s.tx_positions.emplace_back(ring_radius * std::cos(a), ring_radius * std::sin(a));
    }
    // receivers offset half an angular step so no rx coincides with a tx
    for (int r = 0; r < n_rx; ++r) {
        const double a = 2.0 * M_PI * (r + 0.5) / n_rx;
        s.rx_positions.emplace_back(ring_radius * std::cos(a), ring_radius * std::sin(a));
    }
    s.validate();
    return s;
}

// 4 GHz, 0.15 m DOI on a 64x64 grid, 36 tx / 36 rx on a 20-wavelength ring.
inline Setup default_setup(int n_side = 64)
{
    const double f = 4e9;
    const double lambda = c0 / f;
    return make_ring_setup(f, 0.15, n_side, 36, 36, 20.0 * lambda);
}

// Complex circular Gaussian noise rescaled so ||n||_F = ratio * ||E||_F exactly.
inline MeasurementSet add_noise(const MeasurementSet& meas, double ratio, std::uint64_t seed)
{
    if (ratio < 0.0) throw std::invalid_argument("add_noise: ratio must be >= 0");
    MeasurementSet out = meas;
    if (ratio == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd n(meas.samples.rows(), meas.samples.cols());
    for (Eigen::Index c = 0; c < n.cols(); ++c)
        for (Eigen::Index r = 0; r < n.rows(); ++r) n(r, c) = cplx(g(rng), g(rng));
    const double nn = n.norm();
    if (nn == 0.0) return out;
    n *= ratio * meas.samples.norm() / nn;
    out.samples += n;
    out.provenance = "synthetic-noisy";
    return out;
}

// ---- scene JSON ----

inline nlohmann::json scene_to_json(const SceneSpec& scene)
{
    nlohmann::json j;
    j["version"] = 1;
    j["setup"] = setup_to_json(scene.setup);
    nlohmann::json arr = nlohmann::json::array();
    for (const Shape& s : scene.shapes) {
        nlohmann::json js;
        js["eps"] = {s.eps.real(), s.eps.imag()};
        switch (s.kind) {
            case Shape::Kind::disk:
                js["kind"] = "disk";
                js["center"] = {s.center.x(), s.center.y()};
                js["radius"] = s.radius;
                break;
            case Shape::Kind::rectangle:
                js["kind"] = "rectangle";
                js["corner"] = {s.corner.x(), s.corner.y()};
                js["size"] = {s.size.x(), s.size.y()};
                break;
            case Shape::Kind::ring:
                js["kind"] = "ring";
                js["center"] = {s.center.x(), s.center.y()};
                js["r_inner"] = s.r_inner;
                js["r_outer"] = s.r_outer;
                break;
            case Shape::Kind::polygon: {
                js["kind"] = "polygon";
                nlohmann::json vs = nlohmann::json::array();
                for (const auto& v : s.vertices) vs.push_back({v.x(), v.y()});
                js["vertices"] = vs;
                break;
            }
            case Shape::Kind::austria:
                js["kind"] = "austria";
                js["center"] = {s.center.x(), s.center.y()};
                break;
        }
        arr.push_back(js);
    }
    j["shapes"] = arr;
    return j;
}

inline SceneSpec scene_from_json(const nlohmann::json& j)
{
    SceneSpec scene;
    scene.setup = setup_from_json(j.at("setup"));
    for (const auto& js : j.at("shapes")) {
        Shape s;
        const auto& e = js.at("eps");
        s.eps = cplx(e.at(0).get<double>(), e.at(1).get<double>());
        const std::string kind = js.at("kind").get<std::string>();
        auto vec2 = [](const nlohmann::json& a) {
            return Eigen::Vector2d(a.at(0).get<double>(), a.at(1).get<double>());
        };
        if (kind == "disk") {
            s.kind = Shape::Kind::disk;
            s.center = vec2(js.at("center"));
            s.radius = js.at("radius").get<double>();
        } else if (kind == "rectangle") {
            s.kind = Shape::Kind::rectangle;
            s.corner = vec2(js.at("corner"));
            s.size = vec2(js.at("size"));
        } else if (kind == "ring") {
            s.kind = Shape::Kind::ring;
            s.center = vec2(js.at("center"));
            s.r_inner = js.at("r_inner").get<double>();
            s.r_outer = js.at("r_outer").get<double>();
        } else if (kind == "polygon") {
            s.kind = Shape::Kind::polygon;
            for (const auto& v : js.at("vertices")) s.vertices.push_back(vec2(v));
        } else if (kind == "austria") {
            s.kind = Shape::Kind::austria;
            s.center = vec2(js.at("center"));
        } else {
            throw parse_error("unknown shape kind: " + kind);
        }
        scene.shapes.push_back(s);
    }
    return scene;
}

inline void save_scene(const std::string& path, const SceneSpec& scene)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << scene_to_json(scene).dump(2) << '\n';
}

inline SceneSpec load_scene(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw parse_error("cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    try {
        return scene_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
}

// Tube (annulus, eps 2.5) with an embedded rectangular defect, the
// nondestructive-testing fixture. defect_eps of 1 models a void.
inline SceneSpec tube_with_defect_scene(const Setup& setup, cplx tube_eps = {2.5, 0.0},
                                        cplx defect_eps = {1.0, 0.0}, bool with_defect = true)
{
    SceneSpec scene;
    scene.setup = setup;
    const double L = setup.doi_side;
    Shape tube;
    tube.kind = Shape::Kind::ring;
    tube.center = {0.0, 0.0};
    tube.r_inner = 0.20 * L;
    tube.r_outer = 0.32 * L;
    tube.eps = tube_eps;
    scene.shapes.push_back(tube);
    if (with_defect) {
        Shape defect;
        defect.kind = Shape::Kind::rectangle;
        defect.corner = {-0.06 * L, 0.18 * L};
        defect.size = {0.12 * L, 0.16 * L};
        defect.eps = defect_eps;
        scene.shapes.push_back(defect);
    }
    return scene;
}

} // namespace ipdnn
