#pragma once

// Shared fixtures for the test suites.

#include "ipdnn/scenario.hpp"
#include "ipdnn/types.hpp"

namespace ipdnn::testing {

// Area-fraction rasterization of a centered disk: each cell carries the
// permittivity weighted by the covered fraction (8x8 subsampling). Used
// when comparing against the analytic cylinder series, where the binary
// staircase boundary would otherwise dominate the error budget.
inline PermittivityMap frac_disk(const Setup& setup, double radius, cplx eps)
{
    const Grid grid = Grid::make(setup);
    const int n = setup.n_side;
    const int sub = 8;
    PermittivityMap m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2d& c = grid.cell_centers[i * n + j];
            int inside = 0;
            for (int a = 0; a < sub; ++a)
                for (int b = 0; b < sub; ++b) {
                    const double x = c.x() + grid.cell_size * ((a + 0.5) / sub - 0.5);
                    const double y = c.y() + grid.cell_size * ((b + 0.5) / sub - 0.5);
                    if (x * x + y * y <= radius * radius) ++inside;
                }
            const double f = static_cast<double>(inside) / (sub * sub);
            m.values(i, j) = 1.0 + f * (eps - 1.0);
        }
    return m;
}

inline SceneSpec centered_disk_scene(const Setup& setup, double radius, cplx eps)
{
    SceneSpec scene;
    scene.setup = setup;
    Shape d;
    d.kind = Shape::Kind::disk;
    d.eps = eps;
    d.center = {0.0, 0.0};
    d.radius = radius;
    scene.shapes = {d};
    return scene;
}

inline Setup small_setup(int n_side, int n_tx, int n_rx)
{
    return make_ring_setup(4e9, 0.15, n_side, n_tx, n_rx, 20.0 * c0 / 4e9);
}

} // namespace ipdnn::testing
