#pragma once

#include <random>

#include "fracflow/assembly.hpp"
#include "fracflow/mesh.hpp"
#include "fracflow/vag.hpp"

namespace fracflow::testing {

inline FractureSpec vertical_fracture(double x, double ly, int id = 0)
{
    FractureSpec f;
    f.id = id;
    f.polyline = {Point(x, 0.0), Point(x, ly)};
    return f;
}

inline Mesh reservoir_mesh(int nx, int ny, bool fractured = true)
{
    StructuredMeshParams p;
    p.nx = nx;
    p.ny = ny;
    if (fractured) p.fractures.push_back(vertical_fracture(5.0, 20.0));
    return build_structured_mesh(p);
}

/// Water pressure near 2 bar, capillary pressure drawn in [p_lo, p_hi].
inline State random_state(int n, std::mt19937& rng, double p_lo, double p_hi)
{
    std::uniform_real_distribution<double> w(1.5e5, 2.5e5), c(p_lo, p_hi);
    State s(n);
    for (int i = 0; i < n; ++i) {
        s.u[kWater][i] = w(rng);
        s.u[kOil][i] = s.u[kWater][i] + c(rng);
    }
    return s;
}

}  // namespace fracflow::testing
