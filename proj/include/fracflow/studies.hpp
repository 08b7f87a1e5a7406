#pragma once

#include <string>
#include <vector>

#include "fracflow/gdm.hpp"
#include "fracflow/mesh.hpp"

namespace fracflow {

/// GD property estimates on one mesh level.
struct GdmLevel {
    int level = 0;
    double h = 0.0;
    int num_dofs = 0;
    double consistency = 0.0;          // S_D
    double limit_conformity = 0.0;     // W_D
    bool quadrature_insufficient = false;
    CoercivityEstimate coercivity;     // C_D bracket
    std::vector<double> translates;    // T_D at the sample shifts
};

struct GdmStudyOptions {
    int levels = 3;                    // refinements after the base mesh
    int quad_level = 1;
    std::vector<Point> shifts{Point(0.5, 1.0)};
    EigenOptions eigen;
};

/// S_D, W_D, C_D and T_D for the base mesh and each uniform refinement, with all four
/// boundaries as Dirichlet boundaries and smooth fields scaled to the domain.
std::vector<GdmLevel> gdm_study(const Mesh& base, const GdmStudyOptions& options = {});

std::string gdm_csv(const std::vector<GdmLevel>& levels);

struct MmsLevel {
    int level = 0;
    double h = 0.0;
    int num_dofs = 0;
    double l2_error = 0.0;   // || Pi u_D - u ||_L2
    double grad_error = 0.0; // || grad_D u_D - grad u ||_L2
};

/// Linear Darcy -div(K grad u) = f with u = sin(pi x / lx) sin(pi y / ly) + x / lx on the
/// unfractured structured mesh and its refinements (Dirichlet data on all boundaries).
std::vector<MmsLevel> mms_study(const StructuredMeshParams& base, int levels, double permeability = 1.0);

std::string mms_csv(const std::vector<MmsLevel>& levels);

/// Least-squares slope of log2(error) against -level.
double convergence_slope(const std::vector<double>& errors);

}  // namespace fracflow
