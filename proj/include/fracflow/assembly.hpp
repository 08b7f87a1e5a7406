#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracflow/elimination.hpp"
#include "fracflow/gdm.hpp"
#include "fracflow/physics.hpp"

namespace fracflow {

/// Phase pressures per DOF at one time level (Dirichlet entries included).
struct State {
    std::array<Vector, kNumPhases> u;

    State() = default;
    explicit State(int n) { u[0] = u[1] = Vector::Zero(n); }
    int size() const { return static_cast<int>(u[0].size()); }
    Vector p() const { return u[0] - u[1]; }
    double capillary(int dof) const { return u[0][dof] - u[1][dof]; }
};

/// Dirichlet data on one boundary part: water pressure and capillary pressure.
struct DirichletValue {
    double water_pressure = 0.0;
    double capillary_pressure = 0.0;
};

struct BoundarySpec {
    std::array<std::optional<DirichletValue>, kNumBoundaryTags> dirichlet;

    std::uint8_t dirichlet_mask() const;
    /// Bottom: water 3 bar, capillary 0.1 bar. Top: water 1 bar, capillary 0. Sides: no flow.
    static BoundarySpec reservoir();
    /// Zero values on the listed boundaries.
    static BoundarySpec homogeneous(std::uint8_t mask);
};

/// Sets u^2 and u^1 = u^2 + p_c on every Dirichlet DOF of the discretisation.
State apply_boundary_conditions(const GradientDiscretisation& gd, const BoundarySpec& bc, State state);

/// Constant volumetric source rates per region and phase (1/s); missing entries are zero.
struct Sources {
    std::vector<std::array<double, kNumPhases>> matrix;
    std::vector<std::array<double, kNumPhases>> fracture;

    double matrix_rate(int region, int phase) const;
    double fracture_rate(int region, int phase) const;
};

/// Q = T_f (k_a [s]^+ - k_f [s]^-): matrix-to-fracture flux density of one phase.
double coupling_flux(double k_a, double k_f, double T_f, double jump);

/// Residual and Jacobian per phase: entry 2 * dof + phase, every DOF (Dirichlet rows are
/// evaluated too; they carry the boundary fluxes).
struct ResidualSystem {
    Vector residual;
    BlockMatrix jacobian;
};

/// Residual split by term, for balance checks.
struct ResidualTerms {
    Vector accumulation;  // matrix, fracture and interface storage change over dt
    Vector transport;     // diffusion and coupling
    Vector source;        // -(source work)
};

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Assembler {
public:
    Assembler(const GradientDiscretisation& gd, const PhysicsModel& physics, Sources sources = {}, int threads = 1);

    const GradientDiscretisation& gd() const { return *gd_; }
    const PhysicsModel& physics() const { return *physics_; }
    const BlockPattern& pattern() const { return pattern_; }
    const Sources& sources() const { return sources_; }
    int threads() const { return threads_; }
    void set_threads(int t) { threads_ = std::max(1, t); }

    Vector residual(const State& prev, const State& next, double dt) const;
    ResidualSystem assemble(const State& prev, const State& next, double dt) const;
    ResidualTerms terms(const State& prev, const State& next, double dt) const;

    /// Porous volume per DOF (matrix, fracture and interface storage capacity).
    const std::vector<double>& pore_volume() const { return pore_volume_; }
    double total_pore_volume() const;

    static constexpr int kChunks = 16;

private:
    enum class Mode { Residual, Jacobian, Terms };
    void run(Mode mode, const State& prev, const State& next, double dt, Vector* R, BlockMatrix* J,
             ResidualTerms* terms) const;

    const GradientDiscretisation* gd_;
    const PhysicsModel* physics_;
    Sources sources_;
    int threads_;
    BlockPattern pattern_;
    std::vector<double> pore_volume_;
};

/// Sum of the residual over the given DOFs, per phase.
std::array<double, kNumPhases> residual_sum(const Vector& R, const std::vector<int>& dofs);

}  // namespace fracflow
