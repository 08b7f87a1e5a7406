#pragma once

#include <vector>

#include "fracflow/assembly.hpp"

namespace fracflow {

/// Energy density B(S(p)) of one rock type, evaluated from the capillary pressure.
double energy_density(const RockModel& rock, double p);

/// Terms of the discrete energy balance over one step.
struct EnergyTerms {
    double storage = 0.0;      // change of the B energies (matrix, fracture, layers)
    double diffusion = 0.0;    // sum over phases of k lambda |grad u|^2, per unit time
    double coupling = 0.0;     // upwind interface fluxes times jumps, per unit time
    double source_work = 0.0;  // per unit time
    double gravity_work = 0.0;
    double boundary_work = 0.0;

    double lhs(double dt) const { return storage + dt * (diffusion + coupling); }
    double rhs(double dt) const { return dt * (source_work + gravity_work + boundary_work); }
    double rhs_magnitude(double dt) const
    {
        return dt * (std::abs(source_work) + std::abs(gravity_work) + std::abs(boundary_work));
    }
};

struct EnergyStep {
    double t = 0.0;   // end of the step
    double dt = 0.0;
    EnergyTerms terms;
    double lhs = 0.0;   // cumulative from the first audited step
    double rhs = 0.0;
    double slack = 0.0;
    double tolerance = 0.0;
    bool ok = true;
};

/// Stored energy of a state: sum of phi B over matrix and fracture parts and eta B_a over
/// the interfacial layers.
double stored_energy(const Assembler& assembler, const State& state);

/// Energy terms of one implicit step from prev to next.
EnergyTerms energy_terms(const Assembler& assembler, const State& prev, const State& next, double dt);

/// Cumulative ledger of the energy inequality over a trajectory.
class EnergyAudit {
public:
    /// tolerance = factor * criterion * sum of |RHS| contributions.
    EnergyAudit(const Assembler& assembler, double criterion, double factor = 10.0);

    const EnergyStep& record(const State& prev, const State& next, double t, double dt);
    const std::vector<EnergyStep>& steps() const { return steps_; }
    bool ok() const;
    /// Most negative slack relative to its tolerance (0 when none is negative).
    double worst_ratio() const;

    double cumulative_lhs() const { return lhs_; }
    double cumulative_rhs() const { return rhs_; }
    double cumulative_magnitude() const { return magnitude_; }
    /// Continues a ledger from saved cumulative sums.
    void restore(double lhs, double rhs, double magnitude);

private:
    const Assembler& assembler_;
    double criterion_, factor_;
    double lhs_ = 0.0, rhs_ = 0.0, magnitude_ = 0.0;
    std::vector<EnergyStep> steps_;
};

/// Dual norm on the free DOFs of the accumulation functional (S(next) - S(prev)) / dt.
double dual_norm_time_derivative(const GDNormCache& cache, const PhysicsModel& physics, const State& prev,
                                 const State& next, double dt);

}  // namespace fracflow
