#include "fracflow/energy_audit.hpp"

#include <cmath>

namespace fracflow {

double energy_density(const RockModel& rock, double p)
{
    if (rock.capillary.mirrored) return B_function(rock, saturation(rock, p));
    if (p <= 0.0) return 0.0;
    const double a = rock.capillary.a;
    return -a * std::expm1(-p / a) - p * std::exp(-p / a);
}

double stored_energy(const Assembler& assembler, const State& state)
{
    const auto& gd = assembler.gd();
    const auto& ph = assembler.physics();
    const Vector p = state.p();
    double e = 0.0;
    for (const auto& part : gd.matrix_parts) {
        const auto& rock = ph.matrix_rock(part.region);
        e += rock.porosity * part.measure * energy_density(rock, p[part.dof]);
    }
    for (const auto& part : gd.fracture_parts) {
        const auto& rock = ph.fracture_rock(gd.fracture[part.piece].region);
        e += rock.porosity * rock.width * part.length() * energy_density(rock, p[part.dof]);
    }
    const double theta = ph.interface.theta;
    for (const auto& ip : gd.interface) {
        const auto& rm = ph.matrix_rock(ip.matrix_region);
        const auto& rf = ph.fracture_rock(gd.fracture[ip.fracture_piece].region);
        const double w = eta(ph.interface, rf.width) * ip.length();
        if (w == 0.0) continue;
        const double q = p[ip.trace_dof];
        e += w * (theta * energy_density(rm, q) + (1.0 - theta) * energy_density(rf, q));
    }
    return e;
}

EnergyTerms energy_terms(const Assembler& assembler, const State& prev, const State& next, double dt)
{
    const auto& gd = assembler.gd();
    const auto& ph = assembler.physics();
    const auto& fluid = ph.fluid;
    const Point g = ph.gravity_vector();
    const Vector p = next.p();
    const auto& u = next.u;
    EnergyTerms et;
    et.storage = stored_energy(assembler, next) - stored_energy(assembler, prev);

    for (const auto& piece : gd.matrix) {
        const auto& rock = ph.matrix_rock(piece.region);
        for (int a = 0; a < kNumPhases; ++a) {
            double K = 0.0;
            for (int q = piece.part_begin; q < piece.part_end; ++q) {
                const auto& part = gd.matrix_parts[q];
                K += part.measure * mobility_at(rock, fluid, a, p[part.dof]);
            }
            K *= rock.permeability;
            Point grad(0.0, 0.0);
            for (int j = 0; j < 3; ++j)
                if (piece.dofs[j] >= 0) grad += piece.grad[j] * u[a][piece.dofs[j]];
            et.diffusion += K * grad.squaredNorm();
            et.gravity_work += K * fluid.density[a] * g.dot(grad);
        }
    }
    for (std::size_t e = 0; e < gd.fracture.size(); ++e) {
        const auto& piece = gd.fracture[e];
        const auto& rock = ph.fracture_rock(piece.region);
        const auto& h0 = gd.fracture_parts[2 * e];
        const auto& h1 = gd.fracture_parts[2 * e + 1];
        for (int a = 0; a < kNumPhases; ++a) {
            const double K = rock.permeability * rock.width *
                             (h0.length() * mobility_at(rock, fluid, a, p[h0.dof]) +
                              h1.length() * mobility_at(rock, fluid, a, p[h1.dof]));
            const double grad = (u[a][piece.dofs[1]] - u[a][piece.dofs[0]]) / piece.length;
            et.diffusion += K * grad * grad;
            et.gravity_work += K * fluid.density[a] * g.dot(piece.tangent) * grad;
        }
    }
    for (const auto& ip : gd.interface) {
        const auto& rm = ph.matrix_rock(ip.matrix_region);
        const auto& rf = ph.fracture_rock(gd.fracture[ip.fracture_piece].region);
        const double T = half_transmissibility(rf) * ip.length();
        for (int a = 0; a < kNumPhases; ++a) {
            const double shift = fluid.density[a] * g.dot(ip.normal) * 0.5 * rf.width;
            const double jump = u[a][ip.trace_dof] - u[a][ip.fracture_dof] + shift;
            const double F = coupling_flux(interface_mobility_at(ph.interface, rm, rf, fluid, a, p[ip.trace_dof]),
                                           mobility_at(rf, fluid, a, p[ip.fracture_dof]), T, jump);
            et.coupling += F * jump;
            et.gravity_work += F * shift;
        }
    }

    const Sources& src = assembler.sources();
    for (const auto& part : gd.matrix_parts)
        for (int a = 0; a < kNumPhases; ++a)
            et.source_work += src.matrix_rate(part.region, a) * part.measure * u[a][part.dof];
    for (const auto& part : gd.fracture_parts) {
        const int region = gd.fracture[part.piece].region;
        const double measure = ph.fracture_rock(region).width * part.length();
        for (int a = 0; a < kNumPhases; ++a)
            et.source_work += src.fracture_rate(region, a) * measure * u[a][part.dof];
    }

    const Vector R = assembler.residual(prev, next, dt);
    for (int i = 0; i < gd.num_dofs; ++i)
        if (gd.dirichlet[i])
            for (int a = 0; a < kNumPhases; ++a) et.boundary_work += u[a][i] * R[2 * i + a];
    return et;
}

EnergyAudit::EnergyAudit(const Assembler& assembler, double criterion, double factor)
    : assembler_(assembler), criterion_(criterion), factor_(factor)
{
}

const EnergyStep& EnergyAudit::record(const State& prev, const State& next, double t, double dt)
{
    EnergyStep s;
    s.t = t;
    s.dt = dt;
    s.terms = energy_terms(assembler_, prev, next, dt);
    lhs_ += s.terms.lhs(dt);
    rhs_ += s.terms.rhs(dt);
    magnitude_ += s.terms.rhs_magnitude(dt);
    s.lhs = lhs_;
    s.rhs = rhs_;
    s.slack = rhs_ - lhs_;
    s.tolerance = factor_ * criterion_ * magnitude_;
    s.ok = s.slack >= -s.tolerance;
    steps_.push_back(s);
    return steps_.back();
}

void EnergyAudit::restore(double lhs, double rhs, double magnitude)
{
    lhs_ = lhs;
    rhs_ = rhs;
    magnitude_ = magnitude;
}

bool EnergyAudit::ok() const
{
    for (const auto& s : steps_)
        if (!s.ok) return false;
    return true;
}

double EnergyAudit::worst_ratio() const
{
    double w = 0.0;
    for (const auto& s : steps_)
        if (s.slack < 0.0) w = std::max(w, s.tolerance > 0.0 ? -s.slack / s.tolerance : INFINITY);
    return w;
}

double dual_norm_time_derivative(const GDNormCache& cache, const PhysicsModel& physics, const State& prev,
                                 const State& next, double dt)
{
    const auto& gd = cache.gd();
    const Vector pn = next.p(), pp = prev.p();
    Vector r = Vector::Zero(gd.num_dofs);
    for (const auto& part : gd.matrix_parts) {
        const auto& rock = physics.matrix_rock(part.region);
        r[part.dof] += rock.porosity * part.measure * (saturation(rock, pn[part.dof]) - saturation(rock, pp[part.dof]));
    }
    for (const auto& part : gd.fracture_parts) {
        const auto& rock = physics.fracture_rock(gd.fracture[part.piece].region);
        r[part.dof] += rock.porosity * rock.width * part.length() *
                       (saturation(rock, pn[part.dof]) - saturation(rock, pp[part.dof]));
    }
    for (const auto& ip : gd.interface) {
        const auto& rm = physics.matrix_rock(ip.matrix_region);
        const auto& rf = physics.fracture_rock(gd.fracture[ip.fracture_piece].region);
        const int t = ip.trace_dof;
        r[t] += eta(physics.interface, rf.width) * ip.length() *
                (interface_saturation(physics.interface, rm, rf, pn[t]) -
                 interface_saturation(physics.interface, rm, rf, pp[t]));
    }
    return cache.dual_norm(cache.restrict_to_free(r / dt));
}

}  // namespace fracflow
