#include "fracflow/assembly.hpp"

#include <cmath>

#include "fracflow/parallel.hpp"

namespace fracflow {

// --- boundary conditions ----------------------------------------------------------

std::uint8_t BoundarySpec::dirichlet_mask() const
{
    std::uint8_t m = 0;
    for (int t = 0; t < kNumBoundaryTags; ++t)
        if (dirichlet[t]) m |= static_cast<std::uint8_t>(1u << t);
    return m;
}

BoundarySpec BoundarySpec::reservoir()
{
    BoundarySpec bc;
    bc.dirichlet[static_cast<int>(BoundaryTag::Bottom)] = DirichletValue{3.0 * units::bar, 0.1 * units::bar};
    bc.dirichlet[static_cast<int>(BoundaryTag::Top)] = DirichletValue{1.0 * units::bar, 0.0};
    return bc;
}

BoundarySpec BoundarySpec::homogeneous(std::uint8_t mask)
{
    BoundarySpec bc;
    for (int t = 0; t < kNumBoundaryTags; ++t)
        if (mask & (1u << t)) bc.dirichlet[t] = DirichletValue{};
    return bc;
}

State apply_boundary_conditions(const GradientDiscretisation& gd, const BoundarySpec& bc, State state)
{
    if (state.size() != gd.num_dofs) throw std::invalid_argument("state size does not match the discretisation");
    for (int i = 0; i < gd.num_dofs; ++i) {
        if (!gd.dirichlet[i]) continue;
        const DirichletValue* value = nullptr;
        for (int t = 0; t < kNumBoundaryTags && !value; ++t)
            if ((gd.boundary_mask[i] & (1u << t)) && bc.dirichlet[t]) value = &*bc.dirichlet[t];
        if (!value) throw std::invalid_argument("missing boundary condition for Dirichlet DOF " + std::to_string(i));
        state.u[kWater][i] = value->water_pressure;
        state.u[kOil][i] = value->water_pressure + value->capillary_pressure;
    }
    return state;
}

double Sources::matrix_rate(int region, int phase) const
{
    return region < static_cast<int>(matrix.size()) ? matrix[region][phase] : 0.0;
}

double Sources::fracture_rate(int region, int phase) const
{
    return region < static_cast<int>(fracture.size()) ? fracture[region][phase] : 0.0;
}

double coupling_flux(double k_a, double k_f, double T_f, double jump)
{
    return T_f * (k_a * std::max(jump, 0.0) - k_f * std::max(-jump, 0.0));
}

std::array<double, kNumPhases> residual_sum(const Vector& R, const std::vector<int>& dofs)
{
    std::array<double, kNumPhases> s{0.0, 0.0};
    for (int d : dofs)
        for (int a = 0; a < kNumPhases; ++a) s[a] += R[2 * d + a];
    return s;
}

// --- assembler ---------------------------------------------------------------------

Assembler::Assembler(const GradientDiscretisation& gd, const PhysicsModel& physics, Sources sources, int threads)
    : gd_(&gd), physics_(&physics), sources_(std::move(sources)), threads_(std::max(1, threads)),
      pattern_(discretisation_pattern(gd))
{
    for (const auto& piece : gd.fracture) {
        const auto& rock = physics.fracture_rock(piece.region);
        if (std::abs(rock.width - piece.width) > 1e-12 * rock.width)
            throw DomainError("fracture width of the mesh and of the rock model differ");
    }
    for (const auto& piece : gd.matrix) physics.matrix_rock(piece.region);
    pore_volume_.assign(gd.num_dofs, 0.0);
    for (const auto& part : gd.matrix_parts) pore_volume_[part.dof] += physics.matrix_rock(part.region).porosity * part.measure;
    for (const auto& part : gd.fracture_parts) {
        const auto& rock = physics.fracture_rock(gd.fracture[part.piece].region);
        pore_volume_[part.dof] += rock.porosity * rock.width * part.length();
    }
    for (const auto& ip : gd.interface) {
        const auto& rock = physics.fracture_rock(gd.fracture[ip.fracture_piece].region);
        pore_volume_[ip.trace_dof] += eta(physics.interface, rock.width) * ip.length();
    }
}

double Assembler::total_pore_volume() const
{
    double s = 0.0;
    for (double v : pore_volume_) s += v;
    return s;
}

namespace {

enum Term { kAcc = 0, kTrans = 1, kSrc = 2 };

struct Sink {
    const BlockPattern* pattern = nullptr;
    bool jacobian = false;
    bool split = false;
    Vector R;
    std::array<Vector, 3> parts;
    std::vector<Block> J;

    void add(int dof, int phase, double v, Term term)
    {
        R[2 * dof + phase] += v;
        if (split) parts[term][2 * dof + phase] += v;
    }
    Block& block(int i, int j) { return J[pattern->slot(i, j)]; }
    // derivative of (dof, phase) with respect to p at column dof c
    void add_dp(int row, int phase, int col, double v)
    {
        Block& b = block(row, col);
        b(phase, kOil) += v;
        b(phase, kWater) -= v;
    }
};

}  // namespace

void Assembler::run(Mode mode, const State& prev, const State& next, double dt, Vector* R_out, BlockMatrix* J_out,
                    ResidualTerms* terms_out) const
{
    const auto& gd = *gd_;
    const auto& ph = *physics_;
    const auto& fluid = ph.fluid;
    const Point g = ph.gravity_vector();
    const int n = gd.num_dofs;
    if (prev.size() != n || next.size() != n) throw std::invalid_argument("state size does not match the discretisation");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const Vector pn = next.p(), pp = prev.p();
    const auto& un = next.u;

    std::vector<Sink> sinks(kChunks);
    parallel_for(kChunks, threads_, [&](int k) {
        Sink& s = sinks[k];
        s.pattern = &pattern_;
        s.jacobian = mode == Mode::Jacobian;
        s.split = mode == Mode::Terms;
        s.R = Vector::Zero(2 * n);
        if (s.split)
            for (auto& v : s.parts) v = Vector::Zero(2 * n);
        if (s.jacobian) s.J.assign(pattern_.nnz(), Block::Zero());

        // storage and sources on matrix parts
        auto [m0, m1] = chunk_range(static_cast<int>(gd.matrix_parts.size()), kChunks, k);
        for (int q = m0; q < m1; ++q) {
            const auto& part = gd.matrix_parts[q];
            const auto& rock = ph.matrix_rock(part.region);
            const int d = part.dof;
            const double c = rock.porosity * part.measure / dt;
            const double dS = saturation(rock, pn[d]) - saturation(rock, pp[d]);
            s.add(d, kOil, c * dS, kAcc);
            s.add(d, kWater, -c * dS, kAcc);
            for (int a = 0; a < kNumPhases; ++a) {
                const double h = sources_.matrix_rate(part.region, a);
                if (h != 0.0) s.add(d, a, -h * part.measure, kSrc);
            }
            if (s.jacobian) {
                const double ds = c * saturation_derivative(rock, pn[d]);
                s.add_dp(d, kOil, d, ds);
                s.add_dp(d, kWater, d, -ds);
            }
        }

        // matrix diffusion on pieces
        auto [p0, p1] = chunk_range(static_cast<int>(gd.matrix.size()), kChunks, k);
        for (int e = p0; e < p1; ++e) {
            const auto& piece = gd.matrix[e];
            const auto& rock = ph.matrix_rock(piece.region);
            for (int a = 0; a < kNumPhases; ++a) {
                double K = 0.0;
                for (int q = piece.part_begin; q < piece.part_end; ++q) {
                    const auto& part = gd.matrix_parts[q];
                    K += part.measure * mobility_at(rock, fluid, a, pn[part.dof]);
                }
                K *= rock.permeability;
                Point grad(0.0, 0.0);
                for (int j = 0; j < 3; ++j)
                    if (piece.dofs[j] >= 0) grad += piece.grad[j] * un[a][piece.dofs[j]];
                const Point F = grad - fluid.density[a] * g;
                for (int j = 0; j < 3; ++j)
                    if (piece.dofs[j] >= 0) s.add(piece.dofs[j], a, K * F.dot(piece.grad[j]), kTrans);
                if (!s.jacobian) continue;
                for (int j = 0; j < 3; ++j) {
                    if (piece.dofs[j] < 0) continue;
                    for (int l = 0; l < 3; ++l)
                        if (piece.dofs[l] >= 0) s.block(piece.dofs[j], piece.dofs[l])(a, a) += K * piece.grad[l].dot(piece.grad[j]);
                }
                for (int q = piece.part_begin; q < piece.part_end; ++q) {
                    const auto& part = gd.matrix_parts[q];
                    const double dk = rock.permeability * part.measure * mobility_dp(rock, fluid, a, pn[part.dof]);
                    if (dk == 0.0) continue;
                    for (int j = 0; j < 3; ++j)
                        if (piece.dofs[j] >= 0) s.add_dp(piece.dofs[j], a, part.dof, dk * F.dot(piece.grad[j]));
                }
            }
        }

        // fracture storage and sources
        auto [f0, f1] = chunk_range(static_cast<int>(gd.fracture_parts.size()), kChunks, k);
        for (int q = f0; q < f1; ++q) {
            const auto& part = gd.fracture_parts[q];
            const int region = gd.fracture[part.piece].region;
            const auto& rock = ph.fracture_rock(region);
            const int d = part.dof;
            const double measure = rock.width * part.length();
            const double c = rock.porosity * measure / dt;
            const double dS = saturation(rock, pn[d]) - saturation(rock, pp[d]);
            s.add(d, kOil, c * dS, kAcc);
            s.add(d, kWater, -c * dS, kAcc);
            for (int a = 0; a < kNumPhases; ++a) {
                const double h = sources_.fracture_rate(region, a);
                if (h != 0.0) s.add(d, a, -h * measure, kSrc);
            }
            if (s.jacobian) {
                const double ds = c * saturation_derivative(rock, pn[d]);
                s.add_dp(d, kOil, d, ds);
                s.add_dp(d, kWater, d, -ds);
            }
        }

        // fracture diffusion
        auto [e0, e1] = chunk_range(static_cast<int>(gd.fracture.size()), kChunks, k);
        for (int e = e0; e < e1; ++e) {
            const auto& piece = gd.fracture[e];
            const auto& rock = ph.fracture_rock(piece.region);
            const std::array<double, 2> gc{-1.0 / piece.length, 1.0 / piece.length};
            const auto& half0 = gd.fracture_parts[2 * e];
            const auto& half1 = gd.fracture_parts[2 * e + 1];
            for (int a = 0; a < kNumPhases; ++a) {
                const double K = rock.permeability * rock.width *
                                 (half0.length() * mobility_at(rock, fluid, a, pn[half0.dof]) +
                                  half1.length() * mobility_at(rock, fluid, a, pn[half1.dof]));
                const double grad = gc[0] * un[a][piece.dofs[0]] + gc[1] * un[a][piece.dofs[1]];
                const double F = grad - fluid.density[a] * g.dot(piece.tangent);
                for (int j = 0; j < 2; ++j) s.add(piece.dofs[j], a, K * F * gc[j], kTrans);
                if (!s.jacobian) continue;
                for (int j = 0; j < 2; ++j)
                    for (int l = 0; l < 2; ++l) s.block(piece.dofs[j], piece.dofs[l])(a, a) += K * gc[l] * gc[j];
                for (const auto* half : {&half0, &half1}) {
                    const double dk = rock.permeability * rock.width * half->length() *
                                      mobility_dp(rock, fluid, a, pn[half->dof]);
                    if (dk == 0.0) continue;
                    for (int j = 0; j < 2; ++j) s.add_dp(piece.dofs[j], a, half->dof, dk * F * gc[j]);
                }
            }
        }

        // interfaces: storage in the layer and upwind coupling
        auto [i0, i1] = chunk_range(static_cast<int>(gd.interface.size()), kChunks, k);
        for (int q = i0; q < i1; ++q) {
            const auto& ip = gd.interface[q];
            const auto& rock_m = ph.matrix_rock(ip.matrix_region);
            const auto& rock_f = ph.fracture_rock(gd.fracture[ip.fracture_piece].region);
            const int t = ip.trace_dof, f = ip.fracture_dof;
            const double len = ip.length();
            const double c = eta(ph.interface, rock_f.width) * len / dt;
            if (c != 0.0) {
                const double dS = interface_saturation(ph.interface, rock_m, rock_f, pn[t]) -
                                  interface_saturation(ph.interface, rock_m, rock_f, pp[t]);
                s.add(t, kOil, c * dS, kAcc);
                s.add(t, kWater, -c * dS, kAcc);
                if (s.jacobian) {
                    const double ds = c * interface_saturation_derivative(ph.interface, rock_m, rock_f, pn[t]);
                    s.add_dp(t, kOil, t, ds);
                    s.add_dp(t, kWater, t, -ds);
                }
            }
            const double T = half_transmissibility(rock_f) * len;
            for (int a = 0; a < kNumPhases; ++a) {
                const double jump =
                    un[a][t] - un[a][f] + fluid.density[a] * g.dot(ip.normal) * 0.5 * rock_f.width;
                const double ka = interface_mobility_at(ph.interface, rock_m, rock_f, fluid, a, pn[t]);
                const double kf = mobility_at(rock_f, fluid, a, pn[f]);
                const double F = coupling_flux(ka, kf, T, jump);
                s.add(t, a, F, kTrans);
                s.add(f, a, -F, kTrans);
                if (!s.jacobian) continue;
                const bool up = jump >= 0.0;
                const double dFdJ = T * (up ? ka : kf);
                s.block(t, t)(a, a) += dFdJ;
                s.block(t, f)(a, a) -= dFdJ;
                s.block(f, t)(a, a) -= dFdJ;
                s.block(f, f)(a, a) += dFdJ;
                const int col = up ? t : f;
                const double dk = up ? interface_mobility_dp(ph.interface, rock_m, rock_f, fluid, a, pn[t])
                                     : mobility_dp(rock_f, fluid, a, pn[f]);
                const double dFdp = T * dk * jump;
                if (dFdp != 0.0) {
                    s.add_dp(t, a, col, dFdp);
                    s.add_dp(f, a, col, -dFdp);
                }
            }
        }
    });

    // fixed-order reduction
    Vector R = Vector::Zero(2 * n);
    for (const auto& s : sinks) R += s.R;
    for (int i = 0; i < 2 * n; ++i)
        if (!std::isfinite(R[i]))
            throw AssemblyError("non-finite residual at DOF " + std::to_string(i / 2) + " phase " + std::to_string(i % 2 + 1));
    if (R_out) *R_out = std::move(R);
    if (terms_out) {
        for (auto* v : {&terms_out->accumulation, &terms_out->transport, &terms_out->source}) *v = Vector::Zero(2 * n);
        for (const auto& s : sinks) {
            terms_out->accumulation += s.parts[kAcc];
            terms_out->transport += s.parts[kTrans];
            terms_out->source += s.parts[kSrc];
        }
    }
    if (J_out) {
        *J_out = BlockMatrix(&pattern_);
        const int nnz = pattern_.nnz();
        parallel_for(kChunks, threads_, [&](int k) {
            auto [b0, b1] = chunk_range(nnz, kChunks, k);
            for (int b = b0; b < b1; ++b) {
                Block sum = Block::Zero();
                for (const auto& s : sinks) sum += s.J[b];
                J_out->blocks[b] = sum;
            }
        });
        for (const auto& b : J_out->blocks)
            if (!b.allFinite()) throw AssemblyError("non-finite Jacobian entry");
    }
}

Vector Assembler::residual(const State& prev, const State& next, double dt) const
{
    Vector R;
    run(Mode::Residual, prev, next, dt, &R, nullptr, nullptr);
    return R;
}

ResidualSystem Assembler::assemble(const State& prev, const State& next, double dt) const
{
    ResidualSystem sys;
    run(Mode::Jacobian, prev, next, dt, &sys.residual, &sys.jacobian, nullptr);
    return sys;
}

ResidualTerms Assembler::terms(const State& prev, const State& next, double dt) const
{
    ResidualTerms t;
    run(Mode::Terms, prev, next, dt, nullptr, nullptr, &t);
    return t;
}

}  // namespace fracflow
