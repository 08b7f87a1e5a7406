#include <algorithm>
#include <cmath>
#include <string>

#include "fracflow/solver.hpp"

namespace fracflow {

std::vector<std::string> NewtonConfig::validate() const
{
    std::vector<std::string> out;
    if (!(crit_rel > 0.0 && crit_rel < 1.0)) out.push_back("newton crit must lie in (0, 1)");
    if (max_iter < 1) out.push_back("newton max_iter must be >= 1");
    if (!(backtrack > 0.0 && backtrack < 1.0)) out.push_back("newton backtrack factor must lie in (0, 1)");
    if (!(min_step > 0.0 && min_step <= 1.0)) out.push_back("newton min_step must lie in (0, 1]");
    if (!(saturation_cap > 0.0 && saturation_cap < 1.0)) out.push_back("saturation cap must lie in (0, 1)");
    return out;
}

double l1_norm(const Vector& v) { return v.lpNorm<1>(); }

NewtonResult newton_solve(NewtonProblem& problem, Vector x, const NewtonConfig& config)
{
    NewtonResult res;
    problem.project(x);
    Vector R = problem.residual(x);
    double r = l1_norm(R);
    const double r0 = r;
    res.history.push_back(r);
    const double floor = problem.absolute_floor();
    auto done = [&](double value) { return value <= config.crit_rel * r0 || value <= floor; };
    if (done(r)) {
        res.converged = true;
        res.x = std::move(x);
        return res;
    }
    while (res.iterations < config.max_iter) {
        Vector dx;
        ++res.iterations;
        try {
            dx = problem.direction(x, R);
        } catch (const SingularMatrixError& e) {
            res.singular = true;
            res.message = e.what();
            res.x = std::move(x);
            return res;
        }
        double step = 1.0;
        bool accepted = false;
        while (true) {
            Vector trial = x + step * dx;
            problem.project(trial);
            double rt = std::numeric_limits<double>::infinity();
            Vector Rt;
            try {
                Rt = problem.residual(trial);
                rt = l1_norm(Rt);
            } catch (const std::runtime_error&) {
            } catch (const std::domain_error&) {
            }
            if (std::isfinite(rt) && rt <= r) {
                x = std::move(trial);
                R = std::move(Rt);
                r = rt;
                accepted = true;
                break;
            }
            if (step * config.backtrack < config.min_step * (1.0 - 1e-12)) break;
            step *= config.backtrack;
        }
        if (!accepted) {
            res.message = "residual does not decrease along the Newton direction";
            res.x = std::move(x);
            return res;
        }
        res.history.push_back(r);
        if (done(r)) {
            res.converged = true;
            res.x = std::move(x);
            return res;
        }
    }
    res.message = "no convergence after " + std::to_string(config.max_iter) + " iterations";
    res.x = std::move(x);
    return res;
}

// --- two-phase step -------------------------------------------------------------------

std::vector<double> capillary_caps(const GradientDiscretisation& gd, const PhysicsModel& physics, double cap)
{
    std::vector<double> out(gd.num_dofs, std::numeric_limits<double>::infinity());
    auto lower = [&](int dof, const RockModel& rock) { out[dof] = std::min(out[dof], capillary_cap(rock, cap)); };
    for (const auto& part : gd.matrix_parts) lower(part.dof, physics.matrix_rock(part.region));
    for (const auto& part : gd.fracture_parts) lower(part.dof, physics.fracture_rock(gd.fracture[part.piece].region));
    for (const auto& ip : gd.interface) {
        lower(ip.trace_dof, physics.matrix_rock(ip.matrix_region));
        lower(ip.trace_dof, physics.fracture_rock(gd.fracture[ip.fracture_piece].region));
    }
    return out;
}

TwoPhaseStepProblem::TwoPhaseStepProblem(const Assembler& assembler, const State& prev, double dt,
                                         SparseDirectSolver& solver, const NewtonConfig& config)
    : assembler_(assembler), prev_(prev), dt_(dt), solver_(solver), config_(config)
{
    const auto& gd = assembler.gd();
    free_ = gd.free_dofs();
    active_.assign(gd.num_dofs, 0);
    cells_.assign(gd.num_dofs, 0);
    for (int d : free_) active_[d] = 1;
    for (int i = 0; i < gd.num_dofs; ++i) cells_[i] = gd.kind[i] == DofKind::Cell;
    p_cap_ = capillary_caps(gd, assembler.physics(), config.saturation_cap);
}

Vector TwoPhaseStepProblem::pack(const State& s)
{
    Vector x(2 * s.size());
    for (int i = 0; i < s.size(); ++i) {
        x[2 * i] = s.u[kOil][i];
        x[2 * i + 1] = s.u[kWater][i];
    }
    return x;
}

State TwoPhaseStepProblem::unpack(const Vector& x)
{
    State s(static_cast<int>(x.size() / 2));
    for (int i = 0; i < s.size(); ++i) {
        s.u[kOil][i] = x[2 * i];
        s.u[kWater][i] = x[2 * i + 1];
    }
    return s;
}

Vector TwoPhaseStepProblem::residual(const Vector& x)
{
    const Vector R = assembler_.residual(prev_, unpack(x), dt_);
    Vector out(2 * static_cast<int>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) out.segment<2>(2 * k) = R.segment<2>(2 * free_[k]);
    return out;
}

// Where p < 0 the oil saturation is identically zero; with no oil mobility nearby the oil
// row of the Jacobian vanishes. Such rows are replaced by an equation on p alone.
void TwoPhaseStepProblem::pin_dry_rows(BlockMatrix& J, Vector& rhs, const Vector& x) const
{
    const auto& pat = *J.pattern;
    for (int d : free_) {
        const double p = x[2 * d] - x[2 * d + 1];
        if (!(p < 0.0)) continue;
        bool null = true;
        for (int k = pat.row_ptr[d]; k < pat.row_ptr[d + 1] && null; ++k)
            if (active_[pat.cols[k]] && (J.blocks[k](kOil, kOil) != 0.0 || J.blocks[k](kOil, kWater) != 0.0))
                null = false;
        if (!null) continue;
        Block& diag = J.at(d, d);
        diag(kOil, kOil) = 1.0;
        diag(kOil, kWater) = -1.0;
        // a leftover storage residual can only be removed from the saturated side
        rhs[2 * d] = rhs[2 * d] == 0.0 ? 0.0 : -p;
    }
}

Vector TwoPhaseStepProblem::direction(const Vector& x, const Vector&)
{
    const auto& gd = assembler_.gd();
    ResidualSystem sys = assembler_.assemble(prev_, unpack(x), dt_);
    Vector rhs = -sys.residual;
    pin_dry_rows(sys.jacobian, rhs, x);
    ReducedSystem red;
    try {
        red = eliminate_cells(sys.jacobian, rhs, active_, cells_);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("singular Jacobian: ") + e.what(), e.row());
    }
    Vector dx_red;
    try {
        dx_red = solver_.solve(red.matrix, red.rhs);
    } catch (const SingularMatrixError& e) {
        if (e.row() >= 0) {
            const int dof = red.kept[e.row() / 2];
            static const char* kinds[] = {"node", "sector", "fracture", "cell"};
            throw SingularMatrixError("singular Jacobian: null row at " +
                                          std::string(kinds[static_cast<int>(gd.kind[dof])]) + " DOF " +
                                          std::to_string(dof) + ", phase " + std::to_string(e.row() % 2 + 1),
                                      dof);
        }
        throw;
    }
    return back_substitute(sys.jacobian, red, dx_red);
}

void TwoPhaseStepProblem::project(Vector& x)
{
    if (!config_.project) return;
    for (int d : free_) {
        const double p = x[2 * d] - x[2 * d + 1];
        if (p > p_cap_[d]) x[2 * d] = x[2 * d + 1] + p_cap_[d];
    }
}

double TwoPhaseStepProblem::absolute_floor() const
{
    return config_.abs_floor * assembler_.total_pore_volume() / dt_;
}

TwoPhaseStepper::TwoPhaseStepper(const Assembler& assembler, NewtonConfig config)
    : assembler_(assembler), config_(config)
{
}

StepAttempt TwoPhaseStepper::attempt(const State& prev, double, double dt)
{
    TwoPhaseStepProblem problem(assembler_, prev, dt, solver_, config_);
    NewtonResult nr = newton_solve(problem, TwoPhaseStepProblem::pack(prev), config_);
    StepAttempt a;
    a.converged = nr.converged;
    a.singular = nr.singular;
    a.iterations = nr.iterations;
    a.message = nr.message;
    a.history = std::move(nr.history);
    a.state = TwoPhaseStepProblem::unpack(nr.x);
    return a;
}

}  // namespace fracflow
