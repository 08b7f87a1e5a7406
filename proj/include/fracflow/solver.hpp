#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fracflow/assembly.hpp"
#include "fracflow/linear_solve.hpp"

namespace fracflow {

struct NewtonConfig {
    double crit_rel = 1e-6;        // L1 residual relative to the first residual of the step
    int max_iter = 35;
    double backtrack = 0.5;
    double min_step = 1.0 / 64.0;
    double saturation_cap = 1.0 - 1e-14;
    double abs_floor = 1e-13;      // times pore volume / dt
    bool project = true;

    std::vector<std::string> validate() const;
};

/// A nonlinear system R(x) = 0 seen by the Newton loop.
class NewtonProblem {
public:
    virtual ~NewtonProblem() = default;
    virtual Vector residual(const Vector& x) = 0;
    /// Solution dx of J(x) dx = -R; may throw SingularMatrixError.
    virtual Vector direction(const Vector& x, const Vector& R) = 0;
    virtual void project(Vector&) {}
    /// Residual L1 norm below which the system counts as solved.
    virtual double absolute_floor() const { return 0.0; }
};

struct NewtonResult {
    bool converged = false;
    bool singular = false;
    int iterations = 0;
    std::string message;
    std::vector<double> history;  // L1 residual after each accepted iterate, starting with R0
    Vector x;
};

NewtonResult newton_solve(NewtonProblem& problem, Vector x, const NewtonConfig& config);

double l1_norm(const Vector& v);

/// One implicit step of the two-phase gradient scheme on the free DOFs, with cell
/// elimination and a sparse direct solve.
class TwoPhaseStepProblem : public NewtonProblem {
public:
    TwoPhaseStepProblem(const Assembler& assembler, const State& prev, double dt, SparseDirectSolver& solver,
                        const NewtonConfig& config);

    Vector residual(const Vector& x) override;
    Vector direction(const Vector& x, const Vector& R) override;
    void project(Vector& x) override;
    double absolute_floor() const override;

    static Vector pack(const State& s);
    static State unpack(const Vector& x);

private:
    void pin_dry_rows(BlockMatrix& J, Vector& rhs, const Vector& x) const;
    const Assembler& assembler_;
    const State& prev_;
    double dt_;
    SparseDirectSolver& solver_;
    NewtonConfig config_;
    std::vector<int> free_;
    std::vector<std::uint8_t> active_, cells_;
    std::vector<double> p_cap_;
};

/// Largest capillary pressure per DOF keeping every adjacent saturation below the cap.
std::vector<double> capillary_caps(const GradientDiscretisation& gd, const PhysicsModel& physics, double cap);

/// Outcome of one attempted time step.
struct StepAttempt {
    bool converged = false;
    bool singular = false;
    int iterations = 0;
    std::string message;
    std::vector<double> history;
    State state;
};

class StepSolver {
public:
    virtual ~StepSolver() = default;
    virtual StepAttempt attempt(const State& prev, double t, double dt) = 0;
};

class TwoPhaseStepper : public StepSolver {
public:
    TwoPhaseStepper(const Assembler& assembler, NewtonConfig config);
    StepAttempt attempt(const State& prev, double t, double dt) override;

private:
    const Assembler& assembler_;
    NewtonConfig config_;
    SparseDirectSolver solver_;
};

struct TimeControl {
    /// (until, dt_max): dt_max applies for t < until; the last entry extends to infinity.
    std::vector<std::pair<double, double>> schedule{{0.5 * units::day, 0.01 * units::day},
                                                    {std::numeric_limits<double>::infinity(), 0.19 * units::day}};
    double growth = 2.0;
    double chop = 4.0;
    double initial_dt = 0.0;  // 0: first dt_max / 16
    double end_time = 1.0 * units::day;
    double min_dt = 1e-12 * units::day;
    std::vector<double> stops;  // times hit exactly (snapshots)

    double dt_max(double t) const;
    double first_dt() const;
    std::vector<std::string> validate() const;
};

struct StepRecord {
    double t = 0.0;
    double dt = 0.0;
    int iterations = 0;
    int chops = 0;
    std::vector<double> history;
};

struct SolverReport {
    int n_dt = 0;
    int n_newton = 0;
    int n_chop = 0;
    double cpu_seconds = 0.0;
    bool aborted = false;
    bool singular = false;
    std::string abort_reason;
    std::vector<StepRecord> steps;
};

/// Resumable loop position.
struct LoopPosition {
    double t = 0.0;
    double dt_nominal = 0.0;  // 0: not started
};

/// Called after each accepted step with the new position and state.
using StepObserver = std::function<void(const StepRecord&, const LoopPosition&, const State& prev, const State& next,
                                        const SolverReport&)>;

/// Progressive time stepping with chopping; returns the final state. `report` carries
/// counters across resumed runs.
State time_loop(StepSolver& solver, const TimeControl& control, State state, LoopPosition& position,
                SolverReport& report, const std::vector<StepObserver>& observers = {});

}  // namespace fracflow
