#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fracflow/solver.hpp"
#include "support.hpp"

using namespace fracflow;
using fracflow::testing::reservoir_mesh;

namespace {

class LinearProblem : public NewtonProblem {
public:
    LinearProblem(Eigen::MatrixXd A, Vector b) : A_(std::move(A)), b_(std::move(b)) {}
    Vector residual(const Vector& x) override { return A_ * x - b_; }
    Vector direction(const Vector&, const Vector& R) override { return A_.partialPivLu().solve(-R); }

private:
    Eigen::MatrixXd A_;
    Vector b_;
};

// x_i^3 = c_i
class CubicProblem : public NewtonProblem {
public:
    explicit CubicProblem(Vector c) : c_(std::move(c)) {}
    Vector residual(const Vector& x) override { return x.array().cube().matrix() - c_; }
    Vector direction(const Vector& x, const Vector& R) override
    {
        if (singular) throw SingularMatrixError("null row at DOF 0", 0);
        return (-R.array() / (3.0 * x.array().square())).matrix() * (uphill ? -1.0 : 1.0);
    }
    bool singular = false;
    bool uphill = false;

private:
    Vector c_;
};

}  // namespace

TEST(Newton, LinearProblemInOneIteration)
{
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(30, 30, [&] { return u(rng); });
    A.diagonal().array() += 30.0;
    const Vector b = Vector::NullaryExpr(30, [&] { return u(rng); });
    LinearProblem p(A, b);
    NewtonConfig cfg;
    cfg.crit_rel = 1e-10;
    const NewtonResult r = newton_solve(p, Vector::Zero(30), cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LE((A * r.x - b).norm(), 1e-12);
}

TEST(Newton, CubicConvergesMonotonically)
{
    CubicProblem p(Vector::LinSpaced(10, 1.0, 30.0));
    NewtonConfig cfg;
    cfg.crit_rel = 1e-12;
    const NewtonResult r = newton_solve(p, Vector::Constant(10, 4.0), cfg);
    ASSERT_TRUE(r.converged);
    for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1]);
    EXPECT_EQ(r.history.size(), static_cast<std::size_t>(r.iterations) + 1);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(r.x[i], std::cbrt(1.0 + i * 29.0 / 9.0), 1e-8);
}

TEST(Newton, FailureModes)
{
    CubicProblem p(Vector::Constant(3, 8.0));
    NewtonConfig cfg;
    p.singular = true;
    NewtonResult r = newton_solve(p, Vector::Constant(3, 1.0), cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_TRUE(r.singular);
    EXPECT_EQ(r.message, "null row at DOF 0");

    p.singular = false;
    p.uphill = true;
    r = newton_solve(p, Vector::Constant(3, 1.0), cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_FALSE(r.singular);
    EXPECT_EQ(r.message, "residual does not decrease along the Newton direction");

    p.uphill = false;
    cfg.max_iter = 2;
    cfg.crit_rel = 1e-15;
    r = newton_solve(p, Vector::Constant(3, 100.0), cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 2);
    EXPECT_EQ(r.message, "no convergence after 2 iterations");
}

TEST(Newton, AlreadyConvergedStartNeedsNoIteration)
{
    CubicProblem p(Vector::Constant(3, 8.0));
    const NewtonResult r = newton_solve(p, Vector::Constant(3, 2.0), NewtonConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
}

namespace {

class ScriptedSolver : public StepSolver {
public:
    StepAttempt attempt(const State& prev, double t, double dt) override
    {
        ++calls;
        dts.push_back(dt);
        StepAttempt a;
        a.iterations = 2;
        a.converged = !always_fail && calls != fail_on_call;
        a.singular = singular && !a.converged;
        a.message = a.singular ? "null row at DOF 7, phase 1" : "no convergence after 35 iterations";
        a.state = prev;
        if (a.converged) a.state.u[0].array() += dt;
        (void)t;
        return a;
    }
    int calls = 0;
    int fail_on_call = -1;
    bool always_fail = false;
    bool singular = false;
    std::vector<double> dts;
};

}  // namespace

TEST(TimeLoop, GrowsToTheCapAndHitsTheEnd)
{
    ScriptedSolver s;
    TimeControl c;
    c.end_time = 0.3 * units::day;
    LoopPosition pos;
    SolverReport rep;
    const State out = time_loop(s, c, State(2), pos, rep);
    const double d = 0.01 * units::day;
    ASSERT_GE(s.dts.size(), 6u);
    EXPECT_DOUBLE_EQ(s.dts[0], d / 16);
    EXPECT_DOUBLE_EQ(s.dts[1], d / 8);
    EXPECT_DOUBLE_EQ(s.dts[2], d / 4);
    EXPECT_DOUBLE_EQ(s.dts[3], d / 2);
    EXPECT_DOUBLE_EQ(s.dts[4], d);
    EXPECT_DOUBLE_EQ(s.dts[5], d);
    EXPECT_EQ(pos.t, c.end_time);
    EXPECT_EQ(rep.n_chop, 0);
    EXPECT_EQ(rep.n_dt, static_cast<int>(s.dts.size()));
    EXPECT_EQ(rep.n_newton, 2 * rep.n_dt);
    EXPECT_NEAR(out.u[0][0], c.end_time, 1e-9);
}

TEST(TimeLoop, FailedAttemptIsChopped)
{
    ScriptedSolver s;
    s.fail_on_call = 3;
    TimeControl c;
    c.end_time = 0.05 * units::day;
    LoopPosition pos;
    SolverReport rep;
    time_loop(s, c, State(1), pos, rep);
    const double d = 0.01 * units::day;
    EXPECT_EQ(rep.n_chop, 1);
    EXPECT_DOUBLE_EQ(s.dts[2], d / 4);
    EXPECT_DOUBLE_EQ(s.dts[3], d / 16);
    EXPECT_DOUBLE_EQ(s.dts[4], d / 8);
    EXPECT_EQ(rep.steps[2].chops, 1);
    EXPECT_EQ(rep.steps[2].iterations, 4);
    EXPECT_EQ(rep.n_newton, 2 * static_cast<int>(s.dts.size()));
    EXPECT_EQ(pos.t, c.end_time);
}

TEST(TimeLoop, ScheduleSwitchesAtHalfDay)
{
    ScriptedSolver s;
    TimeControl c;
    LoopPosition pos;
    SolverReport rep;
    time_loop(s, c, State(1), pos, rep);
    bool saw_long = false;
    for (const auto& st : rep.steps) {
        if (st.t < 0.5 * units::day * (1.0 - 1e-9)) EXPECT_LE(st.dt, 0.01 * units::day * (1.0 + 1e-12));
        EXPECT_LE(st.dt, 0.19 * units::day * (1.0 + 1e-12));
        saw_long = saw_long || std::abs(st.dt - 0.19 * units::day) < 1e-6;
    }
    EXPECT_TRUE(saw_long);
    EXPECT_EQ(pos.t, 1.0 * units::day);
}

TEST(TimeLoop, StopsAreHitExactly)
{
    ScriptedSolver s;
    TimeControl c;
    c.end_time = 0.7 * units::day;
    c.stops = {0.123 * units::day, 0.6 * units::day};
    LoopPosition pos;
    SolverReport rep;
    std::vector<double> times;
    time_loop(s, c, State(1), pos, rep,
              {[&](const StepRecord&, const LoopPosition& p, const State&, const State&, const SolverReport&) {
                  times.push_back(p.t);
              }});
    for (double stop : c.stops) EXPECT_NE(std::find(times.begin(), times.end(), stop), times.end());
    EXPECT_EQ(times.back(), c.end_time);
}

TEST(TimeLoop, AbortsBelowMinimumStep)
{
    ScriptedSolver s;
    s.always_fail = true;
    TimeControl c;
    c.min_dt = 1e-6 * units::day;
    LoopPosition pos;
    SolverReport rep;
    State init(3);
    init.u[1].setConstant(5.0);
    const State out = time_loop(s, c, init, pos, rep);
    EXPECT_TRUE(rep.aborted);
    EXPECT_EQ(rep.n_dt, 0);
    EXPECT_EQ(rep.n_chop, 5);  // 0.01/16 d / 4^5 < 1e-6 d
    EXPECT_EQ(out.u[1], init.u[1]);
    EXPECT_EQ(rep.abort_reason, "time step below minimum (no convergence after 35 iterations) at t = 0.000000 d");

    ScriptedSolver t;
    t.always_fail = true;
    t.singular = true;
    SolverReport rep2;
    LoopPosition pos2;
    time_loop(t, c, init, pos2, rep2);
    EXPECT_TRUE(rep2.singular);
    EXPECT_EQ(rep2.abort_reason, "null row at DOF 7, phase 1 at t = 0.000000 d");
}

TEST(TimeLoop, ResumedLoopMatchesUninterrupted)
{
    TimeControl c;
    c.end_time = 0.8 * units::day;
    c.stops = {0.4 * units::day};
    ScriptedSolver a;
    LoopPosition pa;
    SolverReport ra;
    const State full = time_loop(a, c, State(1), pa, ra);

    TimeControl half = c;
    half.end_time = 0.4 * units::day;
    ScriptedSolver b;
    LoopPosition pb;
    SolverReport rb;
    const State mid = time_loop(b, half, State(1), pb, rb);
    const State end = time_loop(b, c, mid, pb, rb);
    EXPECT_EQ(end.u[0], full.u[0]);
    EXPECT_EQ(rb.n_dt, ra.n_dt);
    EXPECT_EQ(b.dts, a.dts);
}

TEST(TimeControl, Validation)
{
    TimeControl c;
    EXPECT_TRUE(c.validate().empty());
    c.chop = 1.0;
    c.end_time = -1.0;
    EXPECT_EQ(c.validate().size(), 2u);
}

TEST(TwoPhaseStepper, OneStepConverges)
{
    const GradientDiscretisation gd = build_vag(reservoir_mesh(4, 8));
    PhysicsModel physics;
    const Assembler A(gd, physics);
    State init(gd.num_dofs);
    const double rho_g = physics.fluid.density[kWater] * physics.gravity_vector().y();
    for (int i = 0; i < gd.num_dofs; ++i) init.u[kWater][i] = init.u[kOil][i] = 1e5 + rho_g * (gd.position[i].y() - 20.0);
    init = apply_boundary_conditions(gd, BoundarySpec::reservoir(), init);
    NewtonConfig cfg;
    TwoPhaseStepper stepper(A, cfg);
    const StepAttempt a = stepper.attempt(init, 0.0, 0.01 * units::day / 16);
    ASSERT_TRUE(a.converged) << a.message;
    EXPECT_GT(a.iterations, 0);
    for (std::size_t k = 1; k < a.history.size(); ++k) EXPECT_LE(a.history[k], a.history[k - 1]);
    for (int i = 0; i < gd.num_dofs; ++i)
        if (gd.dirichlet[i]) {
            EXPECT_EQ(a.state.u[kOil][i], init.u[kOil][i]);
            EXPECT_EQ(a.state.u[kWater][i], init.u[kWater][i]);
        }
    const auto caps = capillary_caps(gd, physics, cfg.saturation_cap);
    const Vector p = a.state.p();
    for (int i = 0; i < gd.num_dofs; ++i) EXPECT_LE(p[i], caps[i]);
}
