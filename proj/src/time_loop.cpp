#include <algorithm>
#include <cmath>
#include <ctime>

#include "fracflow/solver.hpp"

namespace fracflow {

double TimeControl::dt_max(double t) const
{
    for (const auto& [until, dt] : schedule)
        if (t < until * (1.0 - 1e-12)) return dt;
    return schedule.back().second;
}

double TimeControl::first_dt() const { return initial_dt > 0.0 ? initial_dt : dt_max(0.0) / 16.0; }

std::vector<std::string> TimeControl::validate() const
{
    std::vector<std::string> out;
    if (schedule.empty()) out.push_back("time schedule is empty");
    for (const auto& [until, dt] : schedule)
        if (!(dt > 0.0) || !(until > 0.0)) out.push_back("time schedule entries must be positive");
    if (!(growth >= 1.0)) out.push_back("time growth factor must be >= 1");
    if (!(chop > 1.0)) out.push_back("time chop factor must be > 1");
    if (!(end_time > 0.0) || !std::isfinite(end_time)) out.push_back("end time must be positive and finite");
    if (!(min_dt > 0.0)) out.push_back("minimum time step must be positive");
    if (initial_dt < 0.0) out.push_back("initial time step must be non-negative");
    return out;
}

State time_loop(StepSolver& solver, const TimeControl& control, State state, LoopPosition& position,
                SolverReport& report, const std::vector<StepObserver>& observers)
{
    const std::clock_t c0 = std::clock();
    auto elapsed = [&] { return static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC; };
    const double cpu_before = report.cpu_seconds;
    if (position.dt_nominal <= 0.0) position.dt_nominal = control.first_dt();
    std::vector<double> stops = control.stops;
    stops.push_back(control.end_time);
    std::sort(stops.begin(), stops.end());

    double& t = position.t;
    const double eps = 1e-9 * control.min_dt;
    while (t < control.end_time - eps) {
        double next_stop = control.end_time;
        for (double s : stops)
            if (s > t + eps) {
                next_stop = s;
                break;
            }
        const double nominal = std::min(position.dt_nominal, control.dt_max(t));
        const bool clamped = nominal >= next_stop - t;
        double dt = clamped ? next_stop - t : nominal;

        StepRecord rec;
        rec.t = t;
        StepAttempt a;
        while (true) {
            a = solver.attempt(state, t, dt);
            report.n_newton += a.iterations;
            rec.iterations += a.iterations;
            if (a.converged) break;
            if (a.singular) report.singular = true;
            dt /= control.chop;
            ++rec.chops;
            ++report.n_chop;
            if (dt < control.min_dt) {
                report.aborted = true;
                report.abort_reason = (a.singular ? a.message
                                                  : "time step below minimum (" + a.message + ")") +
                                      " at t = " + std::to_string(t / units::day) + " d";
                report.cpu_seconds = cpu_before + elapsed();
                return state;
            }
        }
        const State prev = std::move(state);
        state = std::move(a.state);
        const bool exact = clamped && rec.chops == 0;
        t = exact ? next_stop : t + dt;
        rec.dt = dt;
        rec.history = std::move(a.history);
        const double base = exact ? nominal : dt;
        position.dt_nominal = std::min(control.growth * base, control.dt_max(t));
        ++report.n_dt;
        report.steps.push_back(rec);
        report.cpu_seconds = cpu_before + elapsed();
        for (const auto& ob : observers) ob(report.steps.back(), position, prev, state, report);
    }
    report.cpu_seconds = cpu_before + elapsed();
    return state;
}

}  // namespace fracflow
