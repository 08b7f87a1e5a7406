#include "fracflow/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "fracflow/vag.hpp"

namespace fracflow {

namespace fs = std::filesystem;

State hydrostatic_initial_state(const GradientDiscretisation& gd, const RunConfig& config)
{
    const auto& fluid = config.physics.fluid;
    const Point g = config.physics.gravity_vector();
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& x : gd.position) {
        ymin = std::min(ymin, x.y());
        ymax = std::max(ymax, x.y());
    }
    double p_ref = 0.0, y_ref = ymax;
    const auto& top = config.boundary.dirichlet[static_cast<int>(BoundaryTag::Top)];
    const auto& bottom = config.boundary.dirichlet[static_cast<int>(BoundaryTag::Bottom)];
    if (top) {
        p_ref = top->water_pressure;
    } else if (bottom) {
        p_ref = bottom->water_pressure;
        y_ref = ymin;
    }
    State s(gd.num_dofs);
    for (int i = 0; i < gd.num_dofs; ++i) {
        s.u[kWater][i] = p_ref + fluid.density[kWater] * g.y() * (gd.position[i].y() - y_ref);
        s.u[kOil][i] = s.u[kWater][i];
    }
    return apply_boundary_conditions(gd, config.boundary, std::move(s));
}

std::pair<double, double> saturation_range(const Assembler& assembler, const State& state)
{
    const auto& gd = assembler.gd();
    const auto& ph = assembler.physics();
    double lo = 1.0, hi = 0.0;
    auto take = [&](double s) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    };
    const Vector p = state.p();
    for (const auto& part : gd.matrix_parts) take(saturation(ph.matrix_rock(part.region), p[part.dof]));
    for (const auto& part : gd.fracture_parts)
        take(saturation(ph.fracture_rock(gd.fracture[part.piece].region), p[part.dof]));
    for (const auto& ip : gd.interface)
        take(interface_saturation(ph.interface, ph.matrix_rock(ip.matrix_region),
                                  ph.fracture_rock(gd.fracture[ip.fracture_piece].region), p[ip.trace_dof]));
    return {lo, hi};
}

namespace {

struct StopRequest {};

class CsvAppender {
public:
    void open(const std::string& path, bool append)
    {
        out_ = std::make_unique<std::ofstream>(path, append ? std::ios::binary | std::ios::app : std::ios::binary);
        if (!*out_) throw OutputError("cannot write '" + path + "'");
        path_ = path;
    }
    void write(const std::string& text)
    {
        if (!out_) return;
        *out_ << text;
        out_->flush();
        if (!*out_) throw OutputError("write failed for '" + path_ + "'");
    }

private:
    std::unique_ptr<std::ofstream> out_;
    std::string path_;
};

}  // namespace

RunResult run_simulation(const RunConfig& config, const RunOptions& options)
{
    RunResult result;
    const Mesh mesh = build_mesh(config);
    const auto violations = validate_mesh(mesh);
    if (!violations.empty()) throw MeshError("invalid mesh: " + violations.front());
    const GradientDiscretisation gd = build_vag(mesh, config.boundary.dirichlet_mask());
    const int threads = options.threads.value_or(config.threads);
    const Assembler assembler(gd, config.physics, Sources{}, threads);
    result.num_cells = mesh.num_triangles();
    result.num_dofs = gd.num_dofs;

    const std::string dir = options.output_dir.value_or(config.output.directory);
    const bool files = options.write_files;
    auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
    if (files) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw OutputError("cannot create output directory '" + dir + "': " + ec.message());
        write_text_file(path("resolved_config.ini"), format_config(config));
    }

    TimeControl control = config.time;
    const std::vector<double> snapshots = config.snapshot_times();
    control.stops = snapshots;
    auto is_snapshot = [&](double t) {
        for (double s : snapshots)
            if (std::abs(t - s) <= 1e-9 * config.output.cadence) return true;
        return false;
    };

    State state = hydrostatic_initial_state(gd, config);
    LoopPosition position;
    SolverReport& report = result.report;
    EnergyAudit audit(assembler, config.newton.crit_rel);
    double inflow = 0.0;

    CsvAppender volumes_csv, energy_csv;
    std::unique_ptr<std::ofstream> trajectory;
    const bool resuming = options.resume && files && fs::exists(path("checkpoint.txt"));
    if (resuming) {
        const Checkpoint cp = read_checkpoint(path("checkpoint.txt"));
        if (cp.state.size() != gd.num_dofs)
            throw OutputError("checkpoint in '" + dir + "' does not match the configured discretisation");
        state = cp.state;
        position = cp.position;
        report.n_dt = cp.n_dt;
        report.n_newton = cp.n_newton;
        report.n_chop = cp.n_chop;
        report.cpu_seconds = cp.cpu_seconds;
        audit.restore(cp.energy_lhs, cp.energy_rhs, cp.energy_magnitude);
        inflow = cp.inflow;
        truncate_csv(path("volumes.csv"), position.t);
        volumes_csv.open(path("volumes.csv"), true);
        if (config.energy_audit) {
            truncate_csv(path("energy.csv"), position.t);
            energy_csv.open(path("energy.csv"), true);
        }
        if (config.output.trajectory) {
            trajectory = std::make_unique<std::ofstream>(path("trajectory.txt"), std::ios::binary | std::ios::app);
            if (!*trajectory) throw OutputError("cannot write '" + path("trajectory.txt") + "'");
        }
    } else {
        const VolumeRecord v0 = oil_volumes(assembler, state, 0.0);
        result.volumes.push_back(v0);
        if (files) {
            volumes_csv.open(path("volumes.csv"), false);
            volumes_csv.write(volumes_header() + volume_row(v0));
            if (config.energy_audit) {
                energy_csv.open(path("energy.csv"), false);
                energy_csv.write(energy_header());
            }
            if (config.output.vtk) write_vtk(path("field_t0h.vtk"), mesh, gd, config.physics, state, 0.0);
            if (config.output.trajectory) {
                trajectory = std::make_unique<std::ofstream>(path("trajectory.txt"), std::ios::binary);
                if (!*trajectory) throw OutputError("cannot write '" + path("trajectory.txt") + "'");
                write_trajectory_header(*trajectory, format_config(config), state);
            }
        }
    }
    const auto [s_lo, s_hi] = saturation_range(assembler, state);
    result.min_saturation = s_lo;
    result.max_saturation = s_hi;

    const double cap = config.newton.saturation_cap;
    int steps_this_run = 0;
    State last = state;
    std::vector<StepObserver> observers;
    observers.push_back([&](const StepRecord& rec, const LoopPosition& pos, const State& prev, const State& next,
                            const SolverReport& rep) {
        const double t = pos.t;
        last = next;
        const auto [lo, hi] = saturation_range(assembler, next);
        result.min_saturation = std::min(result.min_saturation, lo);
        result.max_saturation = std::max(result.max_saturation, hi);
        if (lo < 0.0 || hi > cap) result.saturation_ok = false;

        inflow += boundary_inflow(assembler, prev, next, rec.dt)[kOil] * rec.dt;
        VolumeRecord v = oil_volumes(assembler, next, t);
        v.inflow = inflow;
        result.volumes.push_back(v);
        volumes_csv.write(volume_row(v));
        if (config.energy_audit) {
            const EnergyStep& e = audit.record(prev, next, t, rec.dt);
            energy_csv.write(energy_row(e));
        }
        if (is_snapshot(t)) {
            FractureProfile prof =
                extract_fracture_profile(gd, mesh, config.physics, next, config.output.front_threshold);
            if (files) {
                if (!mesh.fractures().empty()) write_profile_csv(path("profile_t" + time_label(t) + ".csv"), prof, t);
                if (config.output.vtk)
                    write_vtk(path("field_t" + time_label(t) + ".vtk"), mesh, gd, config.physics, next, t);
            }
            result.profiles.emplace_back(t, std::move(prof));
        }
        if (trajectory) {
            write_trajectory_step(*trajectory, TrajectoryStep{t, rec.dt, next});
            trajectory->flush();
        }
        if (files && config.output.checkpoints) {
            Checkpoint cp;
            cp.position = pos;
            cp.n_dt = rep.n_dt;
            cp.n_newton = rep.n_newton;
            cp.n_chop = rep.n_chop;
            cp.cpu_seconds = rep.cpu_seconds;
            cp.energy_lhs = audit.cumulative_lhs();
            cp.energy_rhs = audit.cumulative_rhs();
            cp.energy_magnitude = audit.cumulative_magnitude();
            cp.inflow = inflow;
            cp.state = next;
            write_checkpoint(path("checkpoint.txt"), cp);
        }
        if (options.max_steps >= 0 && ++steps_this_run >= options.max_steps) throw StopRequest{};
    });

    TwoPhaseStepper stepper(assembler, config.newton);
    try {
        state = time_loop(stepper, control, state, position, report, observers);
    } catch (const StopRequest&) {
        state = last;
        result.interrupted = true;
    }
    result.final_state = state;
    result.final_time = position.t;
    result.energy = audit.steps();
    result.energy_ok = audit.ok();
    result.energy_worst_ratio = audit.worst_ratio();
    if (files) write_report_csv(path("report.csv"), report);
    if (report.aborted) {
        result.exit_code = 1;
        result.message = "simulation aborted: " + report.abort_reason;
    } else if (result.interrupted) {
        result.message = "stopped at t = " + std::to_string(position.t / units::day) + " d";
    } else {
        result.message = "completed at t = " + std::to_string(position.t / units::day) + " d";
    }
    return result;
}

}  // namespace fracflow
