#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracflow/config.hpp"
#include "fracflow/simulation.hpp"
#include "fracflow/studies.hpp"
#include "fracflow/vag.hpp"

using namespace fracflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RunConfig desk_config()
{
    RunConfig c = load_config(std::string(FRACFLOW_CONFIG_DIR) + "/desk.ini");
    c.output.vtk = false;
    return c;
}

fs::path work_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "fracflow_acceptance" / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// saturation extremes seen by each run, for the bounds check
std::map<std::string, std::pair<double, double>> saturation_log;
std::map<std::string, bool> saturation_flags;

void log_saturation(const std::string& name, const RunResult& r)
{
    saturation_log[name] = {r.min_saturation, r.max_saturation};
    saturation_flags[name] = r.saturation_ok;
}

// ---------------------------------------------------------------------------------------

Outcome closure_properties()
{
    const PhysicsModel ph;
    int worst_roundtrip = 0, violations = 0, quad_fail = 0;
    double max_rt = 0.0, max_quad = 0.0, min_slack = 0.0;
    std::mt19937 rng(2024);
    for (const RockModel* r : {&ph.matrix_rock(0), &ph.fracture_rock(0)}) {
        const double a = r->capillary.a;
        for (double p = 0.0; p < 8.0 * a; p += 0.01 * a) {
            const double err = std::abs(pseudo_inverse(*r, saturation(*r, p)) - p) / std::max(1.0, p);
            max_rt = std::max(max_rt, err);
            worst_roundtrip += err > 1e-10;
        }
        std::uniform_real_distribution<double> u(-a, 6.0 * a);
        for (int k = 0; k < 10000; ++k) {
            const double x = u(rng), y = u(rng);
            const double sx = saturation(*r, x), sy = saturation(*r, y);
            // B(s) - B(t) >= p (s - t) for p with s = S(p)
            const double slack = (B_function(*r, sy) - B_function(*r, sx) - x * (sy - sx)) / a;
            min_slack = std::min(min_slack, slack);
            violations += slack < -1e-12;
        }
        for (double q = 0.05; q < 0.999; q += 0.05) {
            const double oracle = simpson([&](double t) { return pseudo_inverse(*r, t); }, 0.0, q);
            const double err = std::abs(B_function(*r, q) - oracle) / oracle;
            max_quad = std::max(max_quad, err);
            quad_fail += err > 1e-8;
        }
    }
    return {worst_roundtrip == 0 && violations == 0 && quad_fail == 0,
            fmt("round trip %.1e, B inequality violations %d (min slack %.1e), B vs quadrature %.1e", max_rt,
                violations, min_slack, max_quad)};
}

Outcome coupling_monotonicity()
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> k(0.0, 1e3), j(-2e5, 2e5);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const double ka = k(rng), kf = k(rng), b = j(rng), c = j(rng);
        bad += (coupling_flux(ka, kf, 2e-8, b) - coupling_flux(ka, kf, 2e-8, c)) * (b - c) < 0.0;
    }
    StructuredMeshParams mp;
    mp.nx = 4;
    mp.ny = 8;
    mp.fractures.push_back(FractureSpec{0, {Point(5.0, 0.0), Point(5.0, 20.0)}});
    const GradientDiscretisation gd = build_vag(build_structured_mesh(mp));
    const PhysicsModel ph;
    const Assembler A(gd, ph);
    std::uniform_real_distribution<double> w(1e5, 3e5), c(-0.3e5, 1e5);
    int bad_states = 0;
    double min_d = 0.0;
    for (int s = 0; s < 1000; ++s) {
        State st(gd.num_dofs);
        for (int i = 0; i < gd.num_dofs; ++i) {
            st.u[kWater][i] = w(rng);
            st.u[kOil][i] = st.u[kWater][i] + c(rng);
        }
        const double d = energy_terms(A, st, st, 1.0).coupling;
        min_d = std::min(min_d, d);
        bad_states += d < 0.0;
    }
    return {bad == 0 && bad_states == 0,
            fmt("monotonicity violations %d / 10000, dissipation violations %d / 1000 (min %.2e)", bad, bad_states,
                min_d)};
}

Outcome jacobian_check()
{
    const RunConfig cfg = desk_config();
    const Mesh mesh = build_mesh(cfg);
    const GradientDiscretisation gd = build_vag(mesh, cfg.boundary.dirichlet_mask());
    const Assembler A(gd, cfg.physics);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n;
    const double dt = 0.01 * units::day;
    const std::vector<double> hs{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    double worst = 0.0, worst_decay = 1e300;
    for (int trial = 0; trial < 20; ++trial) {
        // smooth fields, capillary pressure in (0.1, 0.9) bar, fracture slightly below the matrix
        const double k1 = 0.2 + 0.5 * u(rng), k2 = 0.1 + 0.3 * u(rng), ph1 = 6.28 * u(rng), ph2 = 6.28 * u(rng);
        auto make = [&](double shift) {
            auto water = [=](const Point& x) { return 2e5 + 0.3e5 * std::sin(k1 * x.x() + ph1) * std::cos(k2 * x.y()); };
            auto cap = [=](const Point& x) { return 0.5e5 + 0.4e5 * std::sin(k2 * x.x() + ph2 + shift) * std::sin(k1 * x.y()); };
            State s(gd.num_dofs);
            const Vector w = interpolate_initial(gd, water, [&](const Point& x) { return water(x) - 500.0; });
            const Vector c = interpolate_initial(gd, cap, [&](const Point& x) { return cap(x) - 300.0; });
            s.u[kWater] = w;
            s.u[kOil] = w + c;
            return s;
        };
        const State prev = make(0.3), next = make(0.0);
        const ResidualSystem sys = A.assemble(prev, next, dt);
        Vector x(2 * gd.num_dofs), dx(2 * gd.num_dofs);
        for (int i = 0; i < gd.num_dofs; ++i) {
            x[2 * i] = next.u[kOil][i];
            x[2 * i + 1] = next.u[kWater][i];
        }
        for (int i = 0; i < dx.size(); ++i) dx[i] = 1e4 * n(rng);
        const Vector Jdx = sys.jacobian.multiply(dx);
        std::vector<double> err;
        for (double h : hs) {
            const Vector y = x + h * dx;
            State s(gd.num_dofs);
            for (int i = 0; i < gd.num_dofs; ++i) {
                s.u[kOil][i] = y[2 * i];
                s.u[kWater][i] = y[2 * i + 1];
            }
            err.push_back(((A.residual(prev, s, dt) - sys.residual) / h - Jdx).norm() / Jdx.norm());
        }
        worst = std::max(worst, err.back());
        for (std::size_t k = 0; k + 2 < err.size(); ++k) worst_decay = std::min(worst_decay, err[k] / err[k + 1]);
    }
    // first-order decay over the decades 1e-2 .. 1e-5, each ratio close to 10
    const bool decay = worst_decay >= 5.0;
    return {worst <= 1e-5 && decay,
            fmt("max relative error at h = 1e-6: %.2e; smallest per-decade decay ratio over 1e-2..1e-5: %.2f", worst,
                worst_decay)};
}

Outcome conservation()
{
    RunConfig cfg = desk_config();
    const Mesh mesh = build_mesh(cfg);
    const GradientDiscretisation gd = build_vag(mesh, cfg.boundary.dirichlet_mask());
    const Assembler A(gd, cfg.physics);
    TwoPhaseStepper stepper(A, cfg.newton);
    TimeControl control = cfg.time;
    control.end_time = control.first_dt() * 7.0;  // dt, 2 dt, 4 dt
    LoopPosition pos;
    SolverReport rep;
    double worst = 0.0, newton_share = 0.0;
    int steps = 0;
    std::vector<int> all(gd.num_dofs);
    for (int i = 0; i < gd.num_dofs; ++i) all[i] = i;
    auto observer = [&](const StepRecord& rec, const LoopPosition&, const State& prev, const State& next,
                        const SolverReport&) {
        ++steps;
        const ResidualTerms t = A.terms(prev, next, rec.dt);
        const Vector R = A.residual(prev, next, rec.dt);
        for (int a = 0; a < kNumPhases; ++a) {
            // storage change = boundary inflow + residual left on the free rows
            double storage = 0.0, inflow = 0.0, free_res = 0.0, scale = 0.0;
            for (int i = 0; i < gd.num_dofs; ++i) {
                storage += t.accumulation[2 * i + a] + t.source[2 * i + a];
                scale += std::abs(t.accumulation[2 * i + a]) + std::abs(t.transport[2 * i + a]);
                if (gd.dirichlet[i])
                    inflow += t.transport[2 * i + a];
                else
                    free_res += R[2 * i + a];
            }
            worst = std::max(worst, std::abs(storage - inflow - free_res) / scale);
            newton_share = std::max(newton_share, std::abs(free_res) / scale);
        }
    };
    time_loop(stepper, control, hydrostatic_initial_state(gd, cfg), pos, rep, {observer});
    return {steps == 3 && !rep.aborted && worst <= 1e-10,
            fmt("%d steps, worst per-phase balance defect %.2e (relative); unconverged free-row residual %.2e", steps,
                worst, newton_share)};
}

RunResult desk_run;

Outcome energy()
{
    RunConfig cfg = desk_config();
    cfg.physics.interface.theta = 0.5;
    cfg.physics.interface.epsilon = 0.1;
    cfg.energy_audit = true;
    RunOptions opt;
    opt.output_dir = work_dir("energy").string();
    desk_run = run_simulation(cfg, opt);
    log_saturation("desk theta=0.5 eps=0.1", desk_run);
    int bad = 0;
    for (const auto& e : desk_run.energy) bad += !e.ok;
    return {desk_run.exit_code == 0 && bad == 0 && !desk_run.energy.empty(),
            fmt("%d cells, %zu steps, %d violations, worst slack/tolerance %.3g", desk_run.num_cells,
                desk_run.energy.size(), bad, desk_run.energy_worst_ratio)};
}

Outcome gdm()
{
    const RunConfig cfg = load_config(std::string(FRACFLOW_CONFIG_DIR) + "/check_gdm.ini");
    const auto rows = gdm_study(build_mesh(cfg), GdmStudyOptions{});
    bool ok = rows.size() == 4;
    double rmin = 1e300, rmax = 0.0, lo = 1e300, hi = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double r = rows[k].consistency / rows[k - 1].consistency;
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        ok = ok && r >= 0.3 && r <= 0.8;
        ok = ok && rows[k].limit_conformity < rows[k - 1].limit_conformity && !rows[k].quadrature_insufficient;
    }
    double var = 0.0;
    for (auto pick : {&CoercivityEstimate::low, &CoercivityEstimate::high}) {
        lo = 1e300;
        hi = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, r.coercivity.*pick);
            hi = std::max(hi, r.coercivity.*pick);
        }
        var = std::max(var, (hi - lo) / lo);
    }
    ok = ok && var < 0.2;
    return {ok, fmt("S_D ratios in [%.3f, %.3f], W_D %.3g -> %.3g, C_D bracket variation %.1f%%", rmin, rmax,
                    rows.front().limit_conformity, rows.back().limit_conformity, 100.0 * var)};
}

Outcome mms()
{
    const RunConfig cfg = load_config(std::string(FRACFLOW_CONFIG_DIR) + "/mms.ini");
    StructuredMeshParams p;
    p.lx = cfg.mesh.lx;
    p.ly = cfg.mesh.ly;
    p.nx = cfg.mesh.nx;
    p.ny = cfg.mesh.ny;
    const auto rows = mms_study(p, 3);
    std::vector<double> e;
    for (const auto& r : rows) e.push_back(r.l2_error);
    const double slope = convergence_slope(e);
    return {slope >= 0.9, fmt("L2 errors %.3e, %.3e, %.3e; slope %.3f", e[0], e[1], e[2], slope)};
}

Outcome trend()
{
    std::map<double, FractureProfile> prof;
    std::string notes;
    bool ran = true;
    for (double eps : {1.0, 0.1, 1e-6}) {
        RunConfig cfg = desk_config();
        cfg.physics.interface.theta = 0.0;
        cfg.physics.interface.epsilon = eps;
        cfg.time.end_time = 6.0 * units::hour;
        cfg.output.snapshots = {6.0 * units::hour};
        cfg.energy_audit = false;
        RunOptions opt;
        opt.write_files = false;
        const RunResult r = run_simulation(cfg, opt);
        log_saturation(fmt("theta=0 eps=%g", eps), r);
        ran = ran && r.exit_code == 0 && !r.profiles.empty();
        if (!r.profiles.empty()) prof[eps] = r.profiles.back().second;
    }
    if (!ran || prof.size() != 3) return {false, "a trend run did not complete"};
    const double f1 = prof[1.0].front[0], f01 = prof[0.1].front[0], f6 = prof[1e-6].front[0];
    const RunConfig cfg = desk_config();
    const double spacing = cfg.mesh.ly / cfg.mesh.ny;
    std::map<int, double> s6;
    for (const auto& row : prof[1e-6].rows) s6[row.dof] = row.saturation;
    double dist = 0.0;
    for (const auto& row : prof[0.1].rows) dist = std::max(dist, std::abs(row.saturation - s6.at(row.dof)));
    const bool order = f1 < f01 && f01 <= f6 && f01 - f1 >= spacing;
    return {order && dist <= 0.05,
            fmt("fronts %.2f < %.2f <= %.2f m (spacing %.2f m): %s; max |S_f(0.1) - S_f(1e-6)| = %.4f (limit 0.05)",
                f1, f01, f6, spacing, order ? "ordered" : "NOT ordered", dist)};
}

Outcome singular_path()
{
    const fs::path dir = work_dir("singular");
    fs::create_directories(dir);
    std::ofstream(dir / "eps0.ini")
        << "[mesh]\nnx = 20\nny = 40\nfracture = 5 m\n[physics]\ntheta = 0.5\nepsilon = 0\n[time]\nend = 1 d\n"
        << "[output]\nvtk = false\ndirectory = " << (dir / "out").string() << "\n";
    const std::string log = (dir / "log.txt").string();
    const int status = std::system((std::string(FRACFLOW_CLI) + " run " + (dir / "eps0.ini").string() + " > " + log +
                                    " 2>&1")
                                       .c_str());
    const int code = WEXITSTATUS(status);
    const std::string out = slurp(log);
    const bool singular = out.find("singular Jacobian") != std::string::npos;
    std::string last;
    std::istringstream lines(out);
    for (std::string l; std::getline(lines, l);)
        if (!l.empty()) last = l;
    return {code == 1 && singular, fmt("exit code %d, report: %s", code, last.c_str())};
}

Outcome robustness()
{
    std::map<double, RunResult> r;
    for (double theta : {1.0, 0.0}) {
        RunConfig cfg = desk_config();
        cfg.physics.interface.theta = theta;
        cfg.physics.interface.epsilon = 1e-6;
        cfg.energy_audit = false;
        RunOptions opt;
        opt.write_files = false;
        r[theta] = run_simulation(cfg, opt);
        log_saturation(fmt("theta=%g eps=1e-6", theta), r[theta]);
    }
    const auto &a = r[1.0].report, &b = r[0.0].report;
    const bool done = r[1.0].exit_code == 0 && r[0.0].exit_code == 0;
    return {done && a.n_newton > b.n_newton,
            fmt("theta=1: N_dt %d N_Newton %d N_Chop %d; theta=0: N_dt %d N_Newton %d N_Chop %d", a.n_dt, a.n_newton,
                a.n_chop, b.n_dt, b.n_newton, b.n_chop)};
}

Outcome saturation_bounds()
{
    bool ok = saturation_log.size() == 6;
    double lo = 1.0, hi = 0.0;
    for (const auto& [name, range] : saturation_log) {
        lo = std::min(lo, range.first);
        hi = std::max(hi, range.second);
        ok = ok && saturation_flags[name] && range.first >= 0.0 && range.second <= 1.0 - 1e-14;
    }
    return {ok, fmt("%zu runs, saturations within [%.3g, 1 - %.3g]", saturation_log.size(), lo, 1.0 - hi)};
}

std::string strip_cpu(const std::string& report)
{
    // N_dt,N_Newton,N_Chop,CPU_s,status: drop the fourth column
    std::istringstream in(report);
    std::string out;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] == '#') {
            out += line + '\n';
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
        if (cols.size() > 3) cols.erase(cols.begin() + 3);
        for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? "," : "") + cols[k];
        out += '\n';
    }
    return out;
}

Outcome determinism()
{
    RunConfig cfg = desk_config();
    cfg.time.end_time = 0.25 * units::day;
    cfg.output.snapshots = {6.0 * units::hour};
    std::vector<fs::path> dirs{work_dir("det_a"), work_dir("det_b")};
    std::vector<RunResult> res;
    for (const auto& d : dirs) {
        RunOptions opt;
        opt.output_dir = d.string();
        opt.threads = 1;
        res.push_back(run_simulation(cfg, opt));
    }
    int files = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
        if (e.path().extension() != ".csv") continue;
        ++files;
        const std::string name = e.path().filename().string();
        std::string a = slurp(e.path()), b = slurp(dirs[1] / name);
        if (name == "report.csv") {
            a = strip_cpu(a);
            b = strip_cpu(b);
        }
        differ += a != b;
    }
    RunOptions four;
    four.write_files = false;
    four.threads = 4;
    const RunResult t4 = run_simulation(cfg, four);
    const auto &r1 = res[0].report, &r4 = t4.report;
    const bool counters = r1.n_dt == r4.n_dt && r1.n_newton == r4.n_newton && r1.n_chop == r4.n_chop;
    const bool states = res[0].final_state.u[0] == t4.final_state.u[0] && res[0].final_state.u[1] == t4.final_state.u[1];
    return {files >= 3 && differ == 0 && counters && res[0].exit_code == 0,
            fmt("%d CSV files compared, %d differ; 1 vs 4 threads: counters %s, final state %s", files, differ,
                counters ? "equal" : "DIFFER", states ? "bitwise equal" : "differs")};
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double budget;  // seconds
        Outcome (*run)();
    };
    const std::vector<Criterion> criteria{
        {1, "closure properties", 10.0, closure_properties},
        {2, "upwind coupling monotonicity", 5.0, coupling_monotonicity},
        {3, "Jacobian vs finite differences", 30.0, jacobian_check},
        {4, "discrete conservation", 30.0, conservation},
        {5, "energy audit on the desk run", 300.0, energy},
        {6, "GDM diagnostics under refinement", 120.0, gdm},
        {7, "manufactured-solution convergence", 60.0, mms},
        {8, "theta/epsilon front trend", 900.0, trend},
        {9, "singular Jacobian at epsilon = 0", 60.0, singular_path},
        {10, "Newton robustness theta = 1 vs 0", 900.0, robustness},
        {11, "saturation bounds", 1.0, saturation_bounds},
        {12, "determinism", 300.0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s %2d %s: %s [%.1f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    c.budget);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
