#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fracflow/config.hpp"
#include "fracflow/energy_audit.hpp"
#include "fracflow/mesh_io.hpp"
#include "fracflow/outputs.hpp"
#include "fracflow/simulation.hpp"
#include "fracflow/studies.hpp"
#include "fracflow/vag.hpp"

using namespace fracflow;
namespace fs = std::filesystem;

namespace {

int resolve_threads(int flag)
{
    if (const char* env = std::getenv("FRACFLOW_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t >= 1) return t;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("FRACFLOW_THREADS must be a positive integer, got '") + env + "'");
    }
    return flag;
}

std::string output_dir(const std::string& flag, const RunConfig& config)
{
    return flag.empty() ? config.output.directory : flag;
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw OutputError("cannot create output directory '" + dir + "': " + ec.message());
}

int cmd_run(const std::string& path, int threads, const std::string& output, bool resume)
{
    const RunConfig config = load_config(path);
    for (const auto& w : config.warnings) std::cerr << "warning: " << w << '\n';
    RunOptions opt;
    opt.threads = resolve_threads(threads > 0 ? threads : config.threads);
    if (!output.empty()) opt.output_dir = output;
    opt.resume = resume;
    const RunResult r = run_simulation(config, opt);
    const auto& rep = r.report;
    std::cout << "cells " << r.num_cells << ", dofs " << r.num_dofs << '\n';
    std::cout << "N_dt " << rep.n_dt << ", N_Newton " << rep.n_newton << ", N_Chop " << rep.n_chop << ", CPU "
              << rep.cpu_seconds << " s\n";
    if (config.energy_audit)
        std::cout << "energy audit " << (r.energy_ok ? "ok" : "VIOLATED") << " (worst slack/tolerance "
                  << r.energy_worst_ratio << ")\n";
    for (const auto& [t, prof] : r.profiles)
        for (std::size_t f = 0; f < prof.front.size(); ++f)
            std::cout << "front t = " << time_label(t) << " fracture " << f << ": " << prof.front[f] << " m\n";
    (r.exit_code == 0 ? std::cout : std::cerr) << r.message << '\n';
    return r.exit_code;
}

int cmd_mesh_gen(const std::string& path, const std::string& output)
{
    const RunConfig config = load_config(path);
    const Mesh mesh = build_mesh(config);
    const auto violations = validate_mesh(mesh);
    if (!violations.empty()) throw MeshError("invalid mesh: " + violations.front());
    if (output.empty() || output == "-") {
        write_mesh(std::cout, mesh);
    } else {
        write_mesh_file(output, mesh);
        std::cout << "wrote " << output << ": " << mesh.num_nodes() << " nodes, " << mesh.num_triangles()
                  << " triangles, " << mesh.fracture_edges().size() << " fracture edges\n";
    }
    return 0;
}

int cmd_check_gdm(const std::string& path, int levels, const std::string& output, unsigned seed)
{
    const RunConfig config = load_config(path);
    RunConfig base = config;
    base.mesh.refinements = 0;
    GdmStudyOptions opt;
    opt.levels = levels;
    opt.eigen.seed = seed;
    const auto rows = gdm_study(build_mesh(base), opt);
    const std::string csv = gdm_csv(rows);
    const std::string dir = output_dir(output, config);
    ensure_dir(dir);
    write_text_file((fs::path(dir) / "gdm_diagnostics.csv").string(), csv);
    std::cout << csv;
    return 0;
}

int cmd_mms(const std::string& path, int levels, const std::string& output)
{
    const RunConfig config = load_config(path);
    StructuredMeshParams p;
    p.lx = config.mesh.lx;
    p.ly = config.mesh.ly;
    p.nx = config.mesh.nx;
    p.ny = config.mesh.ny;
    const auto rows = mms_study(p, levels);
    std::vector<double> e;
    for (const auto& r : rows) e.push_back(r.l2_error);
    const std::string csv = mms_csv(rows);
    const std::string dir = output_dir(output, config);
    ensure_dir(dir);
    write_text_file((fs::path(dir) / "mms.csv").string(), csv);
    std::cout << csv << "L2 slope " << convergence_slope(e) << '\n';
    return 0;
}

int cmd_audit(const std::string& path, const std::string& output)
{
    const Trajectory tr = read_trajectory(path);
    std::istringstream in(tr.config);
    const RunConfig config = parse_config(in, path + " (embedded config)");
    const Mesh mesh = build_mesh(config);
    const GradientDiscretisation gd = build_vag(mesh, config.boundary.dirichlet_mask());
    const Assembler assembler(gd, config.physics);
    if (tr.initial.size() != gd.num_dofs) throw OutputError("trajectory does not match its configuration");
    EnergyAudit audit(assembler, config.newton.crit_rel);
    std::string csv = energy_header();
    const State* prev = &tr.initial;
    for (const auto& s : tr.steps) {
        csv += energy_row(audit.record(*prev, s.state, s.t, s.dt));
        prev = &s.state;
    }
    if (!output.empty()) {
        ensure_dir(output);
        write_text_file((fs::path(output) / "energy_audit.csv").string(), csv);
    } else {
        std::cout << csv;
    }
    std::cout << tr.steps.size() << " steps, energy audit " << (audit.ok() ? "ok" : "VIOLATED")
              << " (worst slack/tolerance " << audit.worst_ratio() << ")\n";
    return audit.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-phase Darcy flow in fractured porous media"};
    app.require_subcommand(1);
    int threads = 0, levels = 3;
    unsigned seed = 12345;
    std::string output, config, trajectory;
    bool resume = false;

    auto* run = app.add_subcommand("run", "run a simulation");
    run->add_option("config", config, "configuration file")->required();
    run->add_option("--threads", threads, "assembly worker threads");
    run->add_option("--output", output, "output directory");
    run->add_flag("--resume", resume, "continue from the checkpoint in the output directory");

    auto* mesh = app.add_subcommand("mesh-gen", "write the configured mesh");
    mesh->add_option("config", config, "configuration file")->required();
    mesh->add_option("--output", output, "mesh file (default: stdout)");

    auto* gdm = app.add_subcommand("check-gdm", "gradient discretisation diagnostics under refinement");
    gdm->add_option("config", config, "configuration file")->required();
    gdm->add_option("--levels", levels, "number of refinements")->check(CLI::Range(0, 6));
    gdm->add_option("--output", output, "output directory");
    gdm->add_option("--seed", seed, "seed of the eigenvalue iterations");

    auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
    mms->add_option("config", config, "configuration file")->required();
    mms->add_option("--levels", levels, "number of mesh levels")->check(CLI::Range(2, 7));
    mms->add_option("--output", output, "output directory");

    auto* audit = app.add_subcommand("audit", "energy ledger of a stored trajectory");
    audit->add_option("trajectory", trajectory, "trajectory file")->required();
    audit->add_option("--output", output, "output directory (default: print)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config, threads, output, resume);
        if (*mesh) return cmd_mesh_gen(config, output);
        if (*gdm) return cmd_check_gdm(config, levels, output, seed);
        if (*mms) return cmd_mms(config, levels, output);
        if (*audit) return cmd_audit(trajectory, output);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
