#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracflow/config.hpp"
#include "fracflow/energy_audit.hpp"
#include "fracflow/outputs.hpp"

namespace fracflow {

struct RunOptions {
    std::optional<int> threads;
    std::optional<std::string> output_dir;
    bool resume = false;
    bool write_files = true;
    int max_steps = -1;  // stop after this many accepted steps, as if interrupted
};

struct RunResult {
    int exit_code = 0;
    bool interrupted = false;
    std::string message;
    SolverReport report;
    double final_time = 0.0;
    State final_state;
    int num_cells = 0;
    int num_dofs = 0;
    std::vector<std::pair<double, FractureProfile>> profiles;
    std::vector<VolumeRecord> volumes;
    std::vector<EnergyStep> energy;
    bool energy_ok = true;
    double energy_worst_ratio = 0.0;
    double min_saturation = 1.0;
    double max_saturation = 0.0;
    bool saturation_ok = true;
};

/// Water at hydrostatic equilibrium from the top boundary value, zero capillary pressure,
/// Dirichlet values applied.
State hydrostatic_initial_state(const GradientDiscretisation& gd, const RunConfig& config);

/// Smallest and largest saturation over every reconstruction (matrix, fracture, layers).
std::pair<double, double> saturation_range(const Assembler& assembler, const State& state);

/// Builds the mesh and discretisation, runs the time loop and writes the outputs.
RunResult run_simulation(const RunConfig& config, const RunOptions& options = {});

}  // namespace fracflow
