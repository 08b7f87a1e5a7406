#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracflow/assembly.hpp"
#include "fracflow/mesh.hpp"
#include "fracflow/solver.hpp"

namespace fracflow {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshConfig {
    std::string file;               // mesh file; empty: structured grid below
    double lx = 10.0, ly = 20.0;
    int nx = 20, ny = 40;
    bool fracture = true;           // one vertical fracture over the full height
    double fracture_x = 5.0;
    int refinements = 0;
};

struct OutputConfig {
    std::string directory = "output";
    double cadence = 1.0 * units::hour;
    std::vector<double> snapshots{6.0 * units::hour};
    bool vtk = true;
    bool trajectory = false;
    bool checkpoints = true;
    double front_threshold = 0.5;
};

struct RunConfig {
    MeshConfig mesh;
    PhysicsModel physics;
    BoundarySpec boundary = BoundarySpec::reservoir();
    NewtonConfig newton;
    TimeControl time;
    OutputConfig output;
    int threads = 1;
    bool energy_audit = true;
    std::vector<std::string> warnings;

    RunConfig();
    /// Physical and numerical validity violations; empty when valid.
    std::vector<std::string> validate() const;
    /// Snapshot times up to the end time: cadence multiples plus the forced snapshots.
    std::vector<double> snapshot_times() const;
};

/// Sectioned key = value text. Values take an optional unit (bar, Pa, darcy, mD, d, h,
/// min, s, m, cm, mm). Unknown sections or keys are errors.
RunConfig parse_config(std::istream& in, const std::string& name = "<config>");
RunConfig load_config(const std::string& path);

/// Fully resolved configuration in SI units; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& config);

/// Mesh given by the configuration, with fracture widths taken from the physics.
Mesh build_mesh(const RunConfig& config);

/// Parses "<number> [unit]" for the given dimension ("pressure", "permeability", "time",
/// "length", or "" for plain numbers).
double parse_quantity(const std::string& text, const std::string& dimension);

}  // namespace fracflow
