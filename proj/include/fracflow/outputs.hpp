#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fracflow/assembly.hpp"
#include "fracflow/energy_audit.hpp"
#include "fracflow/solver.hpp"

namespace fracflow {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Oil volumes at one time: matrix, fracture, and interfacial layers divided by epsilon.
struct VolumeRecord {
    double t = 0.0;
    double matrix = 0.0;
    double fracture = 0.0;
    double interface = 0.0;
    double inflow = 0.0;  // cumulative net boundary oil inflow
};

VolumeRecord oil_volumes(const Assembler& assembler, const State& state, double t);

/// Net oil and water inflow rates through the Dirichlet DOFs over a step.
std::array<double, kNumPhases> boundary_inflow(const Assembler& assembler, const State& prev, const State& next,
                                               double dt);

struct ProfileRow {
    int fracture = 0;
    int dof = -1;
    double arclength = 0.0;
    Point position;
    double saturation = 0.0;
};

struct FractureProfile {
    std::vector<ProfileRow> rows;  // sorted by fracture, then arclength
    std::vector<double> front;     // per fracture: largest arclength with S_f >= threshold
};

/// Arclength of the point along the polyline, measured from its first vertex.
double polyline_arclength(const std::vector<Point>& polyline, const Point& x);

FractureProfile extract_fracture_profile(const GradientDiscretisation& gd, const Mesh& mesh,
                                         const PhysicsModel& physics, const State& state, double threshold = 0.5);

/// Front position from arclength-sorted rows of one fracture.
double front_position(const std::vector<ProfileRow>& rows, double threshold);

void write_vtk(const std::string& path, const Mesh& mesh, const GradientDiscretisation& gd,
               const PhysicsModel& physics, const State& state, double t);

std::string volumes_header();
std::string volume_row(const VolumeRecord& v);
std::string energy_header();
std::string energy_row(const EnergyStep& s);
void write_profile_csv(const std::string& path, const FractureProfile& profile, double t);
void write_report_csv(const std::string& path, const SolverReport& report);

/// File name label of a snapshot time: hours with up to 6 significant digits.
std::string time_label(double t);

/// Restart data written after every accepted step (bit-exact hexfloat text).
struct Checkpoint {
    LoopPosition position;
    int n_dt = 0, n_newton = 0, n_chop = 0;
    double cpu_seconds = 0.0;
    double energy_lhs = 0.0, energy_rhs = 0.0, energy_magnitude = 0.0;
    double inflow = 0.0;
    State state;
};

void write_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::string& path);

/// Trajectory file: the resolved configuration followed by every accepted state.
struct TrajectoryStep {
    double t = 0.0;
    double dt = 0.0;
    State state;
};

struct Trajectory {
    std::string config;  // resolved configuration text
    State initial;
    std::vector<TrajectoryStep> steps;
};

void write_trajectory_header(std::ostream& out, const std::string& config, const State& initial);
void write_trajectory_step(std::ostream& out, const TrajectoryStep& step);
Trajectory read_trajectory(const std::string& path);

/// Writes text to a file, replacing it; throws OutputError naming the path.
void write_text_file(const std::string& path, const std::string& text);
/// Keeps the header and the data lines whose first column is <= t.
void truncate_csv(const std::string& path, double t);

}  // namespace fracflow
