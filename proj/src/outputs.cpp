#include "fracflow/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace fracflow {

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hex(const std::string& s)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw OutputError("malformed number '" + s + "'");
    return v;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw OutputError("cannot read '" + path + "'");
    return in;
}

void write_state(std::ostream& out, const State& s)
{
    out << "STATE " << s.size() << '\n';
    for (int i = 0; i < s.size(); ++i) out << hex(s.u[kOil][i]) << ' ' << hex(s.u[kWater][i]) << '\n';
}

State read_state(std::istream& in)
{
    std::string tag;
    int n = 0;
    if (!(in >> tag >> n) || tag != "STATE" || n < 0) throw OutputError("expected STATE block");
    State s(n);
    std::string a, b;
    for (int i = 0; i < n; ++i) {
        if (!(in >> a >> b)) throw OutputError("truncated STATE block");
        s.u[kOil][i] = parse_hex(a);
        s.u[kWater][i] = parse_hex(b);
    }
    return s;
}

}  // namespace

// --- volumes -------------------------------------------------------------------------

VolumeRecord oil_volumes(const Assembler& assembler, const State& state, double t)
{
    const auto& gd = assembler.gd();
    const auto& ph = assembler.physics();
    const Vector p = state.p();
    VolumeRecord v;
    v.t = t;
    for (const auto& part : gd.matrix_parts) {
        const auto& rock = ph.matrix_rock(part.region);
        v.matrix += rock.porosity * part.measure * saturation(rock, p[part.dof]);
    }
    for (const auto& part : gd.fracture_parts) {
        const auto& rock = ph.fracture_rock(gd.fracture[part.piece].region);
        v.fracture += rock.porosity * rock.width * part.length() * saturation(rock, p[part.dof]);
    }
    double layer = 0.0;
    for (const auto& ip : gd.interface) {
        const auto& rm = ph.matrix_rock(ip.matrix_region);
        const auto& rf = ph.fracture_rock(gd.fracture[ip.fracture_piece].region);
        layer += eta(ph.interface, rf.width) * ip.length() * interface_saturation(ph.interface, rm, rf, p[ip.trace_dof]);
    }
    const double eps = ph.interface.epsilon;
    v.interface = eps > 0.0 ? layer / eps : std::numeric_limits<double>::quiet_NaN();
    return v;
}

std::array<double, kNumPhases> boundary_inflow(const Assembler& assembler, const State& prev, const State& next,
                                               double dt)
{
    const auto terms = assembler.terms(prev, next, dt);
    const auto& gd = assembler.gd();
    std::array<double, kNumPhases> in{0.0, 0.0};
    for (int i = 0; i < gd.num_dofs; ++i)
        if (gd.dirichlet[i])
            for (int a = 0; a < kNumPhases; ++a) in[a] += terms.transport[2 * i + a];
    return in;
}

// --- fracture profiles -----------------------------------------------------------------

double polyline_arclength(const std::vector<Point>& polyline, const Point& x)
{
    double best = std::numeric_limits<double>::infinity(), s_best = 0.0, s = 0.0;
    for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
        const Point a = polyline[k], b = polyline[k + 1];
        const double len = (b - a).norm();
        const double tau = len > 0.0 ? std::clamp((x - a).dot(b - a) / (len * len), 0.0, 1.0) : 0.0;
        const double d = (a + tau * (b - a) - x).norm();
        if (d < best) {
            best = d;
            s_best = s + tau * len;
        }
        s += len;
    }
    return s_best;
}

double front_position(const std::vector<ProfileRow>& rows, double threshold)
{
    double front = 0.0;
    for (const auto& r : rows)
        if (r.saturation >= threshold) front = std::max(front, r.arclength);
    return front;
}

FractureProfile extract_fracture_profile(const GradientDiscretisation& gd, const Mesh& mesh,
                                         const PhysicsModel& physics, const State& state, double threshold)
{
    FractureProfile prof;
    const int nf = static_cast<int>(mesh.fractures().size());
    std::vector<std::map<int, int>> seen(nf);  // dof -> region
    for (const auto& piece : gd.fracture)
        for (int d : piece.dofs) seen.at(piece.fracture).emplace(d, piece.region);
    prof.front.assign(nf, 0.0);
    for (int f = 0; f < nf; ++f) {
        std::vector<ProfileRow> rows;
        for (const auto& [dof, region] : seen[f]) {
            ProfileRow r;
            r.fracture = f;
            r.dof = dof;
            r.position = gd.position[dof];
            r.arclength = polyline_arclength(mesh.fractures()[f].polyline, r.position);
            r.saturation = saturation(physics.fracture_rock(region), state.capillary(dof));
            rows.push_back(r);
        }
        std::sort(rows.begin(), rows.end(), [](const ProfileRow& a, const ProfileRow& b) {
            return a.arclength < b.arclength || (a.arclength == b.arclength && a.dof < b.dof);
        });
        prof.front[f] = front_position(rows, threshold);
        prof.rows.insert(prof.rows.end(), rows.begin(), rows.end());
    }
    return prof;
}

// --- files -------------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
    if (!out) throw OutputError("write failed for '" + path + "'");
}

void write_vtk(const std::string& path, const Mesh& mesh, const GradientDiscretisation& gd,
               const PhysicsModel& physics, const State& state, double t)
{
    const auto& nodes = mesh.nodes();
    const auto& tris = mesh.triangles();
    const auto& fedges = mesh.fracture_edges();
    std::vector<int> node_dof(nodes.size(), -1), cell_dof(tris.size(), -1);
    for (int i = 0; i < gd.num_dofs; ++i) {
        if (gd.kind[i] == DofKind::Node || gd.kind[i] == DofKind::Fracture) node_dof[gd.entity[i]] = i;
        if (gd.kind[i] == DofKind::Cell) cell_dof[gd.entity[i]] = i;
    }
    std::vector<int> node_region(nodes.size(), -1);  // fracture region of fracture nodes
    for (const auto& e : fedges)
        for (int n : e.nodes) node_region[n] = e.region;

    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n";
    out << "fracflow t = " << num(t) << " s\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nodes.size() << " double\n";
    for (const auto& x : nodes) out << num(x.x()) << ' ' << num(x.y()) << " 0\n";
    const std::size_t ncells = tris.size() + fedges.size();
    out << "CELLS " << ncells << ' ' << 4 * tris.size() + 3 * fedges.size() << '\n';
    for (const auto& tr : tris) out << "3 " << tr.nodes[0] << ' ' << tr.nodes[1] << ' ' << tr.nodes[2] << '\n';
    for (const auto& e : fedges) out << "2 " << e.nodes[0] << ' ' << e.nodes[1] << '\n';
    out << "CELL_TYPES " << ncells << '\n';
    for (std::size_t k = 0; k < tris.size(); ++k) out << "5\n";
    for (std::size_t k = 0; k < fedges.size(); ++k) out << "3\n";

    out << "CELL_DATA " << ncells << '\n';
    out << "SCALARS S_m double 1\nLOOKUP_TABLE default\n";
    for (std::size_t k = 0; k < tris.size(); ++k)
        out << num(saturation(physics.matrix_rock(tris[k].region), state.capillary(cell_dof[k]))) << '\n';
    for (std::size_t k = 0; k < fedges.size(); ++k) out << "0\n";
    out << "SCALARS S_f double 1\nLOOKUP_TABLE default\n";
    for (std::size_t k = 0; k < tris.size(); ++k) out << "0\n";
    for (const auto& e : fedges) {
        const auto& rock = physics.fracture_rock(e.region);
        double s = 0.0;
        for (int n : e.nodes) s += 0.5 * saturation(rock, state.capillary(node_dof[n]));
        out << num(s) << '\n';
    }
    out << "SCALARS cell_kind int 1\nLOOKUP_TABLE default\n";
    for (std::size_t k = 0; k < tris.size(); ++k) out << "0\n";
    for (std::size_t k = 0; k < fedges.size(); ++k) out << "1\n";

    out << "POINT_DATA " << nodes.size() << '\n';
    auto point_field = [&](const char* name, auto value) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t n = 0; n < nodes.size(); ++n) out << num(node_dof[n] >= 0 ? value(n) : 0.0) << '\n';
    };
    point_field("u1", [&](std::size_t n) { return state.u[kOil][node_dof[n]]; });
    point_field("u2", [&](std::size_t n) { return state.u[kWater][node_dof[n]]; });
    point_field("p", [&](std::size_t n) { return state.capillary(node_dof[n]); });
    point_field("S", [&](std::size_t n) {
        const double p = state.capillary(node_dof[n]);
        if (node_region[n] >= 0) return saturation(physics.fracture_rock(node_region[n]), p);
        const int tri = mesh.node_triangles(static_cast<int>(n)).front();
        return saturation(physics.matrix_rock(tris[tri].region), p);
    });
    write_text_file(path, out.str());
}

std::string volumes_header()
{
    return "# fracflow-volumes v1\nt_s,oil_matrix_m2,oil_fracture_m2,oil_interface_over_eps_m2,oil_inflow_m2\n";
}

std::string volume_row(const VolumeRecord& v)
{
    return num(v.t) + ',' + num(v.matrix) + ',' + num(v.fracture) + ',' + num(v.interface) + ',' + num(v.inflow) + '\n';
}

std::string energy_header()
{
    return "# fracflow-energy v1\nt_s,dt_s,storage,diffusion,coupling,source_work,gravity_work,boundary_work,"
           "lhs,rhs,slack,tolerance,ok\n";
}

std::string energy_row(const EnergyStep& s)
{
    const auto& e = s.terms;
    return num(s.t) + ',' + num(s.dt) + ',' + num(e.storage) + ',' + num(e.diffusion) + ',' + num(e.coupling) + ',' +
           num(e.source_work) + ',' + num(e.gravity_work) + ',' + num(e.boundary_work) + ',' + num(s.lhs) + ',' +
           num(s.rhs) + ',' + num(s.slack) + ',' + num(s.tolerance) + ',' + (s.ok ? "1" : "0") + '\n';
}

void write_profile_csv(const std::string& path, const FractureProfile& profile, double t)
{
    std::ostringstream out;
    out << "# fracflow-profile v1 t_s=" << num(t);
    for (std::size_t f = 0; f < profile.front.size(); ++f) out << " front" << f << "_m=" << num(profile.front[f]);
    out << "\nfracture,arclength_m,x_m,y_m,S_f\n";
    for (const auto& r : profile.rows)
        out << r.fracture << ',' << num(r.arclength) << ',' << num(r.position.x()) << ',' << num(r.position.y()) << ','
            << num(r.saturation) << '\n';
    write_text_file(path, out.str());
}

void write_report_csv(const std::string& path, const SolverReport& report)
{
    std::ostringstream out;
    out << "# fracflow-report v1\nN_dt,N_Newton,N_Chop,CPU_s,status\n";
    out << report.n_dt << ',' << report.n_newton << ',' << report.n_chop << ',' << std::fixed << std::setprecision(3)
        << report.cpu_seconds << ',' << (report.aborted ? (report.singular ? "singular" : "aborted") : "completed")
        << '\n';
    write_text_file(path, out.str());
}

std::string time_label(double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6gh", t / units::hour);
    return buf;
}

void truncate_csv(const std::string& path, double t)
{
    std::string text;
    {
        auto in = open_in(path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    std::istringstream lines(text);
    std::string line, out;
    int header = 0;
    while (std::getline(lines, line)) {
        if (header < 2) {
            out += line + '\n';
            ++header;
            continue;
        }
        const double first = std::strtod(line.c_str(), nullptr);
        if (first <= t) out += line + '\n';
    }
    write_text_file(path, out);
}

// --- checkpoints and trajectories ------------------------------------------------------------

void write_checkpoint(const std::string& path, const Checkpoint& cp)
{
    std::ostringstream out;
    out << "fracflow-checkpoint v1\n";
    out << "position " << hex(cp.position.t) << ' ' << hex(cp.position.dt_nominal) << '\n';
    out << "counters " << cp.n_dt << ' ' << cp.n_newton << ' ' << cp.n_chop << ' ' << hex(cp.cpu_seconds) << '\n';
    out << "energy " << hex(cp.energy_lhs) << ' ' << hex(cp.energy_rhs) << ' ' << hex(cp.energy_magnitude) << '\n';
    out << "inflow " << hex(cp.inflow) << '\n';
    write_state(out, cp.state);
    const std::string tmp = path + ".tmp";
    write_text_file(tmp, out.str());
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw OutputError("cannot replace '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path)
{
    auto in = open_in(path);
    std::string magic, version, tag, a, b, c, d;
    Checkpoint cp;
    if (!(in >> magic >> version) || magic != "fracflow-checkpoint" || version != "v1")
        throw OutputError("'" + path + "' is not a fracflow checkpoint");
    if (!(in >> tag >> a >> b) || tag != "position") throw OutputError("'" + path + "': bad position line");
    cp.position.t = parse_hex(a);
    cp.position.dt_nominal = parse_hex(b);
    if (!(in >> tag >> cp.n_dt >> cp.n_newton >> cp.n_chop >> d) || tag != "counters")
        throw OutputError("'" + path + "': bad counters line");
    cp.cpu_seconds = parse_hex(d);
    if (!(in >> tag >> a >> b >> c) || tag != "energy") throw OutputError("'" + path + "': bad energy line");
    cp.energy_lhs = parse_hex(a);
    cp.energy_rhs = parse_hex(b);
    cp.energy_magnitude = parse_hex(c);
    if (!(in >> tag >> a) || tag != "inflow") throw OutputError("'" + path + "': bad inflow line");
    cp.inflow = parse_hex(a);
    try {
        cp.state = read_state(in);
    } catch (const OutputError& e) {
        throw OutputError("'" + path + "': " + e.what());
    }
    return cp;
}

void write_trajectory_header(std::ostream& out, const std::string& config, const State& initial)
{
    std::size_t lines = std::count(config.begin(), config.end(), '\n');
    if (!config.empty() && config.back() != '\n') ++lines;
    out << "fracflow-trajectory v1\nCONFIG " << lines << '\n' << config;
    if (!config.empty() && config.back() != '\n') out << '\n';
    write_state(out, initial);
}

void write_trajectory_step(std::ostream& out, const TrajectoryStep& step)
{
    out << "STEP " << hex(step.t) << ' ' << hex(step.dt) << '\n';
    write_state(out, step.state);
}

Trajectory read_trajectory(const std::string& path)
{
    auto in = open_in(path);
    Trajectory tr;
    std::string line;
    std::getline(in, line);
    if (line != "fracflow-trajectory v1") throw OutputError("'" + path + "' is not a fracflow trajectory");
    std::string tag;
    std::size_t lines = 0;
    if (!(in >> tag >> lines) || tag != "CONFIG") throw OutputError("'" + path + "': missing CONFIG block");
    std::getline(in, line);
    for (std::size_t k = 0; k < lines; ++k) {
        if (!std::getline(in, line)) throw OutputError("'" + path + "': truncated CONFIG block");
        tr.config += line + '\n';
    }
    try {
        tr.initial = read_state(in);
        std::string a, b;
        while (in >> tag) {
            if (tag != "STEP" || !(in >> a >> b)) throw OutputError("expected STEP");
            TrajectoryStep s;
            s.t = parse_hex(a);
            s.dt = parse_hex(b);
            s.state = read_state(in);
            tr.steps.push_back(std::move(s));
        }
    } catch (const OutputError& e) {
        throw OutputError("'" + path + "': " + e.what());
    }
    return tr;
}

}  // namespace fracflow
