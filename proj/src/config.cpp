#include "fracflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fracflow/mesh_io.hpp"

namespace fracflow {

namespace {

struct UnitInfo {
    std::string dimension;
    double factor;
};

const std::map<std::string, UnitInfo>& unit_table()
{
    static const std::map<std::string, UnitInfo> table{
        {"Pa", {"pressure", 1.0}},          {"bar", {"pressure", units::bar}},
        {"m2", {"permeability", 1.0}},      {"darcy", {"permeability", units::darcy}},
        {"mD", {"permeability", 1e-3 * units::darcy}},
        {"s", {"time", 1.0}},               {"min", {"time", 60.0}},
        {"h", {"time", units::hour}},       {"d", {"time", units::day}},
        {"m", {"length", 1.0}},             {"cm", {"length", 0.01}},
        {"mm", {"length", 0.001}},          {"kg/m3", {"density", 1.0}},
        {"Pa.s", {"viscosity", 1.0}},       {"cP", {"viscosity", 1e-3}},
        {"m/s2", {"acceleration", 1.0}},
    };
    return table;
}

std::string si_unit(const std::string& dimension)
{
    static const std::map<std::string, std::string> si{{"pressure", "Pa"}, {"permeability", "m2"},  {"time", "s"},
                                                       {"length", "m"},    {"density", "kg/m3"},    {"viscosity", "Pa.s"},
                                                       {"acceleration", "m/s2"}};
    auto it = si.find(dimension);
    return it == si.end() ? "" : it->second;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool parse_bool(const std::string& text)
{
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ConfigError("expected a boolean, got '" + text + "'");
}

int parse_int(const std::string& text)
{
    const std::string t = trim(text);
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw ConfigError("expected an integer, got '" + text + "'");
    return v;
}

struct Entry {
    std::string section, key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

using Access = std::function<double&(RunConfig&)>;

Entry number(std::string section, std::string key, std::string dim, Access acc)
{
    return {section, key,
            [acc, dim](RunConfig& c, const std::string& v) { acc(c) = parse_quantity(v, dim); },
            [acc, dim](const RunConfig& c) {
                const std::string u = si_unit(dim);
                return format_number(acc(const_cast<RunConfig&>(c))) + (u.empty() ? "" : " " + u);
            }};
}

Entry integer(std::string section, std::string key, std::function<int&(RunConfig&)> acc)
{
    return {section, key, [acc](RunConfig& c, const std::string& v) { acc(c) = parse_int(v); },
            [acc](const RunConfig& c) { return std::to_string(acc(const_cast<RunConfig&>(c))); }};
}

Entry boolean(std::string section, std::string key, std::function<bool&(RunConfig&)> acc)
{
    return {section, key, [acc](RunConfig& c, const std::string& v) { acc(c) = parse_bool(v); },
            [acc](const RunConfig& c) { return std::string(acc(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

DirichletValue& dirichlet(RunConfig& c, BoundaryTag tag)
{
    auto& slot = c.boundary.dirichlet[static_cast<int>(tag)];
    if (!slot) slot = DirichletValue{};
    return *slot;
}

const std::vector<Entry>& entries()
{
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t;
        // mesh
        t.push_back({"mesh", "file", [](RunConfig& c, const std::string& v) { c.mesh.file = trim(v); },
                     [](const RunConfig& c) { return c.mesh.file; }});
        t.push_back(number("mesh", "lx", "length", [](RunConfig& c) -> double& { return c.mesh.lx; }));
        t.push_back(number("mesh", "ly", "length", [](RunConfig& c) -> double& { return c.mesh.ly; }));
        t.push_back(integer("mesh", "nx", [](RunConfig& c) -> int& { return c.mesh.nx; }));
        t.push_back(integer("mesh", "ny", [](RunConfig& c) -> int& { return c.mesh.ny; }));
        t.push_back({"mesh", "fracture",
                     [](RunConfig& c, const std::string& v) {
                         if (trim(v) == "none") {
                             c.mesh.fracture = false;
                         } else {
                             c.mesh.fracture = true;
                             c.mesh.fracture_x = parse_quantity(v, "length");
                         }
                     },
                     [](const RunConfig& c) {
                         return c.mesh.fracture ? format_number(c.mesh.fracture_x) + " m" : std::string("none");
                     }});
        t.push_back(integer("mesh", "refinements", [](RunConfig& c) -> int& { return c.mesh.refinements; }));
        // physics
        auto& P = t;
        P.push_back(number("physics", "matrix_permeability", "permeability",
                           [](RunConfig& c) -> double& { return c.physics.matrix[0].permeability; }));
        P.push_back(number("physics", "matrix_porosity", "", [](RunConfig& c) -> double& { return c.physics.matrix[0].porosity; }));
        P.push_back(number("physics", "matrix_capillary_scale", "pressure",
                           [](RunConfig& c) -> double& { return c.physics.matrix[0].capillary.a; }));
        P.push_back(integer("physics", "matrix_relperm_exponent",
                            [](RunConfig& c) -> int& { return c.physics.matrix[0].relperm_exponent; }));
        P.push_back(number("physics", "fracture_permeability", "permeability",
                           [](RunConfig& c) -> double& { return c.physics.fracture[0].permeability; }));
        P.push_back(number("physics", "fracture_normal_permeability", "permeability",
                           [](RunConfig& c) -> double& { return c.physics.fracture[0].normal_permeability; }));
        P.push_back(number("physics", "fracture_porosity", "",
                           [](RunConfig& c) -> double& { return c.physics.fracture[0].porosity; }));
        P.push_back(number("physics", "fracture_capillary_scale", "pressure",
                           [](RunConfig& c) -> double& { return c.physics.fracture[0].capillary.a; }));
        P.push_back(integer("physics", "fracture_relperm_exponent",
                            [](RunConfig& c) -> int& { return c.physics.fracture[0].relperm_exponent; }));
        P.push_back(number("physics", "fracture_width", "length", [](RunConfig& c) -> double& { return c.physics.fracture[0].width; }));
        P.push_back(number("physics", "oil_density", "density", [](RunConfig& c) -> double& { return c.physics.fluid.density[kOil]; }));
        P.push_back(number("physics", "water_density", "density",
                           [](RunConfig& c) -> double& { return c.physics.fluid.density[kWater]; }));
        P.push_back(number("physics", "oil_viscosity", "viscosity",
                           [](RunConfig& c) -> double& { return c.physics.fluid.viscosity[kOil]; }));
        P.push_back(number("physics", "water_viscosity", "viscosity",
                           [](RunConfig& c) -> double& { return c.physics.fluid.viscosity[kWater]; }));
        P.push_back({"physics", "gravity_acceleration",
                     [](RunConfig& c, const std::string& v) {
                         c.physics.fluid.gravity = Point(0.0, -parse_quantity(v, "acceleration"));
                     },
                     [](const RunConfig& c) { return format_number(-c.physics.fluid.gravity.y()) + " m/s2"; }});
        P.push_back(boolean("physics", "gravity", [](RunConfig& c) -> bool& { return c.physics.gravity; }));
        P.push_back(number("physics", "interface_porosity", "", [](RunConfig& c) -> double& { return c.physics.interface.porosity; }));
        P.push_back(number("physics", "theta", "", [](RunConfig& c) -> double& { return c.physics.interface.theta; }));
        P.push_back(number("physics", "epsilon", "", [](RunConfig& c) -> double& { return c.physics.interface.epsilon; }));
        // boundary
        t.push_back(number("boundary", "bottom_water_pressure", "pressure",
                           [](RunConfig& c) -> double& { return dirichlet(c, BoundaryTag::Bottom).water_pressure; }));
        t.push_back(number("boundary", "bottom_capillary_pressure", "pressure",
                           [](RunConfig& c) -> double& { return dirichlet(c, BoundaryTag::Bottom).capillary_pressure; }));
        t.push_back(number("boundary", "top_water_pressure", "pressure",
                           [](RunConfig& c) -> double& { return dirichlet(c, BoundaryTag::Top).water_pressure; }));
        t.push_back(number("boundary", "top_capillary_pressure", "pressure",
                           [](RunConfig& c) -> double& { return dirichlet(c, BoundaryTag::Top).capillary_pressure; }));
        // newton
        t.push_back(number("newton", "crit", "", [](RunConfig& c) -> double& { return c.newton.crit_rel; }));
        t.push_back(integer("newton", "max_iter", [](RunConfig& c) -> int& { return c.newton.max_iter; }));
        t.push_back(number("newton", "backtrack", "", [](RunConfig& c) -> double& { return c.newton.backtrack; }));
        t.push_back(number("newton", "min_step", "", [](RunConfig& c) -> double& { return c.newton.min_step; }));
        t.push_back(number("newton", "saturation_cap", "", [](RunConfig& c) -> double& { return c.newton.saturation_cap; }));
        // time
        t.push_back(number("time", "end", "time", [](RunConfig& c) -> double& { return c.time.end_time; }));
        t.push_back(number("time", "dt_max_early", "time", [](RunConfig& c) -> double& { return c.time.schedule[0].second; }));
        t.push_back(number("time", "dt_switch", "time", [](RunConfig& c) -> double& { return c.time.schedule[0].first; }));
        t.push_back(number("time", "dt_max_late", "time", [](RunConfig& c) -> double& { return c.time.schedule[1].second; }));
        t.push_back(number("time", "initial_dt", "time", [](RunConfig& c) -> double& { return c.time.initial_dt; }));
        t.push_back(number("time", "min_dt", "time", [](RunConfig& c) -> double& { return c.time.min_dt; }));
        t.push_back(number("time", "growth", "", [](RunConfig& c) -> double& { return c.time.growth; }));
        t.push_back(number("time", "chop", "", [](RunConfig& c) -> double& { return c.time.chop; }));
        // output
        t.push_back({"output", "directory", [](RunConfig& c, const std::string& v) { c.output.directory = trim(v); },
                     [](const RunConfig& c) { return c.output.directory; }});
        t.push_back(number("output", "cadence", "time", [](RunConfig& c) -> double& { return c.output.cadence; }));
        t.push_back({"output", "snapshots",
                     [](RunConfig& c, const std::string& v) {
                         c.output.snapshots.clear();
                         std::stringstream ss(v);
                         std::string item;
                         while (std::getline(ss, item, ','))
                             if (!trim(item).empty()) c.output.snapshots.push_back(parse_quantity(item, "time"));
                     },
                     [](const RunConfig& c) {
                         std::string s;
                         for (double x : c.output.snapshots) s += (s.empty() ? "" : ", ") + format_number(x) + " s";
                         return s;
                     }});
        t.push_back(boolean("output", "vtk", [](RunConfig& c) -> bool& { return c.output.vtk; }));
        t.push_back(boolean("output", "trajectory", [](RunConfig& c) -> bool& { return c.output.trajectory; }));
        t.push_back(boolean("output", "checkpoints", [](RunConfig& c) -> bool& { return c.output.checkpoints; }));
        t.push_back(number("output", "front_threshold", "", [](RunConfig& c) -> double& { return c.output.front_threshold; }));
        // run
        t.push_back(integer("run", "threads", [](RunConfig& c) -> int& { return c.threads; }));
        t.push_back(boolean("run", "energy_audit", [](RunConfig& c) -> bool& { return c.energy_audit; }));
        return t;
    }();
    return table;
}

}  // namespace

RunConfig::RunConfig()
{
    physics.fracture[0].width = 0.01;
}

double parse_quantity(const std::string& text, const std::string& dimension)
{
    const std::string t = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr == t.data()) throw ConfigError("expected a number, got '" + text + "'");
    const std::string unit = trim(std::string(ptr, t.data() + t.size()));
    if (unit.empty()) return v;
    auto it = unit_table().find(unit);
    if (it == unit_table().end()) throw ConfigError("unknown unit '" + unit + "'");
    if (it->second.dimension != dimension)
        throw ConfigError("unit '" + unit + "' is not a " + (dimension.empty() ? "plain number" : dimension) + " unit");
    return v * it->second.factor;
}

RunConfig parse_config(std::istream& in, const std::string& name)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(name + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig c;
    const auto& table = entries();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(name + ": key '" + section + "' outside of a section");
        bool known_section = false;
        for (const auto& e : table) known_section |= e.section == section;
        if (!known_section) throw ConfigError(name + ": unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            auto it = std::find_if(table.begin(), table.end(),
                                   [&](const Entry& e) { return e.section == section && e.key == key; });
            if (it == table.end()) throw ConfigError(name + ": unknown key '" + key + "' in section [" + section + "]");
            std::string text = value.data();
            const auto hash = text.find_first_of("#;");
            if (hash != std::string::npos) text = text.substr(0, hash);
            try {
                it->set(c, text);
            } catch (const ConfigError& err) {
                throw ConfigError(name + ": [" + section + "] " + key + ": " + err.what());
            }
        }
    }
    if (c.physics.interface.epsilon == 0.0)
        c.warnings.push_back("epsilon = 0: the interfacial layer vanishes, expect a singular Jacobian");
    const auto errors = c.validate();
    if (!errors.empty()) {
        std::string msg = name + ": invalid configuration";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

std::string format_config(const RunConfig& config)
{
    std::ostringstream out;
    std::string section;
    for (const auto& e : entries()) {
        if (e.section != section) {
            if (!section.empty()) out << '\n';
            section = e.section;
            out << '[' << section << "]\n";
        }
        out << e.key << " = " << e.get(config) << '\n';
    }
    return out.str();
}

std::vector<std::string> RunConfig::validate() const
{
    std::vector<std::string> out = physics.validate();
    auto append = [&](const std::vector<std::string>& v) { out.insert(out.end(), v.begin(), v.end()); };
    append(newton.validate());
    append(time.validate());
    if (mesh.file.empty()) {
        if (!(mesh.lx > 0.0 && mesh.ly > 0.0)) out.push_back("mesh extents must be positive");
        if (mesh.nx < 1 || mesh.ny < 1) out.push_back("mesh cell counts must be >= 1");
        if (mesh.fracture && !(mesh.fracture_x > 0.0 && mesh.fracture_x < mesh.lx))
            out.push_back("fracture position must lie inside the domain");
    }
    if (mesh.refinements < 0) out.push_back("mesh refinements must be >= 0");
    if (!(output.cadence > 0.0)) out.push_back("output cadence must be positive");
    for (double s : output.snapshots)
        if (!(s >= 0.0)) out.push_back("snapshot times must be non-negative");
    if (!(output.front_threshold > 0.0 && output.front_threshold < 1.0)) out.push_back("front threshold must lie in (0, 1)");
    if (threads < 1) out.push_back("threads must be >= 1");
    for (int t = 0; t < kNumBoundaryTags; ++t)
        if (boundary.dirichlet[t] && boundary.dirichlet[t]->capillary_pressure < 0.0)
            out.push_back("boundary capillary pressures must be non-negative");
    return out;
}

std::vector<double> RunConfig::snapshot_times() const
{
    std::vector<double> s;
    const double T = time.end_time;
    const long long n = static_cast<long long>(std::floor(T / output.cadence * (1.0 + 1e-12)));
    for (long long k = 1; k <= n; ++k) s.push_back(static_cast<double>(k) * output.cadence);
    for (double x : output.snapshots)
        if (x > 0.0 && x <= T) s.push_back(x);
    std::sort(s.begin(), s.end());
    std::vector<double> out;
    for (double x : s)
        if (out.empty() || x - out.back() > 1e-9 * output.cadence) out.push_back(x);
    return out;
}

Mesh build_mesh(const RunConfig& config)
{
    Mesh mesh;
    const double width = config.physics.fracture[0].width;
    if (!config.mesh.file.empty()) {
        mesh = read_mesh_file(config.mesh.file);
        for (const auto& f : mesh.fractures())
            if (std::abs(f.width - width) > 1e-12 * width)
                throw ConfigError("fracture width in mesh file '" + config.mesh.file + "' differs from [physics] fracture_width");
    } else {
        StructuredMeshParams p;
        p.lx = config.mesh.lx;
        p.ly = config.mesh.ly;
        p.nx = config.mesh.nx;
        p.ny = config.mesh.ny;
        if (config.mesh.fracture) {
            FractureSpec f;
            f.polyline = {Point(config.mesh.fracture_x, 0.0), Point(config.mesh.fracture_x, config.mesh.ly)};
            f.width = width;
            p.fractures.push_back(f);
        }
        mesh = build_structured_mesh(p);
    }
    for (int r = 0; r < config.mesh.refinements; ++r) mesh = refine_uniform(mesh);
    return mesh;
}

}  // namespace fracflow
