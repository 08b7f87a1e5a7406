#include "fracflow/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracflow {

double SaturationLaw::saturation(double p) const
{
    if (mirrored) return 1.0 - SaturationLaw{a, false}.saturation(-p);
    if (p <= 0.0) return 0.0;
    return -std::expm1(-p / a);
}

double SaturationLaw::derivative(double p) const
{
    if (mirrored) {
        // d/dq [1 - S(-q)] = S'(-q); keep the kink convention on the mirrored side
        const double q = -p;
        return q < 0.0 ? 0.0 : std::exp(-q / a) / a;
    }
    if (p < 0.0) return 0.0;
    return std::exp(-p / a) / a;
}

std::vector<std::string> RockModel::validate(const std::string& name, bool fracture) const
{
    std::vector<std::string> out;
    if (!(capillary.a > 0.0)) out.push_back(name + ": capillary parameter a must be positive");
    if (!(permeability > 0.0)) out.push_back(name + ": permeability must be positive");
    if (!(porosity > 0.0 && porosity <= 1.0)) out.push_back(name + ": porosity must lie in (0, 1]");
    if (relperm_exponent < 1) out.push_back(name + ": relative permeability exponent must be >= 1");
    if (fracture) {
        if (!(width > 0.0)) out.push_back(name + ": fracture width must be positive");
        if (!(normal_permeability > 0.0)) out.push_back(name + ": normal permeability must be positive");
    }
    return out;
}

std::vector<std::string> FluidModel::validate() const
{
    std::vector<std::string> out;
    for (int a = 0; a < kNumPhases; ++a) {
        if (!(density[a] > 0.0)) out.push_back("phase " + std::to_string(a + 1) + ": density must be positive");
        if (!(viscosity[a] > 0.0)) out.push_back("phase " + std::to_string(a + 1) + ": viscosity must be positive");
    }
    if (mobility_floor < 0.0) out.push_back("mobility floor must be non-negative");
    return out;
}

std::vector<std::string> InterfaceModel::validate(double fracture_width) const
{
    std::vector<std::string> out;
    if (!(theta >= 0.0 && theta <= 1.0)) out.push_back("theta must lie in [0, 1]");
    if (!(epsilon >= 0.0)) out.push_back("epsilon must be non-negative");
    if (!(porosity > 0.0 && porosity <= 1.0)) out.push_back("interface porosity must lie in (0, 1]");
    if (!(fracture_width > 0.0)) out.push_back("fracture width must be positive");
    return out;
}

double saturation(const RockModel& rock, double p) { return rock.capillary.saturation(p); }

double saturation_derivative(const RockModel& rock, double p) { return rock.capillary.derivative(p); }

double phase_saturation(const RockModel& rock, int phase, double p)
{
    const double s = saturation(rock, p);
    return phase == kOil ? s : 1.0 - s;
}

double phase_saturation_derivative(const RockModel& rock, int phase, double p)
{
    const double ds = saturation_derivative(rock, p);
    return phase == kOil ? ds : -ds;
}

double pseudo_inverse(const RockModel& rock, double q)
{
    if (rock.capillary.mirrored) throw DomainError("pseudo-inverse is only provided for Corey laws");
    if (!(q >= 0.0 && q < 1.0)) throw DomainError("saturation " + std::to_string(q) + " outside [0, 1)");
    if (q == 0.0) return 0.0;
    return -rock.capillary.a * std::log1p(-q);
}

double B_function(const RockModel& rock, double q)
{
    if (rock.capillary.mirrored) throw DomainError("B is only provided for Corey laws");
    if (!(q >= 0.0 && q < 1.0)) return std::numeric_limits<double>::infinity();
    const double r = 1.0 - q;
    return rock.capillary.a * (r * std::log1p(-q) + q);
}

double relative_permeability(const RockModel& rock, double phase_sat)
{
    const double s = std::clamp(phase_sat, 0.0, 1.0);
    double kr = s;
    for (int i = 1; i < rock.relperm_exponent; ++i) kr *= s;
    return kr;
}

double mobility(const RockModel& rock, const FluidModel& fluid, int phase, double phase_sat)
{
    const double k = relative_permeability(rock, phase_sat) / fluid.viscosity[phase];
    return std::max(k, fluid.mobility_floor);
}

double mobility_at(const RockModel& rock, const FluidModel& fluid, int phase, double p)
{
    return mobility(rock, fluid, phase, phase_saturation(rock, phase, p));
}

double mobility_dp(const RockModel& rock, const FluidModel& fluid, int phase, double p)
{
    const double s = std::clamp(phase_saturation(rock, phase, p), 0.0, 1.0);
    const int n = rock.relperm_exponent;
    const double k = relative_permeability(rock, s) / fluid.viscosity[phase];
    if (k < fluid.mobility_floor) return 0.0;
    double dkr = n;
    for (int i = 1; i < n; ++i) dkr *= s;
    return dkr / fluid.viscosity[phase] * phase_saturation_derivative(rock, phase, p);
}

double interface_saturation(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                            double p)
{
    return iface.theta * saturation(rock_m, p) + (1.0 - iface.theta) * saturation(rock_f, p);
}

double interface_saturation_derivative(const InterfaceModel& iface, const RockModel& rock_m,
                                       const RockModel& rock_f, double p)
{
    return iface.theta * saturation_derivative(rock_m, p) + (1.0 - iface.theta) * saturation_derivative(rock_f, p);
}

double interface_mobility(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                          const FluidModel& fluid, int phase, double sat_m, double sat_f)
{
    return iface.theta * mobility(rock_m, fluid, phase, sat_m) +
           (1.0 - iface.theta) * mobility(rock_f, fluid, phase, sat_f);
}

double interface_mobility_at(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                             const FluidModel& fluid, int phase, double p)
{
    return interface_mobility(iface, rock_m, rock_f, fluid, phase, phase_saturation(rock_m, phase, p),
                              phase_saturation(rock_f, phase, p));
}

double interface_mobility_dp(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                             const FluidModel& fluid, int phase, double p)
{
    return iface.theta * mobility_dp(rock_m, fluid, phase, p) +
           (1.0 - iface.theta) * mobility_dp(rock_f, fluid, phase, p);
}

double eta(const InterfaceModel& iface, double fracture_width)
{
    return iface.thickness(fracture_width) * iface.porosity;
}

double half_transmissibility(const RockModel& rock_f) { return 2.0 * rock_f.normal_permeability / rock_f.width; }

double capillary_cap(const RockModel& rock, double sat_cap)
{
    if (rock.capillary.mirrored) return std::numeric_limits<double>::infinity();
    return -rock.capillary.a * std::log1p(-sat_cap);
}

const RockModel& PhysicsModel::matrix_rock(int region) const
{
    if (region < 0 || region >= static_cast<int>(matrix.size()))
        throw DomainError("no matrix rock for region " + std::to_string(region));
    return matrix[region];
}

const RockModel& PhysicsModel::fracture_rock(int region) const
{
    if (region < 0 || region >= static_cast<int>(fracture.size()))
        throw DomainError("no fracture rock for region " + std::to_string(region));
    return fracture[region];
}

std::vector<std::string> PhysicsModel::validate() const
{
    std::vector<std::string> out = fluid.validate();
    for (std::size_t r = 0; r < matrix.size(); ++r) {
        auto v = matrix[r].validate("matrix region " + std::to_string(r), false);
        out.insert(out.end(), v.begin(), v.end());
    }
    for (std::size_t r = 0; r < fracture.size(); ++r) {
        auto v = fracture[r].validate("fracture region " + std::to_string(r), true);
        out.insert(out.end(), v.begin(), v.end());
        auto w = interface.validate(fracture[r].width);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

}  // namespace fracflow
