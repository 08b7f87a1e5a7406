#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracflow/mesh.hpp"

namespace fracflow {

namespace units {
inline constexpr double bar = 1.0e5;            // Pa
inline constexpr double darcy = 9.869233e-13;   // m^2
inline constexpr double day = 86400.0;          // s
inline constexpr double hour = 3600.0;          // s
}  // namespace units

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Phase index: 0 is the non-wetting phase (oil), 1 the wetting phase (water).
inline constexpr int kOil = 0;
inline constexpr int kWater = 1;
inline constexpr int kNumPhases = 2;

/// Corey capillary law p = -a log(1 - S), inverted as S(p) = 1 - exp(-p/a) for p >= 0
/// and S(p) = 0 for p < 0. The mirrored variant S(q) = 1 - S_corey(-q) describes the same
/// rock seen with the phase labels swapped.
struct SaturationLaw {
    double a = 1.0e5;  // Pa
    bool mirrored = false;

    double saturation(double p) const;
    /// Right derivative at the kink p = 0.
    double derivative(double p) const;
};

struct RockModel {
    SaturationLaw capillary;
    double permeability = 0.1 * units::darcy;         // isotropic, m^2
    double porosity = 0.2;
    int relperm_exponent = 2;                         // k_r(S) = S^n
    // fracture-only data
    double width = 0.01;                              // d_f, m
    double normal_permeability = 100.0 * units::darcy;

    std::vector<std::string> validate(const std::string& name, bool fracture) const;
};

struct FluidModel {
    std::array<double, kNumPhases> density{700.0, 1000.0};      // kg/m^3
    std::array<double, kNumPhases> viscosity{0.005, 0.001};     // Pa s
    Point gravity{0.0, -9.81};                                   // m/s^2
    double mobility_floor = 0.0;                                 // 1/(Pa s)

    std::vector<std::string> validate() const;
};

/// Damaged interfacial layer on one fracture side.
struct InterfaceModel {
    double theta = 0.5;      // 0: fracture rock type, 1: matrix rock type
    double epsilon = 0.1;    // layer thickness as a fraction of d_f / 2
    double porosity = 0.2;   // phi_a

    double thickness(double fracture_width) const { return 0.5 * fracture_width * epsilon; }
    std::vector<std::string> validate(double fracture_width) const;
};

// --- capillary closures -----------------------------------------------------

double saturation(const RockModel& rock, double p);
double saturation_derivative(const RockModel& rock, double p);
/// Saturation of the given phase; the wetting phase holds 1 - S.
double phase_saturation(const RockModel& rock, int phase, double p);
double phase_saturation_derivative(const RockModel& rock, int phase, double p);

/// [S]^i: the pressure closest to 0 with S(p) = q.
double pseudo_inverse(const RockModel& rock, double q);
/// B(q) = integral of the pseudo-inverse from S(0) to q; +infinity outside the range of S.
double B_function(const RockModel& rock, double q);

// --- mobilities ---------------------------------------------------------------

double relative_permeability(const RockModel& rock, double phase_sat);
double mobility(const RockModel& rock, const FluidModel& fluid, int phase, double phase_sat);
/// Total derivative of the phase mobility with respect to the capillary pressure.
double mobility_dp(const RockModel& rock, const FluidModel& fluid, int phase, double p);
double mobility_at(const RockModel& rock, const FluidModel& fluid, int phase, double p);

// --- interfacial layer ----------------------------------------------------------

double interface_saturation(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                            double p);
double interface_saturation_derivative(const InterfaceModel& iface, const RockModel& rock_m,
                                       const RockModel& rock_f, double p);
/// k_a = theta k_m(S_m) + (1 - theta) k_f(S_f), with phase saturations given.
double interface_mobility(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                          const FluidModel& fluid, int phase, double sat_m, double sat_f);
double interface_mobility_at(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                             const FluidModel& fluid, int phase, double p);
double interface_mobility_dp(const InterfaceModel& iface, const RockModel& rock_m, const RockModel& rock_f,
                             const FluidModel& fluid, int phase, double p);

/// eta = d_a * phi_a with d_a = (d_f / 2) epsilon.
double eta(const InterfaceModel& iface, double fracture_width);

/// T_f = 2 lambda_{f,n} / d_f.
double half_transmissibility(const RockModel& rock_f);

/// Largest capillary pressure keeping S <= sat_cap.
double capillary_cap(const RockModel& rock, double sat_cap);

/// All constitutive data of a run, indexed by region tag.
struct PhysicsModel {
    FluidModel fluid;
    std::vector<RockModel> matrix{RockModel{}};
    std::vector<RockModel> fracture{RockModel{SaturationLaw{0.02 * units::bar}, 100.0 * units::darcy, 0.4, 1}};
    InterfaceModel interface;
    bool gravity = true;

    const RockModel& matrix_rock(int region) const;
    const RockModel& fracture_rock(int region) const;
    Point gravity_vector() const { return gravity ? fluid.gravity : Point(0.0, 0.0); }

    std::vector<std::string> validate() const;
};

}  // namespace fracflow
