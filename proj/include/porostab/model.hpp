#ifndef POROSTAB_MODEL_HPP
#define POROSTAB_MODEL_HPP

/// @file model.hpp
/// Physical parameters, reaction kinetics, steady states and their
/// linearisations for the coupled poroelasticity / convection-reaction-
/// diffusion model.

#include <array>
#include <cmath>
#include <utility>

#include "porostab/common.hpp"

namespace porostab {

/// Selects the active-stress intensity r(w): Linear is r = w1 + w2,
/// Quadratic is r = w1^2.
enum class ThetaVariant { Linear, Quadratic };

/// Full physical/kinetic parameter block. Default values are the ones used
/// throughout the stability analysis and the 2D tests.
struct ModelParams {
    double D1 = 0.05;      ///< activator diffusivity [length^2/time]
    double D2 = 1.0;       ///< inhibitor diffusivity [length^2/time]
    double beta1 = 170.0;  ///< kinetic rate [1/time]
    double beta2 = 0.1305; ///< activator basal rate [-]
    double beta3 = 0.7695; ///< inhibitor basal rate [-]
    double gamma = 1e-4;   ///< volume-source coupling [-]
    double tau = 100.0;    ///< active-stress magnitude [Pa]
    double E = 3e4;        ///< Young modulus [Pa]
    double nu = 0.495;     ///< Poisson ratio [-]
    double rho = 1.0;      ///< density [kg/m^3]
    double c0 = 1e-3;      ///< storage coefficient [1/Pa]
    double kappa = 1e-4;   ///< permeability [m^2]
    double eta = 1.0;      ///< fluid viscosity [Pa s]
    double alpha = 0.1;    ///< Biot-Willis coefficient [-]
    double ell = 0.0;      ///< volumetric fluid source [1/time]

    std::array<double, 2> k_dir = {1.0, 0.0}; ///< unit active-stress direction
    ThetaVariant theta_variant = ThetaVariant::Linear;

    /// When true, the Quadratic coupling derivative is the constant vector
    /// -2*tau*(1,0) instead of being evaluated at the steady state.
    bool theta_constant_form = false;

    double mu() const { return E / (2.0 * (1.0 + nu)); }
    double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }

    /// Throws Error if any invariant is violated.
    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw Error(std::string("ModelParams: ") + what);
        };
        require(D1 >= 0 && D2 >= 0, "diffusivities must be non-negative");
        require(beta1 >= 0 && beta2 >= 0 && beta3 >= 0, "kinetic rates must be non-negative");
        require(E > 0, "Young modulus must be positive");
        require(nu > 0 && nu < 0.5, "Poisson ratio must lie strictly in (0, 0.5)");
        require(rho >= 0, "density must be non-negative");
        require(c0 >= 0 && kappa >= 0 && eta > 0, "storage/permeability/viscosity out of range");
        require(tau >= 0 && gamma >= 0, "coupling constants must be non-negative");
        const double n = std::hypot(k_dir[0], k_dir[1]);
        require(std::abs(n - 1.0) < 1e-12, "k_dir must be a unit vector");
        require(mu() > 0 && lambda() > 0, "Lame moduli must be positive");
    }
};

/// Homogeneous equilibrium of the modified Schnackenberg kinetics together
/// with the kinetic Jacobian and the active-stress coupling derivatives
/// theta = d/dw sigma_act(w0), sigma_act(w) = -tau r(w).
struct SteadyState {
    double w10 = 0;
    double w20 = 0;
    double fw1 = 0, fw2 = 0, gw1 = 0, gw2 = 0;
    double theta1 = 0, theta2 = 0;
};

/// Calcium exchange kinetics parameters (brain-injury variant).
struct CalciumParams {
    double D1c = 2.94e-6;    ///< extra/intra exchange rate [1/s]
    double D2c = 3.17e-5;    ///< bath exchange rate [1/s]
    double k1 = 2e-4;        ///< half-saturation [mM]
    double k2 = 5e-4;        ///< half-saturation [mM]
    double chi1 = 2e3;       ///< gain [-]
    double chi2 = 4e3;       ///< gain [-]
    double k_stress = 4.5e-5; ///< stress sensitivity [1/Pa]
    double w0_bath = 0.1;    ///< bath concentration [mM]

    void validate() const {
        if (!(D1c > 0 && D2c > 0 && k1 > 0 && k2 > 0 && chi1 > 0 && chi2 > 0 &&
              k_stress > 0 && w0_bath > 0))
            throw Error("CalciumParams: all fields must be positive");
    }
};

/// Net reaction rates of the modified Schnackenberg kinetics.
///   f = beta1 (beta2 - w1 + w1^2 w2) + gamma w1 div_u_dot
///   g = beta1 (beta3 - w1^2 w2)      + gamma w2 div_u_dot
inline std::pair<double, double> schnackenberg_rhs(const ModelParams& p, double w1,
                                                   double w2, double div_u_dot) {
    const double cubic = w1 * w1 * w2;
    const double f = p.beta1 * (p.beta2 - w1 + cubic) + p.gamma * w1 * div_u_dot;
    const double g = p.beta1 * (p.beta3 - cubic) + p.gamma * w2 * div_u_dot;
    return {f, g};
}

/// Homogeneous steady state w10 = beta2+beta3, w20 = beta3/(beta2+beta3)^2
/// with the analytic kinetic Jacobian evaluated there.
inline SteadyState steady_state(const ModelParams& p) {
    const double s = p.beta2 + p.beta3;
    if (s <= 0.0) throw DegenerateEquilibrium("steady_state: beta2 + beta3 must be positive");
    SteadyState ss;
    ss.w10 = s;
    ss.w20 = p.beta3 / (s * s);
    ss.fw1 = p.beta1 * (-1.0 + 2.0 * ss.w10 * ss.w20);
    ss.fw2 = p.beta1 * ss.w10 * ss.w10;
    ss.gw1 = -2.0 * p.beta1 * ss.w10 * ss.w20;
    ss.gw2 = -p.beta1 * ss.w10 * ss.w10;
    switch (p.theta_variant) {
    case ThetaVariant::Linear:
        ss.theta1 = -p.tau;
        ss.theta2 = -p.tau;
        break;
    case ThetaVariant::Quadratic:
        ss.theta1 = p.theta_constant_form ? -2.0 * p.tau : -2.0 * p.tau * ss.w10;
        ss.theta2 = 0.0;
        break;
    }
    return ss;
}

/// Calcium exchange kinetics with total-pressure modulated fluxes.
/// Hill terms require w2 >= 0; psi may be any real value.
inline std::pair<double, double> calcium_rhs(const CalciumParams& p, double w1, double w2,
                                             double psi) {
    const double e = std::exp(-p.k_stress * std::abs(psi));
    const double bracket1 = -p.chi1 + (1.0 + p.chi1) * e;
    const double bracket2 = -p.chi2 + (1.0 + p.chi2) * e;
    const double hill1 = w2 * w2 / (w2 * w2 + p.k1 * p.k1);
    const double hill2 = w2 / (w2 + p.k2);
    const double f = -p.D1c * (w1 - w2) + bracket1 / p.chi1 * hill1;
    const double g = -f + p.D2c * (p.w0_bath - w2) - bracket2 / p.chi2 * hill2;
    return {f, g};
}

} // namespace porostab

#endif
