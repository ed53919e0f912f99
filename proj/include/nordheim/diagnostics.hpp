#pragma once

#include "nordheim/distribution.hpp"
#include "nordheim/equilibrium.hpp"

namespace nordheim {

/// Constants of the blow-up and condensation criteria and of the low-energy
/// mass bound. Energies are in the grid's energy units.
struct DetectorParams {
    double nu = 1.0;
    double K_star = 1.0;
    double theta_star = 0.5;
    double rho0 = 2.0;
    double rho1 = 1.0;
    double K = 1.0;

    /// Defaults with rho0 = 0.1 L and rho1 = 0.05 L.
    static DetectorParams defaults_for(double cutoff);
    /// Throws ConfigError unless all fields are positive and theta_star < 3/2.
    void validate() const;
};

/// n0 + int_0^R g de, the cell containing R prorated linearly.
/// Requires the mass form; throws DomainError unless 0 <= R <= L.
double mass_below(const Distribution& g, double R);

struct LowMassReport {
    bool holds = false;
    double worst_R = 0.0;
    double margin = 0.0;  // inf_R mass_below(R) / R^{3/2} - K over 0 < R <= rho1
};

/// The ratio mass_below(R) / R^{3/2} is monotone or has a single interior
/// maximum on every cell, so its infimum is taken at cell boundaries or rho1.
LowMassReport low_mass_check(const Distribution& g, double K, double rho1);

struct CriterionReport {
    bool satisfied = false;
    double best_rho = 0.0;
    double value = 0.0;  // sup over rho of the min of the two normalized functionals; may be +inf
};

/// sup_{0 < rho <= rho0} min{ inf_{0 < R <= rho} I(R) / (nu R^{3/2}), I(rho) / (K* rho^theta*) }
/// with I(R) = int_0^R f sqrt(e) de for f constant on each cell. The supremum
/// is exact for that piecewise-constant model.
CriterionReport blowup_criterion(const Distribution& f, const DetectorParams& p);

/// Same functional with I(R) = mass_below(g, R).
CriterionReport condensation_criterion(const Distribution& g, const DetectorParams& p);

struct EnergyBand {
    double lower = 0.0;
    double upper = 0.0;
};

struct EquilibriumDistance {
    EquilibriumParams params{0.0, 1.0, 0.0};
    double l1_distance = 0.0;  // int_band |g - g_fit| de / band mass
    double band_mass = 0.0;
    double band_energy = 0.0;
    bool degenerate = false;
};

/// Fits the condensate-free equilibrium whose band moments, taken with the
/// same quadrature, match those of the continuum part of the state.
EquilibriumDistance equilibrium_distance(const Distribution& d, const EnergyBand& band);

/// n0 + int g (1 - e/R)_+ de, exact for g constant on each cell.
double test_function_moment(const Distribution& g, double R);

}  // namespace nordheim
