#pragma once

#include <string_view>

namespace nordheim {

/// Bose-Einstein family F = m0 delta(p) + 1/(exp(beta(eps + alpha)) - 1) with
/// alpha >= 0, beta > 0, m0 >= 0 and alpha * m0 == 0.
class EquilibriumParams {
public:
    EquilibriumParams(double alpha, double beta, double m0);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double m0() const noexcept { return m0_; }

private:
    double alpha_;
    double beta_;
    double m0_;
};

/// Particle density M and energy density E of an isotropic state.
struct MomentPair {
    double M = 0.0;
    double E = 0.0;
};

enum class Criticality { Subcritical, Critical, Supercritical };

std::string_view to_string(Criticality c);

struct CriticalityClass {
    Criticality kind = Criticality::Subcritical;
    double ratio = 0.0;  // M / M_c(E)
};

inline constexpr double kDefaultCriticalBand = 1e-6;

/// 1/(exp(beta (e + alpha)) - 1). The alpha argument may be negative as long
/// as e + alpha > 0 (used for the shifted family of truncated moments).
double bose_einstein_density(double e, double alpha, double beta);
double bose_einstein_density(double e, const EquilibriumParams& p);

/// Li_s(z) = sum_{k>=1} z^k / k^s for s > 1, 0 <= z <= 1, to ~1e-14 relative.
double polylog(double s, double z);

MomentPair moments_of_equilibrium(const EquilibriumParams& p);

/// M_c(E) = zeta(3/2) zeta(5/2)^(-3/5) (4 pi / 3)^(3/5) E^(3/5).
double critical_mass(double E);

CriticalityClass classify(const MomentPair& m, double tol = kDefaultCriticalBand);

/// The unique equilibrium with the given moments.
EquilibriumParams invert_moments(const MomentPair& m);

/// Same as invert_moments but never places mass in the condensate: for
/// supercritical input the Planck state with the given energy is returned.
EquilibriumParams invert_moments_no_condensate(const MomentPair& m);

/// Mass and energy integrals of f_s(e; -R/2, beta) over [R, L], i.e.
/// (4 pi int f sqrt(2e) de, 4 pi int f sqrt(2 e^3) de), by adaptive quadrature.
MomentPair truncated_moments(double beta, double R, double L);

}  // namespace nordheim
