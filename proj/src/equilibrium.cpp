#include "nordheim/equilibrium.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nordheim/errors.hpp"

namespace nordheim {

namespace {

constexpr double kPi = std::numbers::pi;

// Terms summed explicitly before the Euler-Maclaurin tail takes over.
constexpr int kEulerMaclaurinStart = 64;
constexpr int kMaxDirectTerms = 4000;

// int_K^inf exp(-lambda x) x^(-s) dx. With u = (K/x)^(s-1) this becomes
// K^(1-s)/(s-1) int_0^1 exp(-lambda K u^(-1/(s-1))) du, a bounded integrand.
double tail_integral(double s, double lambda, double K) {
    const double scale = std::pow(K, 1.0 - s) / (s - 1.0);
    if (lambda == 0.0) return scale;
    const double c = lambda * K;
    const double a = 1.0 / (s - 1.0);
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double j = integrator.integrate(
        [c, a](double u) { return u <= 0.0 ? 0.0 : std::exp(-c * std::pow(u, -a)); }, 0.0, 1.0);
    return scale * j;
}

// m-th derivative of exp(-lambda x) x^(-s) at x.
double tail_derivative(int m, double s, double lambda, double x) {
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= m; ++j) {
        // d^j/dx^j x^(-s) = (-1)^j s (s+1) ... (s+j-1) x^(-s-j)
        double rising = 1.0;
        for (int r = 0; r < j; ++r) rising *= (s + r);
        const double dpow = ((j % 2) ? -rising : rising) * std::pow(x, -s - j);
        const double dexp = std::pow(-lambda, m - j);
        sum += binom * dexp * dpow;
        binom = binom * (m - j) / (j + 1);
    }
    return std::exp(-lambda * x) * sum;
}

double polylog_euler_maclaurin(double s, double lambda) {
    const int K = kEulerMaclaurinStart;
    double head = 0.0;
    for (int k = 1; k < K; ++k) head += std::exp(-lambda * k) * std::pow(k, -s);
    const double x = K;
    const double f = std::exp(-lambda * x) * std::pow(x, -s);
    // B2/2!, B4/4!, B6/6!
    constexpr std::array<double, 3> coeff{1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0};
    double correction = 0.0;
    for (int j = 0; j < 3; ++j) {
        correction += coeff[j] * tail_derivative(2 * j + 1, s, lambda, x);
    }
    return head + tail_integral(s, lambda, x) + 0.5 * f - correction;
}

double zeta_3_2() {
    static const double v = polylog(1.5, 1.0);
    return v;
}

double zeta_5_2() {
    static const double v = polylog(2.5, 1.0);
    return v;
}

// log of Li_{3/2}(z)^{5/3} / Li_{5/2}(z) at z = exp(-t); decreasing in t.
double log_shape_ratio(double t) {
    const double z = std::exp(-t);
    return (5.0 / 3.0) * std::log(polylog(1.5, z)) - std::log(polylog(2.5, z));
}

void require_positive_moments(const MomentPair& m, const char* who) {
    if (!(m.M > 0.0) || !(m.E > 0.0) || !std::isfinite(m.M) || !std::isfinite(m.E)) {
        std::ostringstream os;
        os << who << ": moments must be positive and finite (M=" << m.M << ", E=" << m.E << ")";
        throw DomainError(os.str());
    }
}

// beta of the Planck state (alpha = 0, m0 = 0) with energy E.
double planck_beta(double E) {
    return 2.0 * kPi * std::pow(3.0 * zeta_5_2() / (4.0 * kPi * E), 0.4);
}

}  // namespace

EquilibriumParams::EquilibriumParams(double alpha, double beta, double m0)
    : alpha_(alpha), beta_(beta), m0_(m0) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("equilibrium: alpha must be >= 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("equilibrium: beta must be > 0");
    if (!(m0 >= 0.0) || !std::isfinite(m0)) throw DomainError("equilibrium: m0 must be >= 0");
    if (alpha * m0 != 0.0) throw DomainError("equilibrium: alpha * m0 must vanish");
}

std::string_view to_string(Criticality c) {
    switch (c) {
        case Criticality::Subcritical: return "Subcritical";
        case Criticality::Critical: return "Critical";
        case Criticality::Supercritical: return "Supercritical";
    }
    return "?";
}

double bose_einstein_density(double e, double alpha, double beta) {
    const double x = beta * (e + alpha);
    if (!(x > 0.0)) throw DomainError("bose_einstein_density: beta (e + alpha) must be positive");
    if (x < 1e-300) throw OverflowError("bose_einstein_density: pole at beta (e + alpha) = 0");
    return 1.0 / std::expm1(x);
}

double bose_einstein_density(double e, const EquilibriumParams& p) {
    return bose_einstein_density(e, p.alpha(), p.beta());
}

double polylog(double s, double z) {
    if (!(z >= 0.0) || z > 1.0) throw DomainError("polylog: z must lie in [0, 1]");
    if (!(s > 1.0)) {
        throw DomainError(z == 1.0 ? "polylog: series diverges for s <= 1 at z = 1"
                                   : "polylog: s must exceed 1");
    }
    if (z == 0.0) return 0.0;

    if (z < 1.0) {
        // Direct series while the geometric tail bound z^(K+1)/((K+1)^s (1-z)) is
        // reachable in a modest number of terms.
        double sum = 0.0;
        double zk = 1.0;
        for (int k = 1; k <= kMaxDirectTerms; ++k) {
            zk *= z;
            sum += zk / std::pow(k, s);
            const double tail = zk * z / (std::pow(k + 1.0, s) * (1.0 - z));
            if (tail <= 1e-17 * sum) return sum;
        }
    }
    return polylog_euler_maclaurin(s, z == 1.0 ? 0.0 : -std::log(z));
}

MomentPair moments_of_equilibrium(const EquilibriumParams& p) {
    const double z = std::exp(-p.beta() * p.alpha());
    const double x = 2.0 * kPi / p.beta();
    MomentPair m;
    m.M = p.m0() + std::pow(x, 1.5) * polylog(1.5, z);
    m.E = 3.0 / (4.0 * kPi) * std::pow(x, 2.5) * polylog(2.5, z);
    return m;
}

double critical_mass(double E) {
    if (!(E >= 0.0)) throw DomainError("critical_mass: E must be >= 0");
    if (E == 0.0) return 0.0;
    return zeta_3_2() * std::pow(zeta_5_2(), -0.6) * std::pow(4.0 * kPi / 3.0, 0.6) *
           std::pow(E, 0.6);
}

CriticalityClass classify(const MomentPair& m, double tol) {
    require_positive_moments(m, "classify");
    CriticalityClass c;
    const double mc = critical_mass(m.E);
    c.ratio = m.M / mc;
    if (m.M > (1.0 + tol) * mc) {
        c.kind = Criticality::Supercritical;
    } else if (m.M < (1.0 - tol) * mc) {
        c.kind = Criticality::Subcritical;
    } else {
        c.kind = Criticality::Critical;
    }
    return c;
}

EquilibriumParams invert_moments(const MomentPair& m) {
    require_positive_moments(m, "invert_moments");
    const double mc = critical_mass(m.E);
    if (m.M >= mc) {
        return EquilibriumParams(0.0, planck_beta(m.E), m.M - mc);
    }

    // Subcritical: m0 = 0. Eliminating beta leaves
    //   (3 / 4 pi) M^{5/3} / E = Li_{3/2}(z)^{5/3} / Li_{5/2}(z),  z = exp(-t),
    // whose right-hand side decreases monotonically in t.
    const double target = std::log(3.0 / (4.0 * kPi)) + (5.0 / 3.0) * std::log(m.M) - std::log(m.E);
    double lo = 0.0;
    double hi = 1.0;
    while (log_shape_ratio(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 700.0) {
            std::ostringstream os;
            os << "invert_moments: no root bracket for t = beta*alpha in [" << lo << ", " << hi
               << "] (M=" << m.M << ", E=" << m.E << ")";
            throw NumericalError(os.str());
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (log_shape_ratio(mid) > target ? lo : hi) = mid;
    }
    // Secant polish inside the final bracket.
    double t = 0.5 * (lo + hi);
    const double flo = log_shape_ratio(lo) - target;
    const double fhi = log_shape_ratio(hi) - target;
    if (flo != fhi) {
        const double ts = lo - flo * (hi - lo) / (fhi - flo);
        if (ts >= lo && ts <= hi) t = ts;
    }
    if (!std::isfinite(t)) throw NumericalError("invert_moments: root-find produced non-finite value");

    const double z = std::exp(-t);
    const double beta = 2.0 * kPi * std::pow(polylog(1.5, z) / m.M, 2.0 / 3.0);
    return EquilibriumParams(t / beta, beta, 0.0);
}

EquilibriumParams invert_moments_no_condensate(const MomentPair& m) {
    require_positive_moments(m, "invert_moments");
    if (m.M >= critical_mass(m.E)) return EquilibriumParams(0.0, planck_beta(m.E), 0.0);
    return invert_moments(m);
}

MomentPair truncated_moments(double beta, double R, double L) {
    if (!(beta > 0.0)) throw DomainError("truncated_moments: beta must be positive");
    if (!(R >= 0.0)) throw DomainError("truncated_moments: R must be >= 0");
    if (R > L) throw DomainError("truncated_moments: R must not exceed L");
    if (R == L) return {};

    // e = u^2 removes the e^{-1/2} singularity of the R = 0 Planck integrand.
    const double shift = 0.5 * R;
    auto occupation_u2 = [beta, shift](double u) {
        const double x = beta * (u * u - shift);
        if (x <= 0.0) return 1.0 / beta;  // only reachable at u = 0 with R = 0
        return u * u / std::expm1(x);
    };
    using boost::math::quadrature::gauss_kronrod;
    const double a = std::sqrt(R);
    const double b = std::sqrt(L);
    const double pref = 8.0 * kPi * std::sqrt(2.0);
    MomentPair out;
    out.M = pref * gauss_kronrod<double, 61>::integrate(occupation_u2, a, b, 20, 1e-14);
    out.E = pref * gauss_kronrod<double, 61>::integrate(
                       [&](double u) { return occupation_u2(u) * u * u; }, a, b, 20, 1e-14);
    return out;
}

}  // namespace nordheim
