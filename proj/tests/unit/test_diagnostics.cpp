#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nordheim/diagnostics.hpp"
#include "nordheim/errors.hpp"

using namespace nordheim;

namespace {

std::shared_ptr<const EnergyGrid> make_grid(std::size_t n, double L, double p) {
    return std::make_shared<const EnergyGrid>(build_grid({n, L, p, true}));
}

// mpmath: 4 pi int_0^0.1 sqrt(2e) / (e^e - 1) de
constexpr double kMassBelowPlanck = 11.054248287342057;

Distribution planck_mass(const std::shared_ptr<const EnergyGrid>& g, double alpha, double beta, double scale = 1.0) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < g->size(); ++i)
        v[i] = scale * mass_factor(g->node(i)) * bose_einstein_density(g->node(i), alpha, beta);
    return Distribution::mass(g, v, 0.0);
}

DetectorParams params(double nu, double Ks, double th, double rho0) {
    DetectorParams p;
    p.nu = nu;
    p.K_star = Ks;
    p.theta_star = th;
    p.rho0 = rho0;
    return p;
}

}  // namespace

TEST_CASE("detector parameters") {
    const auto d = DetectorParams::defaults_for(20.0);
    CHECK(d.rho0 == 2.0);
    CHECK(d.rho1 == 1.0);
    CHECK(d.nu == 1.0);
    CHECK(d.K_star == 1.0);
    CHECK(d.theta_star == 0.5);
    CHECK_NOTHROW(d.validate());
    auto bad = d;
    bad.theta_star = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = d;
    bad.nu = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = d;
    bad.rho1 = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("mass_below") {
    const auto g = make_grid(64, 20.0, 2.0);
    auto d = planck_mass(g, 0.5, 1.0);
    d.set_condensate(0.75);
    CHECK(mass_below(d, 20.0) == doctest::Approx(moments(d).M).epsilon(1e-14));
    CHECK(mass_below(d, 0.0) == 0.75);
    double prev = -1.0;
    for (double R = 0.0; R <= 20.0; R += 0.0137) {
        const double m = mass_below(d, R);
        CHECK(m >= prev);
        prev = m;
    }
    for (std::size_t c = 1; c < 64; ++c) {
        const double b = g->edge(c);
        CHECK(mass_below(d, b * (1 - 1e-13)) == doctest::Approx(mass_below(d, b)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(mass_below(d, -0.1), DomainError);
    CHECK_THROWS_AS(mass_below(d, 20.1), DomainError);
    CHECK_THROWS_AS(mass_below(continuum_occupation(d), 1.0), ContractError);

    const auto fine = make_grid(2000, 20.0, 4.0);
    CHECK(std::abs(mass_below(planck_mass(fine, 0.0, 1.0), 0.1) - kMassBelowPlanck) <= 1e-4 * kMassBelowPlanck);
}

TEST_CASE("low_mass_check") {
    const auto g = make_grid(128, 20.0, 3.0);
    const auto zero = Distribution::mass(g, std::vector<double>(128, 0.0), 0.0);
    const auto r0 = low_mass_check(zero, 2.5, 1.0);
    CHECK_FALSE(r0.holds);
    CHECK(r0.margin == -2.5);

    const auto cond = Distribution::mass(g, std::vector<double>(128, 0.0), 0.01);
    CHECK(low_mass_check(cond, 1.0, 0.01).holds);
    CHECK(low_mass_check(cond, 1e6, 1e-6).holds);

    const double c = 0.3;
    std::vector<double> v(128);
    for (std::size_t i = 0; i < 128; ++i) v[i] = mass_factor(g->node(i)) * c;
    const auto flat = Distribution::mass(g, v, 0.0);
    const double Kc = 8.0 * std::numbers::pi * std::sqrt(2.0) / 3.0 * c;
    CHECK(low_mass_check(flat, 0.99 * Kc, 2.0).holds);
    CHECK_FALSE(low_mass_check(flat, 1.01 * Kc, 2.0).holds);
    const auto r = low_mass_check(flat, Kc, 2.0);
    CHECK(std::abs(r.margin) <= 1e-3 * Kc);
    CHECK(r.worst_R > 0.0);
    CHECK(r.worst_R <= 2.0);
    CHECK_THROWS_AS(low_mass_check(flat, 1.0, 25.0), DomainError);
}

TEST_CASE("blow-up criterion on constant f") {
    const auto g = make_grid(64, 20.0, 2.0);
    CHECK_FALSE(blowup_criterion(Distribution::occupation(g, std::vector<double>(64, 0.0)), DetectorParams{}).satisfied);
    CHECK(blowup_criterion(Distribution::occupation(g, std::vector<double>(64, 0.0)), DetectorParams{}).value == 0.0);
    for (const auto& p : {params(1.0, 1.0, 0.5, 2.0), params(0.3, 2.0, 0.25, 0.5), params(2.0, 0.1, 1.2, 5.0),
                          params(1.0, 1.0, 0.5, 0.37)}) {
        for (double A : {0.2, 1.0, 3.3}) {
            const auto r = blowup_criterion(Distribution::occupation(g, std::vector<double>(64, A)), p);
            const double expect =
                std::min(2.0 * A / (3.0 * p.nu), 2.0 * A / 3.0 * std::pow(p.rho0, 1.5 - p.theta_star) / p.K_star);
            CHECK(std::abs(r.value - expect) <= 1e-12 * expect);
            CHECK(r.best_rho <= p.rho0);
        }
        const double thr = 1.5 * std::max(p.nu, p.K_star * std::pow(p.rho0, p.theta_star - 1.5));
        CHECK(blowup_criterion(Distribution::occupation(g, std::vector<double>(64, thr * (1 + 1e-9))), p).satisfied);
        CHECK_FALSE(blowup_criterion(Distribution::occupation(g, std::vector<double>(64, thr * (1 - 1e-9))), p).satisfied);
        const auto at = blowup_criterion(Distribution::occupation(g, std::vector<double>(64, thr)), p);
        CHECK(at.value == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("blow-up criterion on a step and a bump") {
    const auto g = make_grid(64, 20.0, 2.0);
    const auto p = params(1.0, 1.0, 0.5, 2.0);
    for (std::size_t k : {10, 20, 30}) {
        const double b = g->edge(k);
        for (double A : {0.5, 2.0, 9.0}) {
            std::vector<double> f(64, 0.0);
            for (std::size_t i = 0; i < k; ++i) f[i] = A;
            const auto r = blowup_criterion(Distribution::occupation(g, f), p);
            const double rm = std::min(b, p.rho0);
            const double expect =
                std::min(2.0 * A / (3.0 * p.nu), 2.0 * A / 3.0 * std::pow(rm, 1.5 - p.theta_star) / p.K_star);
            CHECK(std::abs(r.value - expect) <= 1e-12 * expect);
        }
    }
    // a large bump on [0, rho] satisfies the criterion, half of it does not
    const std::size_t k = 16;
    const double rho = g->edge(k);
    const double thr = 1.5 * std::max(p.nu, p.K_star * std::pow(rho, p.theta_star - 1.5));
    std::vector<double> f(64, 0.0), h(64, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        f[i] = 1.2 * thr;
        h[i] = 0.6 * thr;
    }
    CHECK(blowup_criterion(Distribution::occupation(g, f), p).satisfied);
    CHECK_FALSE(blowup_criterion(Distribution::occupation(g, h), p).satisfied);
    CHECK_THROWS_AS(blowup_criterion(to_mass_density(Distribution::occupation(g, f)), p), ContractError);
}

TEST_CASE("condensation criterion") {
    const auto g = make_grid(64, 20.0, 2.0);
    const auto p = params(1.0, 1.0, 0.5, 2.0);
    const auto zero = Distribution::mass(g, std::vector<double>(64, 0.0), 0.0);
    CHECK_FALSE(condensation_criterion(zero, p).satisfied);
    const auto cond = Distribution::mass(g, std::vector<double>(64, 0.0), 1e-6);
    const auto rc = condensation_criterion(cond, p);
    CHECK(rc.satisfied);
    CHECK(std::isinf(rc.value));

    for (const auto& q : {params(1.0, 1.0, 0.5, 2.0), params(1.0, 0.2, 0.5, 2.0), params(0.5, 3.0, 0.8, 1.0)}) {
        for (std::size_t k : {8, 20, 40}) {
            const double b = g->edge(k);
            for (double A : {0.1, 1.0, 4.0}) {
                std::vector<double> v(64, 0.0);
                for (std::size_t i = 0; i < k; ++i) v[i] = A;
                const auto r = condensation_criterion(Distribution::mass(g, v, 0.0), q);
                const double rx = std::pow(q.K_star / q.nu, 1.0 / (1.5 - q.theta_star));
                const double rm = std::min({b, q.rho0, rx});
                const double expect = A * std::pow(rm, 1.0 - q.theta_star) / q.K_star;
                CHECK(std::abs(r.value - expect) <= 1e-12 * expect);
            }
        }
    }
}

TEST_CASE("criteria are monotone in the data and scale with nu and K*") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto g = make_grid(48, 20.0, 3.0);
    const auto p = DetectorParams::defaults_for(20.0);
    for (int k = 0; k < 40; ++k) {
        std::vector<double> a(48), b(48);
        for (std::size_t i = 0; i < 48; ++i) {
            a[i] = 3.0 * u(rng) * std::exp(-g->node(i));
            b[i] = a[i] + 0.5 * u(rng);
        }
        const auto fa = Distribution::occupation(g, a), fb = Distribution::occupation(g, b);
        CHECK(blowup_criterion(fb, p).value >= blowup_criterion(fa, p).value * (1 - 1e-14));
        const auto ga = Distribution::mass(g, a, 0.0), gb = Distribution::mass(g, b, 0.0);
        CHECK(condensation_criterion(gb, p).value >= condensation_criterion(ga, p).value * (1 - 1e-14));

        const double lambda = 0.5 + 3.0 * u(rng);
        auto q = p;
        q.nu *= lambda;
        q.K_star *= lambda;
        CHECK(blowup_criterion(fa, q).value == doctest::Approx(blowup_criterion(fa, p).value / lambda).epsilon(1e-12));
        CHECK(condensation_criterion(ga, q).value ==
              doctest::Approx(condensation_criterion(ga, p).value / lambda).epsilon(1e-12));
    }
}

TEST_CASE("test function moment") {
    const auto g = make_grid(64, 20.0, 2.0);
    CHECK(test_function_moment(Distribution::mass(g, std::vector<double>(64, 0.0), 0.4), 3.0) == 0.4);
    const std::size_t k = 12;
    const double b = g->edge(k);
    const double A = 1.7;
    std::vector<double> v(64, 0.0);
    for (std::size_t i = 0; i < k; ++i) v[i] = A;
    const auto d = Distribution::mass(g, v, 0.2);
    for (double R : {b, 2.0 * b, 20.0}) {
        const double expect = 0.2 + A * (b - b * b / (2.0 * R));
        CHECK(test_function_moment(d, R) == doctest::Approx(expect).epsilon(1e-13));
    }
    const double Rin = 0.5 * b;
    CHECK(test_function_moment(d, Rin) == doctest::Approx(0.2 + A * Rin / 2.0).epsilon(1e-13));
    std::vector<double> near(64, 0.0);
    near[0] = 5.0;
    const auto nd = Distribution::mass(g, near, 0.0);
    CHECK(test_function_moment(nd, 20.0) == doctest::Approx(moments(nd).M).epsilon(1e-4));
    for (double R = 0.05; R <= 20.0; R += 0.37) CHECK(test_function_moment(d, R) <= mass_below(d, R) + 1e-15);
    CHECK_THROWS_AS(test_function_moment(d, 0.0), DomainError);
}

TEST_CASE("equilibrium distance") {
    const auto g = make_grid(128, 20.0, 2.0);
    const EnergyBand band{0.5, 20.0};
    const auto eq = equilibrium_distance(planck_mass(g, 0.5, 1.0), band);
    CHECK_FALSE(eq.degenerate);
    CHECK(eq.l1_distance <= 1e-8);
    CHECK(eq.params.alpha() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(eq.params.beta() == doctest::Approx(1.0).epsilon(1e-6));

    const auto twice = equilibrium_distance(planck_mass(g, 0.5, 1.0, 2.0), band);
    CHECK(twice.l1_distance > 1e-3);
    CHECK(std::abs(twice.params.alpha() - 0.5) > 1e-3);

    const auto occ = equilibrium_distance(continuum_occupation(planck_mass(g, 0.5, 1.0)), band);
    CHECK(occ.l1_distance <= 1e-8);

    std::vector<double> low(128, 0.0);
    low[0] = 1.0;
    const auto deg = equilibrium_distance(Distribution::mass(g, low, 0.0), band);
    CHECK(deg.degenerate);
    CHECK(deg.l1_distance == 0.0);
    CHECK_THROWS_AS(equilibrium_distance(planck_mass(g, 0.5, 1.0), {3.0, 2.0}), DomainError);
}
