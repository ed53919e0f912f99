#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "nordheim/errors.hpp"
#include "nordheim/integrator.hpp"
#include "nordheim/parallel.hpp"

using namespace nordheim;

namespace {

std::shared_ptr<const EnergyGrid> make_grid(std::size_t n, double L, double p) {
    return std::make_shared<const EnergyGrid>(build_grid({n, L, p, true}));
}

std::vector<double> be_f(const EnergyGrid& g, double alpha, double beta) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = bose_einstein_density(g.node(i), alpha, beta);
    return v;
}

std::vector<double> bump_f(const EnergyGrid& g, double A, double c, double w) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = (g.node(i) - c) / w;
        v[i] = A * std::exp(-x * x);
    }
    return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool rows_identical(const std::vector<DiagnosticsRow>& a, const std::vector<DiagnosticsRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t r = 0; r < a.size(); ++r) {
        const auto& x = a[r];
        const auto& y = b[r];
        for (auto [p, q] : {std::pair{x.t, y.t}, {x.dt, y.dt}, {x.M, y.M}, {x.E, y.E}, {x.linf, y.linf},
                            {x.S, y.S}, {x.n0, y.n0}, {x.blowup_value, y.blowup_value},
                            {x.condensation_value, y.condensation_value}, {x.low_mass_margin, y.low_mass_margin}})
            if (!same_bits(p, q)) return false;
        if (!(std::isnan(x.D) && std::isnan(y.D)) && !same_bits(x.D, y.D)) return false;
    }
    return true;
}

StepControl control(double dt, double T) {
    StepControl c;
    c.dt = dt;
    c.dt_max = std::max(dt, 1.0);
    c.stop_time = T;
    return c;
}

}  // namespace

TEST_CASE("step control validation") {
    CHECK_NOTHROW(StepControl{}.validate());
    StepControl c;
    c.dt = 2.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = StepControl{};
    c.safety = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = StepControl{};
    c.dt_min = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(to_string(RunStatus::ReachedTEnd) == "ReachedT_end");
    CHECK(to_string(Scheme::WeakG) == "weak-g");
}

TEST_CASE("exponential step") {
    const auto g = make_grid(32, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Strong);
    const auto f = Distribution::occupation(g, bump_f(*g, 2.0, 1.0, 0.7));
    const auto gl = gain_loss_split(f, t);
    const double dt = 0.3;
    StepInfo info;
    const auto s = step_exponential(f, t, dt, &info);
    double amax = 0.0;
    for (std::size_t i = 0; i < 32; ++i) {
        const double a = gl.loss_rate[i];
        amax = std::max(amax, a);
        const double expect = f.value(i) * std::exp(-a * dt) + gl.gain[i] * (1.0 - std::exp(-a * dt)) / a;
        CHECK(s.value(i) == doctest::Approx(expect).epsilon(1e-13));
        CHECK(s.value(i) >= 0.0);
    }
    CHECK(info.a_max == amax);
    CHECK(info.relative_change > 0.0);

    // gain zero at nodes that no collision can feed: pure decay
    std::vector<double> one(32, 0.0);
    one[5] = 3.0;
    const auto fo = Distribution::occupation(g, one);
    const auto glo = gain_loss_split(fo, t);
    const auto so = step_exponential(fo, t, dt);
    CHECK(glo.gain[5] == 0.0);
    CHECK(so.value(5) == doctest::Approx(3.0 * std::exp(-glo.loss_rate[5] * dt)).epsilon(1e-14));

    // a dt underflows relative to 1: f + gain dt
    const auto tiny = Distribution::occupation(g, bump_f(*g, 1e-120, 1.0, 0.7));
    const auto glt = gain_loss_split(tiny, t);
    const auto st = step_exponential(tiny, t, dt);
    for (std::size_t i = 0; i < 32; ++i)
        CHECK(st.value(i) == doctest::Approx(tiny.value(i) + glt.gain[i] * dt).epsilon(1e-14));

    const auto zero = Distribution::occupation(g, std::vector<double>(32, 0.0));
    const auto sz = step_exponential(zero, t, dt);
    for (double v : sz.values()) CHECK(v == 0.0);

    // first order consistency
    const auto rhs = collision_rhs_strong(f, t);
    std::vector<double> errs;
    for (double h : {1e-4, 1e-5, 1e-6}) {
        const auto sh = step_exponential(f, t, h);
        double err = 0.0;
        for (std::size_t i = 0; i < 32; ++i) err = std::max(err, std::abs((sh.value(i) - f.value(i)) / h - rhs[i]));
        errs.push_back(err);
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(10.0).epsilon(0.05));
    CHECK(errs[1] / errs[2] == doctest::Approx(10.0).epsilon(0.05));
    CHECK_THROWS_AS(step_exponential(f, t, 0.0), DomainError);
    CHECK_THROWS_AS(step_exponential(to_mass_density(f), t, dt), ContractError);
}

TEST_CASE("exponential step at equilibrium") {
    const auto g = make_grid(64, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Strong);
    const auto f = Distribution::occupation(g, be_f(*g, 0.5, 1.0));
    const auto rhs = collision_rhs_strong(f, t);
    double res = 0.0;
    for (double r : rhs) res = std::max(res, std::abs(r));
    const double dt = 0.01;
    const auto s = step_exponential(f, t, dt);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(s.value(i) - f.value(i)) <= 1.01 * res * dt);
}

TEST_CASE("explicit weak step") {
    const auto g = make_grid(32, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Weak);
    const auto zero = Distribution::mass(g, std::vector<double>(32, 0.0), 0.0);
    const auto sz = step_weak_g(zero, t, 0.1);
    for (double v : sz.values()) CHECK(v == 0.0);
    CHECK(sz.condensate() == 0.0);

    const auto eq = to_mass_density(Distribution::occupation(g, be_f(*g, 0.5, 1.0)));
    const auto m0 = moments(eq);
    const auto se = step_weak_g(eq, t, 0.01);
    CHECK(std::abs(moments(se).M - m0.M) <= 1e-12 * m0.M);
    CHECK(std::abs(moments(se).E - m0.E) <= 1e-12 * m0.E);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        std::vector<double> v(32);
        for (std::size_t i = 0; i < 32; ++i) v[i] = 5.0 * u(rng) * std::exp(-g->node(i) / 3.0);
        const auto d = Distribution::mass(g, v, u(rng));
        const auto before = moments(d);
        StepInfo info;
        const auto s = step_weak_g(d, t, 1e-4 * (1 + k), &info);
        REQUIRE(info.clipped_mass == 0.0);
        const auto after = moments(s);
        CHECK(std::abs(after.M - before.M) <= 1e-12 * before.M);
        CHECK(std::abs(after.E - before.E) <= 1e-12 * before.E);
        for (double x : s.values()) CHECK(x >= 0.0);
        CHECK(s.condensate() >= 0.0);
    }

    // a large step clips; the clipped mass lands in n0
    const auto b = to_mass_density(Distribution::occupation(g, bump_f(*g, 50.0, 0.5, 0.3)));
    const auto mb = moments(b);
    StepInfo info;
    const auto s = step_weak_g(b, t, 5.0, &info);
    CHECK(info.clipped_mass > 0.0);
    CHECK(moments(s).M >= mb.M * (1 - 1e-12));
    CHECK(moments(s).M - mb.M <= info.clipped_mass * (1 + 1e-12));
    for (double x : s.values()) CHECK(x >= 0.0);
    CHECK_THROWS_AS(step_weak_g(to_occupation(b), t, 0.1), ContractError);
}

TEST_CASE("linearly implicit weak step") {
    const auto g = make_grid(32, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Weak);
    const auto b = to_mass_density(Distribution::occupation(g, bump_f(*g, 3.0, 1.0, 0.8)));
    const auto mb = moments(b);
    for (double dt : {1e-3, 0.1, 10.0}) {
        StepInfo info;
        const auto s = step_weak_g_implicit(b, t, dt, &info);
        if (dt == 1e-3) REQUIRE(info.clipped_mass == 0.0);
        if (info.clipped_mass == 0.0) {
            CHECK(std::abs(moments(s).M - mb.M) <= 1e-12 * mb.M);
            CHECK(std::abs(moments(s).E - mb.E) <= 1e-12 * mb.E);
        } else {
            CHECK(moments(s).M - mb.M <= info.clipped_mass * (1 + 1e-12));
        }
        for (double x : s.values()) CHECK(x >= 0.0);
    }
    // second order agreement with the explicit step as dt -> 0
    double prev = 0.0;
    for (double dt : {1e-3, 5e-4, 2.5e-4}) {
        const auto a = step_weak_g(b, t, dt);
        const auto c = step_weak_g_implicit(b, t, dt);
        double d = std::abs(a.condensate() - c.condensate());
        for (std::size_t i = 0; i < 32; ++i) d += g->weight(i) * std::abs(a.value(i) - c.value(i));
        if (prev > 0.0) {
            CHECK(prev / d > 3.0);
            CHECK(prev / d < 5.0);
        }
        prev = d;
    }
}

TEST_CASE("adapt_dt") {
    StepControl c;
    c.dt = 0.01;
    c.safety = 0.9;
    c.max_relative_change = 0.02;
    c.dt_min = 1e-8;
    c.dt_max = 1.0;
    CHECK(adapt_dt(c, 0.02, 0.0).dt == doctest::Approx(0.009).epsilon(1e-14));
    CHECK(adapt_dt(c, 0.2, 0.0).dt == doctest::Approx(0.0009).epsilon(1e-14));
    CHECK(adapt_dt(c, 0.0, 0.0).dt == 1.0);
    CHECK(adapt_dt(c, 0.0, 4.0).dt == doctest::Approx(0.225).epsilon(1e-14));
    CHECK(adapt_dt(c, 0.0, 0.5).dt == 1.0);
    CHECK(adapt_dt(c, 1e9, 0.0).dt == 1e-8);
    CHECK(adapt_dt(c, 0.01, 1e12).dt == 1e-8);
    CHECK(adapt_dt(c, 0.013, 2.0).dt == adapt_dt(c, 0.013, 2.0).dt);
    CHECK_THROWS_AS(adapt_dt(c, -1.0, 0.0), DomainError);
}

TEST_CASE("run from equilibrium, strong form") {
    const auto g = make_grid(64, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Strong);
    const auto f = Distribution::occupation(g, be_f(*g, 0.5, 1.0));
    const auto rhs = collision_rhs_strong(f, t);
    double res = 0.0;
    for (double r : rhs) res = std::max(res, std::abs(r));
    RunOptions opt;
    opt.scheme = Scheme::StrongF;
    opt.diagnostics.detectors = DetectorParams::defaults_for(20.0);
    const auto rec = run(f, t, control(0.05, 1.0), opt);
    CHECK(rec.status == RunStatus::ReachedTEnd);
    CHECK(rec.t_final == 1.0);
    CHECK(rec.rows.size() == rec.accepted_steps);
    double drift = 0.0;
    for (std::size_t i = 0; i < 64; ++i) drift = std::max(drift, std::abs(rec.final_state.value(i) - f.value(i)));
    CHECK(drift <= 1.5 * res);
    for (const auto& r : rec.rows) CHECK(std::abs(r.S - rec.initial.S) <= 1e-2 * std::abs(rec.initial.S));
    for (std::size_t k = 1; k < rec.rows.size(); ++k) CHECK(rec.rows[k].t > rec.rows[k - 1].t);
}

TEST_CASE("zero initial state stays zero") {
    const auto g = make_grid(24, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Both);
    for (auto scheme : {Scheme::StrongF, Scheme::WeakG}) {
        for (auto stepper : {WeakStepper::Explicit, WeakStepper::LinearlyImplicit}) {
            RunOptions opt;
            opt.scheme = scheme;
            opt.stepper = stepper;
            const auto rec = run(Distribution::occupation(g, std::vector<double>(24, 0.0)), t, control(0.1, 1.0), opt);
            CHECK(rec.status == RunStatus::ReachedTEnd);
            for (double v : rec.final_state.values()) CHECK(v == 0.0);
            CHECK(rec.final_state.condensate() == 0.0);
            CHECK(rec.t_first_condensate == -1.0);
            CHECK(rec.t_star == -1.0);
        }
    }
}

TEST_CASE("weak run conserves mass and hits snapshot times") {
    const auto g = make_grid(32, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Both);
    const auto f = Distribution::occupation(g, bump_f(*g, 1.0, 1.5, 1.0));
    RunOptions opt;
    opt.diagnostics.snapshot_times = {0.0, 0.123, 0.5, 0.5, 2.0, 7.0};
    opt.diagnostics.mass_below_R = {0.5, 2.0};
    auto c = control(0.01, 2.0);
    c.max_relative_change = 0.01;
    const auto rec = run(f, t, c, opt);
    CHECK(rec.status == RunStatus::ReachedTEnd);
    REQUIRE(rec.snapshots.size() == 4);
    CHECK(rec.snapshots[0].first == 0.0);
    CHECK(rec.snapshots[1].first == 0.123);
    CHECK(rec.snapshots[2].first == 0.5);
    CHECK(rec.snapshots[3].first == 2.0);
    CHECK(rec.rows.back().t == 2.0);
    const double M0 = rec.initial.M, E0 = rec.initial.E;
    for (const auto& r : rec.rows) {
        CHECK(std::abs(r.M - M0) <= 1e-12 * M0);
        CHECK(std::abs(r.E - E0) <= 1e-11 * E0);
        CHECK(r.mass_below.size() == 2);
        CHECK(std::isfinite(r.D));
        CHECK(r.S >= rec.initial.S * (1 - 1e-8));
    }
    CHECK(rec.rows.size() == rec.accepted_steps);

    opt.diagnostics.record_every = 3;
    const auto thin = run(f, t, c, opt);
    CHECK(thin.accepted_steps == rec.accepted_steps);
    CHECK(thin.rows.size() == rec.accepted_steps / 3 + (rec.accepted_steps % 3 != 0 ? 1 : 0));
    CHECK(thin.rows.back().t == 2.0);
}

TEST_CASE("run determinism across thread counts") {
    const auto g = make_grid(32, 20.0, 3.0);
    const auto t = build_tables(g, TableSet::Both);
    const auto f = Distribution::occupation(g, bump_f(*g, 4.0, 0.1, 0.1));
    RunOptions opt;
    opt.stepper = WeakStepper::LinearlyImplicit;
    opt.diagnostics.mass_below_R = {0.1};
    std::vector<RunRecord> recs;
    for (unsigned threads : {1u, 2u, 8u}) {
        set_worker_threads(threads);
        recs.push_back(run(f, t, control(0.01, 1.0), opt));
    }
    set_worker_threads(1);
    CHECK(rows_identical(recs[0].rows, recs[1].rows));
    CHECK(rows_identical(recs[0].rows, recs[2].rows));
    for (std::size_t i = 0; i < 32; ++i) CHECK(same_bits(recs[0].final_state.value(i), recs[2].final_state.value(i)));
}

TEST_CASE("blow-up, underflow and non-finite statuses") {
    const auto g = make_grid(24, 20.0, 2.0);
    const auto t = build_tables(g, TableSet::Both);
    const auto f = Distribution::occupation(g, bump_f(*g, 5.0, 0.3, 0.2));

    RunOptions strong;
    strong.scheme = Scheme::StrongF;
    auto c = control(1e-3, 10.0);
    c.dt_min = c.dt_max = c.dt;
    c.blowup_linf_threshold = 1.0001 * linf_occupation(f);
    c.max_relative_change = 1.0;
    const auto grow = run(f, t, c, strong);
    REQUIRE(grow.status == RunStatus::BlowupDetected);
    CHECK(grow.t_star > 0.0);
    CHECK(grow.t_star == grow.t_final);
    CHECK(grow.rows.back().linf >= c.blowup_linf_threshold);
    for (std::size_t k = 0; k + 1 < grow.rows.size(); ++k) CHECK(grow.rows[k].linf < c.blowup_linf_threshold);

    auto stiff = control(5.0, 10.0);
    stiff.dt_min = stiff.dt_max = stiff.dt;
    const auto under = run(f, t, stiff, strong);
    CHECK(under.status == RunStatus::StepUnderflow);
    CHECK(under.t_final > 0.0);

    const auto huge = Distribution::occupation(g, bump_f(*g, 1e150, 0.3, 0.2));
    const auto nf = run(huge, t, control(1e-3, 1.0), strong);
    CHECK(nf.status == RunStatus::ReachedNonFinite);
    CHECK(nf.t_final == 0.0);
    CHECK(nf.final_state.value(0) == huge.value(0));

    std::vector<double> neg(24, 1.0);
    neg[3] = -1.0;
    CHECK_THROWS_AS(run(Distribution::occupation(g, neg), t, control(0.1, 1.0), strong), ContractError);
}
