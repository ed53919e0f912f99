#include "nordheim/integrator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nordheim/errors.hpp"

namespace nordheim {

namespace {

constexpr double kTiny = 1e-300;

double linear_mass_l1(const Distribution& d) {
    const auto& grid = d.grid();
    double s = std::abs(d.condensate());
    for (std::size_t i = 0; i < d.size(); ++i) {
        double v = d.value(i);
        if (d.is_occupation()) v *= mass_factor(grid.node(i));
        s += grid.weight(i) * std::abs(v);
    }
    return s;
}

void require_finite(const std::vector<double>& v, double n0) {
    bool ok = std::isfinite(n0);
    for (double x : v) ok = ok && std::isfinite(x);
    if (!ok) throw NumericalError("time step produced a non-finite state");
}

// Moves negative grid mass to n0. A negative n0 is zeroed and counted as clipped.
void clip_to_condensate(std::vector<double>& g, double& n0, const EnergyGrid& grid, StepInfo& info) {
    double moved = 0.0;
    double moved_energy = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] < 0.0) {
            moved += -g[i] * grid.weight(i);
            moved_energy += -g[i] * grid.weight(i) * grid.node(i);
            g[i] = 0.0;
        }
    }
    n0 -= moved;
    info.clipped_mass = moved;
    info.clipped_energy = moved_energy;
    if (n0 < 0.0) {
        info.clipped_mass += -n0;
        n0 = 0.0;
    }
}

}  // namespace

void StepControl::validate() const {
    if (!(dt_min > 0.0) || !(dt_min <= dt) || !(dt <= dt_max))
        throw ConfigError("step control requires 0 < dt_min <= dt <= dt_max");
    if (!(safety > 0.0 && safety < 1.0)) throw ConfigError("step control safety must lie in (0, 1)");
    if (!(max_relative_change > 0.0)) throw ConfigError("max_relative_change must be positive");
    if (!(stop_time >= 0.0) || !std::isfinite(stop_time)) throw ConfigError("stop_time must be finite and >= 0");
    if (!(blowup_linf_threshold >= 0.0)) throw ConfigError("blowup_linf_threshold must be >= 0");
}

std::string_view to_string(Scheme s) { return s == Scheme::StrongF ? "strong-f" : "weak-g"; }

std::string_view to_string(WeakStepper s) {
    return s == WeakStepper::Explicit ? "explicit" : "linearly-implicit";
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ReachedTEnd: return "ReachedT_end";
        case RunStatus::BlowupDetected: return "BlowupDetected";
        case RunStatus::StepUnderflow: return "StepUnderflow";
        case RunStatus::ReachedNonFinite: return "ReachedNonFinite";
    }
    return "unknown";
}

Distribution step_exponential(const Distribution& f, const KernelTables& tables, double dt, StepInfo* info) {
    if (!f.is_occupation()) throw ContractError("step_exponential needs an occupation distribution");
    if (!(dt > 0.0)) throw DomainError("step_exponential needs dt > 0");
    const auto gl = gain_loss_split(f, tables);
    const auto& grid = f.grid();
    std::vector<double> out(f.size());
    double a_max = 0.0;
    double change = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = gl.loss_rate[i];
        const double x = a * dt;
        const double decay = std::exp(-x);
        // (1 - e^{-a dt}) / a, dt in the limit a -> 0
        const double factor = x == 0.0 ? dt : -std::expm1(-x) / a;
        out[i] = f.value(i) * decay + gl.gain[i] * factor;
        a_max = std::max(a_max, a);
        change += grid.weight(i) * mass_factor(grid.node(i)) * std::abs(out[i] - f.value(i));
    }
    require_finite(out, 0.0);
    if (info) {
        *info = StepInfo{};
        info->a_max = a_max;
        info->relative_change = change / std::max(linear_mass_l1(f), kTiny);
    }
    return Distribution::occupation(f.grid_ptr(), std::move(out));
}

Distribution step_weak_g(const Distribution& g, const KernelTables& tables, double dt, StepInfo* info) {
    if (!g.is_mass()) throw ContractError("step_weak_g needs a mass distribution");
    if (!(dt > 0.0)) throw DomainError("step_weak_g needs dt > 0");
    const auto r = collision_rhs_weak_g(g, tables);
    const auto& grid = g.grid();
    std::vector<double> out(g.size());
    double change = dt * std::abs(r.condensate_rate);
    double a_max = r.condensate_loss_rate;
    for (std::size_t i = 0; i < g.size(); ++i) {
        out[i] = g.value(i) + dt * r.rates[i];
        change += grid.weight(i) * dt * std::abs(r.rates[i]);
        a_max = std::max(a_max, r.loss_rate[i]);
    }
    double n0 = g.condensate() + dt * r.condensate_rate;
    require_finite(out, n0);
    StepInfo local;
    clip_to_condensate(out, n0, grid, local);
    local.a_max = a_max;
    local.relative_change = change / std::max(linear_mass_l1(g), kTiny);
    if (info) *info = local;
    return Distribution::mass(g.grid_ptr(), std::move(out), n0);
}

Distribution step_weak_g_implicit(const Distribution& g, const KernelTables& tables, double dt, StepInfo* info) {
    if (!g.is_mass()) throw ContractError("step_weak_g_implicit needs a mass distribution");
    if (!(dt > 0.0)) throw DomainError("step_weak_g_implicit needs dt > 0");
    const auto jac = collision_jacobian_weak_g(g, tables);
    const auto& grid = g.grid();
    const auto n = static_cast<Eigen::Index>(jac.mass.size());

    Eigen::MatrixXd A(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            A(r, c) = (r == c ? 1.0 : 0.0) - dt * jac.jacobian[static_cast<std::size_t>(r * n + c)];
    Eigen::VectorXd rhs(n);
    for (Eigen::Index r = 0; r < n; ++r) rhs(r) = dt * jac.mass_rates[static_cast<std::size_t>(r)];
    Eigen::VectorXd delta = A.partialPivLu().solve(rhs);

    // Remove the round-off component along [1, e], weighted by the current masses.
    const auto ext = tables.extended_nodes();
    double c11 = 0.0, c12 = 0.0, c22 = 0.0, r1 = 0.0, r2 = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) {
        const double w = std::max(jac.mass[static_cast<std::size_t>(q)], 0.0);
        const double x = ext[static_cast<std::size_t>(q)];
        c11 += w;
        c12 += w * x;
        c22 += w * x * x;
        r1 += delta(q);
        r2 += delta(q) * x;
    }
    const double det = c11 * c22 - c12 * c12;
    if (det > 1e-14 * c11 * c22 && det > 0.0) {
        const double y1 = (c22 * r1 - c12 * r2) / det;
        const double y2 = (c11 * r2 - c12 * r1) / det;
        for (Eigen::Index q = 0; q < n; ++q) {
            const double w = std::max(jac.mass[static_cast<std::size_t>(q)], 0.0);
            delta(q) -= w * (y1 + y2 * ext[static_cast<std::size_t>(q)]);
        }
    }

    std::vector<double> out(g.size());
    double change = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) change += std::abs(delta(q));
    double n0 = jac.mass[0] + delta(0);
    for (std::size_t i = 0; i < g.size(); ++i)
        out[i] = (jac.mass[i + 1] + delta(static_cast<Eigen::Index>(i + 1))) / grid.weight(i);
    require_finite(out, n0);
    StepInfo local;
    clip_to_condensate(out, n0, grid, local);
    local.a_max = *std::max_element(jac.loss_rate.begin(), jac.loss_rate.end());
    local.relative_change = change / std::max(linear_mass_l1(g), kTiny);
    if (info) *info = local;
    return Distribution::mass(g.grid_ptr(), std::move(out), n0);
}

StepControl adapt_dt(const StepControl& prev, double measured, double a_max) {
    if (!(measured >= 0.0)) throw DomainError("adapt_dt needs a nonnegative measured change");
    StepControl next = prev;
    double dt = measured > 0.0 ? prev.safety * prev.dt * prev.max_relative_change / measured
                               : std::numeric_limits<double>::infinity();
    dt = std::clamp(dt, prev.dt_min, prev.dt_max);
    if (a_max > 0.0) dt = std::min(dt, prev.safety / a_max);
    next.dt = std::max(dt, prev.dt_min);
    return next;
}

DiagnosticsRow measure(const Distribution& d, const KernelTables& tables, const DiagnosticsConfig& cfg,
                       double t, double dt) {
    DiagnosticsRow row;
    row.t = t;
    row.dt = dt;
    const auto m = moments(d);
    row.M = m.M;
    row.E = m.E;
    const Distribution f = as_occupation(d);
    const Distribution g = d.is_mass() ? d : to_mass_density(d);
    row.linf = linf_occupation(f);
    row.n0 = g.condensate();
    row.S = entropy_S(f);
    if (tables.has_strong()) {
        const auto rep = dissipation_D(f, tables, cfg.log_floor);
        row.D = rep.D;
        row.clamped_fraction = rep.clamped_fraction;
    } else {
        row.D = std::numeric_limits<double>::quiet_NaN();
        row.clamped_fraction = std::numeric_limits<double>::quiet_NaN();
    }
    row.mass_below.reserve(cfg.mass_below_R.size());
    for (double R : cfg.mass_below_R) row.mass_below.push_back(mass_below(g, R));
    const auto blow = blowup_criterion(f, cfg.detectors);
    row.blowup_value = blow.value;
    row.blowup_satisfied = blow.satisfied;
    const auto cond = condensation_criterion(g, cfg.detectors);
    row.condensation_value = cond.value;
    row.condensation_satisfied = cond.satisfied;
    row.low_mass_margin = low_mass_check(g, cfg.detectors.K, cfg.detectors.rho1).margin;
    return row;
}

RunRecord run(const Distribution& initial, const KernelTables& tables, StepControl control,
              const RunOptions& options) {
    control.validate();
    options.diagnostics.detectors.validate();
    if (initial.grid_ptr() != tables.grid_ptr() && initial.grid().edges().size() != tables.grid().edges().size())
        throw ContractError("initial state and kernel tables use different grids");
    for (double v : initial.values())
        if (!(v >= 0.0)) throw DomainError("initial state must be nonnegative and finite");
    if (!(initial.condensate() >= 0.0)) throw DomainError("initial condensate must be nonnegative");

    const bool strong = options.scheme == Scheme::StrongF;
    if (strong && !tables.has_strong()) throw ContractError("strong-f run needs the strong-form table");
    if (!strong && !tables.has_weak()) throw ContractError("weak-g run needs the weak-form table");
    const bool implicit = !strong && options.stepper == WeakStepper::LinearlyImplicit;

    Distribution state = strong ? (initial.is_occupation() ? initial : to_occupation(initial))
                                : (initial.is_mass() ? initial : to_mass_density(initial));

    const auto& diag = options.diagnostics;
    const std::size_t every = std::max<std::size_t>(diag.record_every, 1);
    std::vector<double> snap_times = diag.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    snap_times.erase(std::unique(snap_times.begin(), snap_times.end()), snap_times.end());
    std::size_t next_snap = 0;

    RunRecord rec;
    rec.initial = measure(state, tables, diag, 0.0, 0.0);
    const double linf0 = rec.initial.linf;
    const double threshold = control.blowup_linf_threshold > 0.0
                                 ? control.blowup_linf_threshold
                                 : (linf0 > 0.0 ? 1e6 * linf0 : std::numeric_limits<double>::infinity());
    const double mass0 = std::max(rec.initial.M, kTiny);
    if (state.condensate() > 0.0) rec.t_first_condensate = 0.0;

    auto time_eq = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    while (next_snap < snap_times.size() && (snap_times[next_snap] < 0.0 || time_eq(snap_times[next_snap], 0.0))) {
        if (time_eq(snap_times[next_snap], 0.0)) rec.snapshots.emplace_back(0.0, state);
        ++next_snap;
    }

    double t = 0.0;
    while (!time_eq(t, control.stop_time) && t < control.stop_time) {
        double dt = std::min(control.dt, control.stop_time - t);
        bool hits_snapshot = false;
        if (next_snap < snap_times.size() && snap_times[next_snap] - t <= dt) {
            dt = snap_times[next_snap] - t;
            hits_snapshot = true;
        }
        StepInfo info;
        Distribution next;
        try {
            if (strong)
                next = step_exponential(state, tables, dt, &info);
            else if (implicit)
                next = step_weak_g_implicit(state, tables, dt, &info);
            else
                next = step_weak_g(state, tables, dt, &info);
        } catch (const NumericalError&) {
            rec.status = RunStatus::ReachedNonFinite;
            break;
        }
        const double guard_a = implicit ? 0.0 : info.a_max;
        const bool at_floor = dt <= control.dt_min * (1.0 + 1e-12);
        const bool too_stiff = guard_a > 0.0 && dt * guard_a > control.safety * (1.0 + 1e-12);
        const bool too_large = info.relative_change > options.reject_factor * control.max_relative_change;
        const bool clipped = !strong && info.clipped_mass > options.clip_tolerance * mass0;
        if ((too_stiff || too_large || clipped) && !at_floor) {
            ++rec.rejected_steps;
            StepControl shrunk = control;
            shrunk.dt = dt;
            shrunk = adapt_dt(shrunk, info.relative_change, guard_a);
            if (clipped || shrunk.dt >= dt) shrunk.dt = std::max(control.dt_min, 0.5 * dt);
            control.dt = shrunk.dt;
            continue;
        }
        if (clipped && at_floor && !implicit) {
            rec.status = RunStatus::StepUnderflow;
            break;
        }

        state = std::move(next);
        t = hits_snapshot ? snap_times[next_snap] : t + dt;
        if (!hits_snapshot && time_eq(t, control.stop_time)) t = control.stop_time;
        ++rec.accepted_steps;
        rec.clipped_mass_total += info.clipped_mass;
        if (rec.t_first_condensate < 0.0 && state.condensate() > 0.0) rec.t_first_condensate = t;
        if (hits_snapshot) {
            rec.snapshots.emplace_back(t, state);
            ++next_snap;
        }

        const double linf = linf_occupation(as_occupation(state));
        StepControl adapted = control;
        adapted.dt = dt;
        adapted = adapt_dt(adapted, info.relative_change, guard_a);
        const bool blowup = linf >= threshold && (at_floor || adapted.dt <= control.dt_min * (1.0 + 1e-12));
        const bool underflow = !blowup && at_floor && (too_stiff || too_large);

        if (rec.accepted_steps % every == 0 || blowup || underflow || time_eq(t, control.stop_time)) {
            DiagnosticsRow row = measure(state, tables, diag, t, dt);
            row.clipped_mass = info.clipped_mass;
            rec.rows.push_back(std::move(row));
        }
        if (blowup) {
            rec.status = RunStatus::BlowupDetected;
            rec.t_star = t;
            break;
        }
        if (underflow) {
            rec.status = RunStatus::StepUnderflow;
            break;
        }
        control.dt = adapted.dt;
    }
    rec.t_final = t;
    rec.final_state = std::move(state);
    return rec;
}

}  // namespace nordheim
