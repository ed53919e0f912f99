#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "nordheim/collision.hpp"
#include "nordheim/diagnostics.hpp"
#include "nordheim/distribution.hpp"
#include "nordheim/entropy.hpp"

namespace nordheim {

struct StepControl {
    double dt = 1e-3;
    double safety = 0.9;
    double max_relative_change = 0.02;
    double dt_min = 1e-12;
    double dt_max = 1.0;
    double stop_time = 1.0;
    // L-infinity level of f treated as numerical blow-up; 0 selects 1e6 times the initial value.
    double blowup_linf_threshold = 0.0;

    /// Throws ConfigError unless 0 < dt_min <= dt <= dt_max, 0 < safety < 1,
    /// max_relative_change > 0 and stop_time >= 0.
    void validate() const;
};

enum class Scheme { StrongF, WeakG };
enum class WeakStepper { Explicit, LinearlyImplicit };
enum class RunStatus { ReachedTEnd, BlowupDetected, StepUnderflow, ReachedNonFinite };

std::string_view to_string(Scheme s);
std::string_view to_string(WeakStepper s);
std::string_view to_string(RunStatus s);

struct StepInfo {
    double relative_change = 0.0;  // L1 change of the mass measure over total mass
    double a_max = 0.0;            // largest loss rate at the start of the step
    double clipped_mass = 0.0;     // negative mass removed and moved to n0
    double clipped_energy = 0.0;
};

/// f e^{-a dt} + gain (1 - e^{-a dt}) / a per node, with (gain, a) frozen at f.
/// The step functions throw NumericalError when the new state is not finite.
Distribution step_exponential(const Distribution& f, const KernelTables& tables, double dt,
                              StepInfo* info = nullptr);

/// g + dt rates, n0 + dt dn0/dt; negative values are set to zero and their
/// mass is added to n0.
Distribution step_weak_g(const Distribution& g, const KernelTables& tables, double dt,
                         StepInfo* info = nullptr);

/// Linearly implicit Euler on the extended masses, (I - dt J) dm = dt F(m),
/// followed by a round-off projection onto the mass and energy constraints and
/// the same clipping rule as step_weak_g.
Distribution step_weak_g_implicit(const Distribution& g, const KernelTables& tables, double dt,
                                  StepInfo* info = nullptr);

/// dt' = clamp(safety dt target / measured, dt_min, dt_max), then dt' <= safety / a_max
/// when a_max > 0.
StepControl adapt_dt(const StepControl& prev, double measured_relative_change, double a_max);

struct DiagnosticsConfig {
    std::vector<double> mass_below_R;
    DetectorParams detectors;
    std::size_t record_every = 1;
    std::vector<double> snapshot_times;
    double log_floor = kDefaultLogFloor;
};

struct DiagnosticsRow {
    double t = 0.0;
    double dt = 0.0;
    double M = 0.0;
    double E = 0.0;
    double linf = 0.0;
    double S = 0.0;
    double D = 0.0;
    double clamped_fraction = 0.0;
    double n0 = 0.0;
    std::vector<double> mass_below;
    double blowup_value = 0.0;
    bool blowup_satisfied = false;
    double condensation_value = 0.0;
    bool condensation_satisfied = false;
    double low_mass_margin = 0.0;
    double clipped_mass = 0.0;
};

/// Diagnostics of one state. S and D use the continuum occupation and need
/// the strong-form table; they are NaN without it.
DiagnosticsRow measure(const Distribution& d, const KernelTables& tables, const DiagnosticsConfig& cfg,
                       double t, double dt);

struct RunOptions {
    Scheme scheme = Scheme::WeakG;
    WeakStepper stepper = WeakStepper::Explicit;
    DiagnosticsConfig diagnostics;
    // Steps rejected when the measured change exceeds this multiple of the target.
    double reject_factor = 4.0;
    // Relative clipped mass above which a weak-form step is rejected.
    double clip_tolerance = 1e-13;
};

struct RunRecord {
    DiagnosticsRow initial;
    std::vector<DiagnosticsRow> rows;  // one per recorded accepted step
    RunStatus status = RunStatus::ReachedTEnd;
    double t_final = 0.0;
    double t_star = -1.0;             // blow-up witness, -1 if none
    double t_first_condensate = -1.0; // first time n0 > 0, -1 if none
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    double clipped_mass_total = 0.0;
    Distribution final_state;
    std::vector<std::pair<double, Distribution>> snapshots;
};

/// Steps to stop_time, blow-up or step underflow. Strong-form runs need an
/// occupation initial state, weak-form runs a mass state; the other kind is
/// converted when possible.
RunRecord run(const Distribution& initial, const KernelTables& tables, StepControl control,
              const RunOptions& options);

}  // namespace nordheim
