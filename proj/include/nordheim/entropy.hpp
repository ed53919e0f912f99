#pragma once

#include "nordheim/collision.hpp"
#include "nordheim/distribution.hpp"

namespace nordheim {

inline constexpr double kDefaultLogFloor = 1e-30;

struct EntropyReport {
    double S = 0.0;
    double D = 0.0;
    double clamped_fraction = 0.0;  // share of shell points where the log floor was used
};

/// (1 + f) log(1 + f) - f log f, with value 0 at f = 0.
double entropy_density(double f);

/// sum_i w_i sqrt(e_i) [(1 + f_i) log(1 + f_i) - f_i log f_i].
/// A mass distribution is reduced to its continuum occupation first.
double entropy_S(const Distribution& f);

/// Entropy dissipation over the strong-form energy shell,
///   (1/4) sum w_i sqrt(e_i) c (1+f_i)(1+f_j)(1+f_k)(1+f_l) (Q_ij - Q_kl) (log Q_ij - log Q_kl)
/// with Q_ab = f_a f_b / ((1 + f_a)(1 + f_b)); f is replaced by max(f, floor)
/// inside the logarithms only. Each shell term is nonnegative.
EntropyReport dissipation_D(const Distribution& f, const KernelTables& tables,
                            double floor = kDefaultLogFloor);

/// f / (1 + f); 1 for f = +inf.
double q_ratio(double f);

}  // namespace nordheim
