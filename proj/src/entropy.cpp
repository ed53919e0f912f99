#include "nordheim/entropy.hpp"

#include <cmath>
#include <limits>

#include "nordheim/errors.hpp"
#include "nordheim/parallel.hpp"

namespace nordheim {

double entropy_density(double f) {
    if (!(f > 0.0)) {
        if (f == 0.0) return 0.0;
        throw DomainError("entropy_density: negative occupation");
    }
    if (f < 1.0) return (1.0 + f) * std::log1p(f) - f * std::log(f);
    // log(1 + f) + f log(1 + 1/f) avoids cancelling two large terms.
    return std::log1p(f) + f * std::log1p(1.0 / f);
}

double entropy_S(const Distribution& d) {
    const Distribution f = as_occupation(d);
    const EnergyGrid& grid = f.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s += grid.weight(i) * std::sqrt(grid.node(i)) * entropy_density(f.value(i));
    }
    return s;
}

double q_ratio(double f) {
    if (f < 0.0) throw DomainError("q_ratio: negative occupation");
    if (std::isinf(f)) return 1.0;
    return f / (1.0 + f);
}

EntropyReport dissipation_D(const Distribution& d, const KernelTables& tables, double floor) {
    if (!(floor > 0.0)) throw ContractError("dissipation_D: floor must be positive");
    const Distribution f_dist = as_occupation(d);
    if (f_dist.size() != tables.grid().size()) throw ContractError("dissipation_D: grid mismatch");
    const EnergyGrid& grid = tables.grid();
    const std::size_t n = f_dist.size();
    const auto f = f_dist.values();

    std::vector<double> lq(n);  // log(max(f, floor) / (1 + max(f, floor)))
    for (std::size_t i = 0; i < n; ++i) {
        const double fc = std::max(f[i], floor);
        lq[i] = std::log(fc) - std::log1p(fc);
    }

    std::vector<double> part(n, 0.0);
    std::vector<std::size_t> clamped(n, 0), points(n, 0);
    parallel_blocks(n, [&](std::size_t i) {
        const double fi = f[i];
        double acc = 0.0;
        std::size_t c = 0;
        const auto row = tables.strong_row(i);
        for (const StrongEntry& en : row) {
            const double fj = f[en.j], fk = f[en.k], fl = f[en.l];
            const double pij = fi * fj, pkl = fk * fl;
            const double oij = (1.0 + fi) * (1.0 + fj), okl = (1.0 + fk) * (1.0 + fl);
            // (1+f)^4 (Q_ij - Q_kl) = f_i f_j (1+f_k)(1+f_l) - f_k f_l (1+f_i)(1+f_j)
            const double diff = pij * okl - pkl * oij;
            const bool low = fi < floor || fj < floor || fk < floor || fl < floor;
            if (low) ++c;
            const double term = diff * ((lq[i] + lq[en.j]) - (lq[en.k] + lq[en.l]));
            if (term > 0.0) acc += en.coeff * term;
        }
        part[i] = 0.25 * grid.weight(i) * std::sqrt(grid.node(i)) * acc;
        clamped[i] = c;
        points[i] = row.size();
    });

    EntropyReport r;
    r.S = entropy_S(f_dist);
    std::size_t nc = 0, np = 0;
    for (std::size_t i = 0; i < n; ++i) {
        r.D += part[i];
        nc += clamped[i];
        np += points[i];
    }
    r.clamped_fraction = np == 0 ? 0.0 : static_cast<double>(nc) / static_cast<double>(np);
    return r;
}

}  // namespace nordheim
