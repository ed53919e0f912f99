#include "nordheim/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nordheim/equilibrium.hpp"
#include "nordheim/errors.hpp"

namespace nordheim {

Distribution::Distribution(DistKind kind, std::shared_ptr<const EnergyGrid> grid,
                           std::vector<double> values, double condensate)
    : kind_(kind), grid_(std::move(grid)), values_(std::move(values)), condensate_(condensate) {
    if (!grid_) throw ContractError("distribution: null grid");
    if (values_.size() != grid_->size()) {
        throw ContractError("distribution: expected " + std::to_string(grid_->size()) +
                            " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ContractError("distribution: values must be finite and nonnegative");
        }
    }
    if (!(condensate_ >= 0.0) || !std::isfinite(condensate_)) {
        throw ContractError("distribution: condensate mass must be finite and nonnegative");
    }
    if (kind_ == DistKind::Occupation && condensate_ != 0.0) {
        throw ContractError("distribution: occupation form cannot carry a condensate");
    }
}

Distribution Distribution::occupation(std::shared_ptr<const EnergyGrid> grid, std::vector<double> f) {
    return Distribution(DistKind::Occupation, std::move(grid), std::move(f), 0.0);
}

Distribution Distribution::mass(std::shared_ptr<const EnergyGrid> grid, std::vector<double> g,
                                double condensate) {
    return Distribution(DistKind::Mass, std::move(grid), std::move(g), condensate);
}

void Distribution::set_condensate(double n0) {
    if (kind_ == DistKind::Occupation && n0 != 0.0) {
        throw ContractError("distribution: occupation form cannot carry a condensate");
    }
    condensate_ = n0;
}

double mass_factor(double e) { return 4.0 * std::numbers::pi * std::sqrt(2.0 * e); }

Distribution to_mass_density(const Distribution& f) {
    if (!f.is_occupation()) throw ContractError("to_mass_density: expected occupation form");
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = mass_factor(f.grid().node(i)) * f.value(i);
    return Distribution::mass(f.grid_ptr(), std::move(g), 0.0);
}

Distribution continuum_occupation(const Distribution& g) {
    if (!g.is_mass()) throw ContractError("continuum_occupation: expected mass form");
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = g.value(i) / mass_factor(g.grid().node(i));
    return Distribution::occupation(g.grid_ptr(), std::move(f));
}

Distribution to_occupation(const Distribution& g) {
    if (!g.is_mass()) throw ContractError("to_occupation: expected mass form");
    if (g.condensate() > 0.0) {
        throw ContractError("to_occupation: the occupation form cannot represent a condensate");
    }
    return continuum_occupation(g);
}

Distribution as_occupation(const Distribution& d) {
    return d.is_occupation() ? d : continuum_occupation(d);
}

MomentPair moments(const Distribution& d) {
    const EnergyGrid& grid = d.grid();
    MomentPair m;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double e = grid.node(i);
        const double g = d.is_mass() ? d.value(i) : mass_factor(e) * d.value(i);
        m.M += grid.weight(i) * g;
        m.E += grid.weight(i) * g * e;
    }
    m.M += d.condensate();
    return m;
}

double linf_occupation(const Distribution& d) {
    double mx = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double f = d.is_mass() ? d.value(i) / mass_factor(d.grid().node(i)) : d.value(i);
        mx = std::max(mx, f);
    }
    return mx;
}

}  // namespace nordheim
