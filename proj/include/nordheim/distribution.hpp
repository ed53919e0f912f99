#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nordheim/equilibrium.hpp"
#include "nordheim/grid.hpp"

namespace nordheim {

enum class DistKind { Occupation, Mass };

/// Grid values of the occupation density f(e) or of the mass density
/// g(e) = 4 pi sqrt(2e) f(e), plus the condensate mass n0 carried at e = 0
/// (mass form only).
class Distribution {
public:
    Distribution() = default;

    static Distribution occupation(std::shared_ptr<const EnergyGrid> grid, std::vector<double> f);
    static Distribution mass(std::shared_ptr<const EnergyGrid> grid, std::vector<double> g,
                             double condensate = 0.0);

    DistKind kind() const noexcept { return kind_; }
    bool is_occupation() const noexcept { return kind_ == DistKind::Occupation; }
    bool is_mass() const noexcept { return kind_ == DistKind::Mass; }

    const EnergyGrid& grid() const { return *grid_; }
    const std::shared_ptr<const EnergyGrid>& grid_ptr() const noexcept { return grid_; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> mutable_values() noexcept { return values_; }
    double value(std::size_t i) const { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

    double condensate() const noexcept { return condensate_; }
    void set_condensate(double n0);

private:
    Distribution(DistKind kind, std::shared_ptr<const EnergyGrid> grid, std::vector<double> values,
                 double condensate);

    DistKind kind_ = DistKind::Occupation;
    std::shared_ptr<const EnergyGrid> grid_;
    std::vector<double> values_;
    double condensate_ = 0.0;
};

/// 4 pi sqrt(2 e) at e.
double mass_factor(double e);

Distribution to_mass_density(const Distribution& f);
/// Throws ContractError if the distribution carries condensate mass.
Distribution to_occupation(const Distribution& g);
/// Occupation density of the continuum part only; the condensate is dropped.
Distribution continuum_occupation(const Distribution& g);
/// Returns f as is, or the continuum occupation of g.
Distribution as_occupation(const Distribution& d);

/// (M, E) = (4 pi int f sqrt(2e) de + n0, 4 pi int f sqrt(2 e^3) de) by the grid
/// quadrature, for either kind.
MomentPair moments(const Distribution& d);

/// max_i f_i of the occupation form.
double linf_occupation(const Distribution& d);

}  // namespace nordheim
