#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nordheim {

struct GridSpec {
    std::size_t n_nodes = 128;
    double cutoff = 20.0;      // L, energy units
    double clustering = 2.0;   // p in b_i = L (i/n)^p; 1 gives a uniform grid
    bool condensate_slot = true;
};

/// Cell-centred discretisation of [0, L].
///
/// Cell i spans [edge(i), edge(i+1)] with edges b_i = L (i/n)^p. The node is the
/// cell midpoint and the weight is the cell width, so the quadrature is the
/// midpoint rule and the weights telescope to L. The condensate slot (a point
/// mass at energy zero) is not a node; it is carried by the distribution.
class EnergyGrid {
public:
    EnergyGrid() = default;

    std::size_t size() const noexcept { return nodes_.size(); }
    double cutoff() const noexcept { return cutoff_; }
    bool has_condensate_slot() const noexcept { return spec_.condensate_slot; }
    const GridSpec& spec() const noexcept { return spec_; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    // n + 1 cell boundaries, edges()[0] == 0, edges()[n] == L.
    std::span<const double> edges() const noexcept { return edges_; }

    double node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    double edge(std::size_t i) const { return edges_[i]; }

    // Index of the cell containing e, or size() if e >= L. Requires e >= 0.
    std::size_t cell_of(double e) const;

    bool is_uniform() const noexcept { return spec_.clustering == 1.0; }

    friend EnergyGrid build_grid(const GridSpec& spec);
    friend EnergyGrid grid_from_edges(std::vector<double> edges, bool condensate_slot);

private:
    GridSpec spec_{};
    double cutoff_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> edges_;
};

/// Throws ConfigError unless n_nodes >= 8, cutoff > 0 and clustering > 0.
EnergyGrid build_grid(const GridSpec& spec);

/// Rebuilds a grid from stored cell boundaries (used when loading snapshots).
EnergyGrid grid_from_edges(std::vector<double> edges, bool condensate_slot = true);

/// Sum of w_i * values_i. Throws ContractError on length mismatch.
double quadrature(const EnergyGrid& grid, std::span<const double> values);

/// Piecewise-linear interpolant through (node_i, values_i), held constant
/// outside [node_0, node_{n-1}]. Throws DomainError if e is outside [0, L].
double interpolate(const EnergyGrid& grid, std::span<const double> values, double e);

}  // namespace nordheim
