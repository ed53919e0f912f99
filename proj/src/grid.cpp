#include "nordheim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nordheim/errors.hpp"

namespace nordheim {

namespace {

void fill_from_edges(std::vector<double>& edges, std::vector<double>& nodes,
                     std::vector<double>& weights) {
    const std::size_t n = edges.size() - 1;
    nodes.resize(n);
    weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = 0.5 * (edges[i] + edges[i + 1]);
        weights[i] = edges[i + 1] - edges[i];
    }
}

}  // namespace

EnergyGrid build_grid(const GridSpec& spec) {
    if (spec.n_nodes < 8) {
        throw ConfigError("grid: n_nodes must be >= 8, got " + std::to_string(spec.n_nodes));
    }
    if (!(spec.cutoff > 0.0) || !std::isfinite(spec.cutoff)) {
        throw ConfigError("grid: cutoff_energy must be positive and finite");
    }
    if (!(spec.clustering > 0.0) || !std::isfinite(spec.clustering)) {
        throw ConfigError("grid: clustering exponent must be positive");
    }

    EnergyGrid g;
    g.spec_ = spec;
    g.cutoff_ = spec.cutoff;
    const std::size_t n = spec.n_nodes;
    g.edges_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n);
        g.edges_[i] = spec.clustering == 1.0 ? spec.cutoff * x
                                             : spec.cutoff * std::pow(x, spec.clustering);
    }
    g.edges_[0] = 0.0;
    g.edges_[n] = spec.cutoff;
    fill_from_edges(g.edges_, g.nodes_, g.weights_);
    return g;
}

EnergyGrid grid_from_edges(std::vector<double> edges, bool condensate_slot) {
    if (edges.size() < 9) {
        throw ConfigError("grid: at least 8 cells required");
    }
    if (edges.front() != 0.0) {
        throw ConfigError("grid: first cell boundary must be 0");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) {
            throw ConfigError("grid: cell boundaries must be strictly increasing");
        }
    }
    EnergyGrid g;
    g.spec_.n_nodes = edges.size() - 1;
    g.spec_.cutoff = edges.back();
    g.spec_.condensate_slot = condensate_slot;
    // Recover the clustering exponent from the second boundary; exact for grids
    // produced by build_grid, informational otherwise.
    const double n = static_cast<double>(g.spec_.n_nodes);
    g.spec_.clustering = std::log(edges[1] / edges.back()) / std::log(1.0 / n);
    if (std::abs(g.spec_.clustering - 1.0) < 1e-12) g.spec_.clustering = 1.0;
    g.cutoff_ = edges.back();
    g.edges_ = std::move(edges);
    fill_from_edges(g.edges_, g.nodes_, g.weights_);
    return g;
}

std::size_t EnergyGrid::cell_of(double e) const {
    if (e >= cutoff_) return size();
    // First boundary strictly greater than e, minus one.
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), e);
    const auto idx = static_cast<std::size_t>(it - edges_.begin());
    return idx == 0 ? 0 : std::min(idx - 1, size() - 1);
}

double quadrature(const EnergyGrid& grid, std::span<const double> values) {
    if (values.size() != grid.size()) {
        throw ContractError("quadrature: expected " + std::to_string(grid.size()) +
                            " values, got " + std::to_string(values.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += grid.weight(i) * values[i];
    return sum;
}

double interpolate(const EnergyGrid& grid, std::span<const double> values, double e) {
    if (values.size() != grid.size()) {
        throw ContractError("interpolate: values length does not match grid");
    }
    if (!(e >= 0.0) || e > grid.cutoff()) {
        throw DomainError("interpolate: energy outside [0, L]");
    }
    const auto nodes = grid.nodes();
    if (e <= nodes.front()) return values.front();
    if (e >= nodes.back()) return values.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), e);
    const std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
    const std::size_t lo = hi - 1;
    const double t = (e - nodes[lo]) / (nodes[hi] - nodes[lo]);
    return values[lo] + t * (values[hi] - values[lo]);
}

}  // namespace nordheim
