#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nordheim/distribution.hpp"
#include "nordheim/grid.hpp"

namespace nordheim {

/// W = min{sqrt e1, sqrt e2, sqrt e3, sqrt e4} / sqrt e1. Throws DomainError for e1 <= 0.
double kernel_W(double e1, double e2, double e3, double e4);

/// Phi = min{sqrt e1, sqrt e2, sqrt e3, sqrt((e1 + e2 - e3)_+)}.
double kernel_Phi(double e1, double e2, double e3);

/// Phi / sqrt(e1 e2 e3), extended continuously to a single vanishing argument
/// (the ratio Phi / sqrt(e) tends to 1 when that argument attains the min).
/// Configurations with two vanishing arguments return 0: either Phi vanishes
/// or the collision is trivial (H_phi == 0).
double cubic_kernel(double e1, double e2, double e3);

/// Phi / sqrt(e1 e2), extended the same way in e1 and e2.
double quadratic_kernel(double e1, double e2, double e3);

using TestFunction = std::function<double(double)>;

/// phi(e3) + phi(e1 + e2 - e3) - phi(e1) - phi(e2).
double H_phi(const TestFunction& phi, double e1, double e2, double e3);

/// (1/6) sum over permutations s of H_phi(e_s) Phi(e_s).
double G_phi(const TestFunction& phi, double e1, double e2, double e3);

/// Strong-form quadrature point for output node i: cells (k, l) give e3, e4 and
/// e2 = e3 + e4 - e1 falls in cell j. coeff = (8 pi^2 / sqrt 2) w_k w_l W, doubled
/// for k < l since only k <= l is stored.
struct StrongEntry {
    double coeff;
    std::uint16_t k;
    std::uint16_t l;
    std::uint16_t j;
};

/// Weak-form triple over the extended node set (index 0 is the condensate at
/// e = 0, index m >= 1 is grid node m - 1). Inputs e1, e2 are point masses at
/// extended nodes i <= j; the output e3 is integrated over cell k with g
/// constant in the cell, and both outputs e3 and e4 = e1 + e2 - e3 are
/// deposited on the hat basis of the extended nodes. The symmetry factor for
/// i < j is folded into the weights.
struct WeakTriple {
    double phi;        // Phi(e_i, e_j, node_k) at the cell-centre point
    double cubic;      // loss weight of the g1 g2 g3 term (per unit mass in cell k)
    double quadratic;  // loss weight of the g1 g2 term
    std::uint32_t out_begin;
    std::uint16_t i;
    std::uint16_t j;
    std::uint16_t k;
    std::uint16_t out_count;
};

/// Gain of extended node `node` from one triple; cubic and quadratic parts
/// are scaled like WeakTriple::cubic and ::quadratic.
struct WeakDeposit {
    double cubic;
    double quadratic;
    std::uint32_t node;
};

struct TableOptions {
    std::size_t budget_bytes = std::size_t{3} << 30;
    // Sub-samples per output cell in the weak form.
    std::size_t cell_samples = 4;
};

enum class TableSet : unsigned { Strong = 1, Weak = 2, Both = 3 };

class KernelTables {
public:
    const EnergyGrid& grid() const { return *grid_; }
    const std::shared_ptr<const EnergyGrid>& grid_ptr() const noexcept { return grid_; }

    bool has_strong() const noexcept { return !strong_offsets_.empty(); }
    bool has_weak() const noexcept { return !weak_offsets_.empty(); }

    std::span<const StrongEntry> strong_row(std::size_t i) const;
    std::size_t strong_count() const noexcept { return strong_.size(); }

    std::span<const WeakTriple> weak() const noexcept { return weak_; }
    std::span<const WeakDeposit> deposits(const WeakTriple& t) const {
        return std::span<const WeakDeposit>(deposits_).subspan(t.out_begin, t.out_count);
    }
    // Triples are grouped by their first index; row(i) spans triples with that i.
    std::span<const WeakTriple> weak_row(std::size_t ext_i) const;
    std::size_t weak_count() const noexcept { return weak_.size(); }

    // 0 followed by the grid nodes.
    std::span<const double> extended_nodes() const noexcept { return ext_nodes_; }

    std::size_t bytes() const noexcept;

    std::size_t cell_samples() const noexcept { return cell_samples_; }

    friend KernelTables build_tables(std::shared_ptr<const EnergyGrid>, TableSet, const TableOptions&);

private:
    std::shared_ptr<const EnergyGrid> grid_;
    std::vector<StrongEntry> strong_;
    std::vector<std::size_t> strong_offsets_;
    std::vector<WeakTriple> weak_;
    std::vector<std::size_t> weak_offsets_;
    std::vector<WeakDeposit> deposits_;
    std::size_t cell_samples_ = 0;
    std::vector<double> ext_nodes_;
};

/// Upper bound on the table memory, used for the budget check.
std::size_t estimate_table_bytes(const EnergyGrid& grid, TableSet which,
                                 std::size_t cell_samples = TableOptions{}.cell_samples);

/// Deterministic; throws ResourceError when the estimate exceeds budget_bytes.
KernelTables build_tables(std::shared_ptr<const EnergyGrid> grid, TableSet which = TableSet::Both,
                          const TableOptions& options = {});

struct CollisionRates {
    std::vector<double> gain;       // particles per unit time, occupation units
    std::vector<double> loss_rate;  // a, 1/time
};

CollisionRates gain_loss_split(const Distribution& f, const KernelTables& tables);

/// gain - a f.
std::vector<double> collision_rhs_strong(const Distribution& f, const KernelTables& tables);

struct WeakRates {
    std::vector<double> rates;       // dg_i/dt per grid node
    double condensate_rate = 0.0;    // dn0/dt
    std::vector<double> loss_rate;   // per grid node, fraction of g_i removed per unit time
    double condensate_loss_rate = 0.0;
};

WeakRates collision_rhs_weak_g(const Distribution& g, const KernelTables& tables);

/// Weak-form rates and their Jacobian in the extended mass variables
/// m_0 = n0, m_q = w_{q-1} g_{q-1}. Both 1^T J and e^T J vanish by construction.
struct WeakJacobian {
    std::vector<double> mass;         // m
    std::vector<double> mass_rates;   // dm/dt
    std::vector<double> jacobian;     // row-major, (n + 1) x (n + 1)
    std::vector<double> loss_rate;    // per extended node
};

WeakJacobian collision_jacobian_weak_g(const Distribution& g, const KernelTables& tables);

}  // namespace nordheim
