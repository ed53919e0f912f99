#include "nordheim/collision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nordheim/errors.hpp"
#include "nordheim/parallel.hpp"

namespace nordheim {

namespace {

constexpr double kPi = std::numbers::pi;
// 8 pi^2 / sqrt(2)
const double kStrongPrefactor = 8.0 * kPi * kPi / std::sqrt(2.0);
// 2^{-5/2} and pi/2: cubic and quadratic weights of the weak form for g.
const double kCubicPrefactor = 1.0 / std::pow(2.0, 2.5);
constexpr double kQuadraticPrefactor = kPi / 2.0;

constexpr std::size_t kWeakBlocks = 64;

double sqrt_pos(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

}  // namespace

double kernel_W(double e1, double e2, double e3, double e4) {
    if (!(e1 > 0.0)) throw DomainError("kernel_W: e1 must be positive; use the mass-density kernel at e1 = 0");
    const double m = std::min({std::sqrt(e1), sqrt_pos(e2), sqrt_pos(e3), sqrt_pos(e4)});
    return m / std::sqrt(e1);
}

double kernel_Phi(double e1, double e2, double e3) {
    return std::min({sqrt_pos(e1), sqrt_pos(e2), sqrt_pos(e3), sqrt_pos(e1 + e2 - e3)});
}

double cubic_kernel(double a, double b, double c) {
    const double d = a + b - c;
    if (!(d > 0.0)) return 0.0;
    const int zeros = (a == 0.0) + (b == 0.0) + (c == 0.0);
    if (zeros >= 2) return 0.0;
    if (a == 0.0) return 1.0 / std::sqrt(b * c);
    if (b == 0.0) return 1.0 / std::sqrt(a * c);
    if (c == 0.0) return 1.0 / std::sqrt(a * b);
    return kernel_Phi(a, b, c) / std::sqrt(a * b * c);
}

double quadratic_kernel(double a, double b, double c) {
    const double d = a + b - c;
    if (!(d > 0.0) || c == 0.0) return 0.0;
    if (a == 0.0 && b == 0.0) return 0.0;
    if (a == 0.0) return 1.0 / std::sqrt(b);
    if (b == 0.0) return 1.0 / std::sqrt(a);
    return kernel_Phi(a, b, c) / std::sqrt(a * b);
}

double H_phi(const TestFunction& phi, double e1, double e2, double e3) {
    return phi(e3) + phi(e1 + e2 - e3) - phi(e1) - phi(e2);
}

double G_phi(const TestFunction& phi, double e1, double e2, double e3) {
    const std::array<double, 3> e{e1, e2, e3};
    constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    double sum = 0.0;
    for (const auto& s : perms) {
        const double a = e[s[0]], b = e[s[1]], c = e[s[2]];
        const double ph = kernel_Phi(a, b, c);
        if (ph != 0.0) sum += H_phi(phi, a, b, c) * ph;
    }
    return sum / 6.0;
}

std::span<const StrongEntry> KernelTables::strong_row(std::size_t i) const {
    if (!has_strong()) throw ContractError("kernel tables: strong-form table not built");
    return std::span<const StrongEntry>(strong_).subspan(strong_offsets_[i],
                                                         strong_offsets_[i + 1] - strong_offsets_[i]);
}

std::span<const WeakTriple> KernelTables::weak_row(std::size_t ext_i) const {
    if (!has_weak()) throw ContractError("kernel tables: weak-form table not built");
    return std::span<const WeakTriple>(weak_).subspan(weak_offsets_[ext_i],
                                                      weak_offsets_[ext_i + 1] - weak_offsets_[ext_i]);
}

std::size_t KernelTables::bytes() const noexcept {
    return strong_.size() * sizeof(StrongEntry) + weak_.size() * sizeof(WeakTriple) +
           deposits_.size() * sizeof(WeakDeposit) +
           (strong_offsets_.size() + weak_offsets_.size() + ext_nodes_.size()) * sizeof(double);
}

std::size_t estimate_table_bytes(const EnergyGrid& grid, TableSet which, std::size_t cell_samples) {
    const std::size_t n = grid.size();
    std::size_t bytes = 0;
    if (static_cast<unsigned>(which) & static_cast<unsigned>(TableSet::Strong)) {
        bytes += n * (n * (n + 1) / 2) * sizeof(StrongEntry);
    }
    if (static_cast<unsigned>(which) & static_cast<unsigned>(TableSet::Weak)) {
        const std::size_t m = n + 1;
        const std::size_t per = std::min(4 * cell_samples, 2 * cell_samples + 3);
        bytes += m * (m * (m + 1) / 2) * (sizeof(WeakTriple) + per * sizeof(WeakDeposit));
    }
    return bytes;
}

KernelTables build_tables(std::shared_ptr<const EnergyGrid> grid_ptr, TableSet which,
                          const TableOptions& options) {
    if (!grid_ptr) throw ContractError("build_tables: null grid");
    const EnergyGrid& grid = *grid_ptr;
    const std::size_t n = grid.size();
    if (n >= std::numeric_limits<std::uint16_t>::max() - 1) {
        throw ConfigError("build_tables: grid too large for 16-bit table indices");
    }
    if (options.cell_samples == 0) throw ConfigError("build_tables: cell_samples must be positive");
    const std::size_t budget_bytes = options.budget_bytes;
    const std::size_t need = estimate_table_bytes(grid, which, options.cell_samples);
    if (need > budget_bytes) {
        std::ostringstream os;
        os << "build_tables: kernel tables need up to " << need << " bytes, budget is "
           << budget_bytes;
        throw ResourceError(os.str(), need);
    }

    KernelTables t;
    t.grid_ = grid_ptr;
    t.cell_samples_ = options.cell_samples;
    t.ext_nodes_.resize(n + 1);
    t.ext_nodes_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) t.ext_nodes_[i + 1] = grid.node(i);

    const auto e = grid.nodes();
    const auto w = grid.weights();

    if (static_cast<unsigned>(which) & static_cast<unsigned>(TableSet::Strong)) {
        t.strong_offsets_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            t.strong_offsets_[i] = t.strong_.size();
            const double si = std::sqrt(e[i]);
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i) continue;
                for (std::size_t l = k; l < n; ++l) {
                    if (l == i) continue;  // {k, l} == {i, j}: q vanishes identically
                    const double e2 = e[k] + e[l] - e[i];
                    if (e2 < 0.0) continue;
                    const std::size_t j = grid.cell_of(e2);
                    if (j >= n) continue;  // collision partner above the cutoff
                    const double m = std::min({si, std::sqrt(e2), std::sqrt(e[k]), std::sqrt(e[l])});
                    const double sym = k < l ? 2.0 : 1.0;
                    t.strong_.push_back({sym * kStrongPrefactor * w[k] * w[l] * m / si,
                                         static_cast<std::uint16_t>(k), static_cast<std::uint16_t>(l),
                                         static_cast<std::uint16_t>(j)});
                }
            }
        }
        t.strong_offsets_[n] = t.strong_.size();
    }

    if (static_cast<unsigned>(which) & static_cast<unsigned>(TableSet::Weak)) {
        const auto& x = t.ext_nodes_;
        const std::size_t m = n + 1;
        const std::size_t first = grid.has_condensate_slot() ? 0 : 1;
        const std::size_t S = options.cell_samples;
        const double top = x[n];
        // Hat basis on the extended nodes: e in [0, top] -> (p, theta).
        auto hat = [&](double en, std::size_t& p, double& theta) {
            std::size_t q = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), en) - x.begin());
            q = q == 0 ? 0 : q - 1;
            if (q >= n) q = n - 1;
            p = q;
            theta = (en - x[q]) / (x[q + 1] - x[q]);
        };
        std::vector<WeakDeposit> local;
        auto deposit = [&](std::size_t node, double a, double b) {
            if (a == 0.0 && b == 0.0) return;
            for (auto& d : local) {
                if (d.node == node) {
                    d.cubic += a;
                    d.quadratic += b;
                    return;
                }
            }
            local.push_back({a, b, static_cast<std::uint32_t>(node)});
        };
        auto deposit_hat = [&](double en, double a, double b) {
            std::size_t p;
            double theta;
            hat(en, p, theta);
            deposit(p, (1.0 - theta) * a, (1.0 - theta) * b);
            deposit(p + 1, theta * a, theta * b);
        };

        t.weak_offsets_.assign(m + 1, 0);
        for (std::size_t i = 0; i < m; ++i) {
            t.weak_offsets_[i] = t.weak_.size();
            if (i < first) continue;
            for (std::size_t j = std::max<std::size_t>(i, 1); j < m; ++j) {
                const double sym = i < j ? 2.0 : 1.0;
                const double e12 = x[i] + x[j];
                for (std::size_t k = first; k < m; ++k) {
                    if (k == 0 && i == 0) continue;  // two condensate arguments
                    local.clear();
                    double A = 0.0, B = 0.0;
                    if (k == 0) {
                        if (e12 > top) continue;
                        A = sym * kCubicPrefactor * cubic_kernel(x[i], x[j], 0.0);
                        deposit(0, A, 0.0);
                        deposit_hat(e12, A, 0.0);
                    } else {
                        const double lo = grid.edge(k - 1);
                        const double h = grid.weight(k - 1) / static_cast<double>(S);
                        for (std::size_t q = 0; q < S; ++q) {
                            const double e3 = lo + (static_cast<double>(q) + 0.5) * h;
                            const double e4 = e12 - e3;
                            if (!(e4 > 0.0) || e4 > top || e3 > top) continue;
                            if (first == 1 && std::min(e3, e4) < x[1]) continue;
                            const double a = sym * kCubicPrefactor * cubic_kernel(x[i], x[j], e3) /
                                             static_cast<double>(S);
                            const double b = sym * kQuadraticPrefactor * quadratic_kernel(x[i], x[j], e3) * h;
                            if (a == 0.0 && b == 0.0) continue;
                            A += a;
                            B += b;
                            deposit_hat(e3, a, b);
                            deposit_hat(e4, a, b);
                        }
                    }
                    if (A == 0.0 && B == 0.0) continue;
                    WeakTriple tr{};
                    tr.phi = kernel_Phi(x[i], x[j], x[k]);
                    tr.cubic = A;
                    tr.quadratic = B;
                    tr.out_begin = static_cast<std::uint32_t>(t.deposits_.size());
                    tr.out_count = static_cast<std::uint16_t>(local.size());
                    tr.i = static_cast<std::uint16_t>(i);
                    tr.j = static_cast<std::uint16_t>(j);
                    tr.k = static_cast<std::uint16_t>(k);
                    t.deposits_.insert(t.deposits_.end(), local.begin(), local.end());
                    t.weak_.push_back(tr);
                }
            }
        }
        t.weak_offsets_[m] = t.weak_.size();
        if (t.deposits_.size() >= std::numeric_limits<std::uint32_t>::max()) {
            throw ResourceError("build_tables: weak-form deposit table overflow", t.bytes());
        }
    }
    return t;
}

CollisionRates gain_loss_split(const Distribution& dist, const KernelTables& tables) {
    if (!dist.is_occupation()) throw ContractError("gain_loss_split: expected occupation form f");
    if (dist.size() != tables.grid().size()) throw ContractError("gain_loss_split: grid mismatch");
    const std::size_t n = dist.size();
    const auto f = dist.values();
    CollisionRates r;
    r.gain.assign(n, 0.0);
    r.loss_rate.assign(n, 0.0);
    parallel_blocks(n, [&](std::size_t i) {
        double gain = 0.0;
        double a = 0.0;
        const double fi = f[i];
        for (const StrongEntry& en : tables.strong_row(i)) {
            const double fk = f[en.k], fl = f[en.l], fj = f[en.j];
            gain += en.coeff * fk * fl * (1.0 + fi + fj);
            a += en.coeff * fj * (1.0 + fk + fl);
        }
        r.gain[i] = gain;
        r.loss_rate[i] = a;
    });
    return r;
}

std::vector<double> collision_rhs_strong(const Distribution& dist, const KernelTables& tables) {
    CollisionRates r = gain_loss_split(dist, tables);
    std::vector<double> rhs(dist.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = r.gain[i] - r.loss_rate[i] * dist.value(i);
    return rhs;
}

WeakRates collision_rhs_weak_g(const Distribution& dist, const KernelTables& tables) {
    if (!dist.is_mass()) throw ContractError("collision_rhs_weak_g: expected mass form g");
    if (dist.size() != tables.grid().size()) throw ContractError("collision_rhs_weak_g: grid mismatch");
    const EnergyGrid& grid = tables.grid();
    const std::size_t n = dist.size();
    const std::size_t m = n + 1;

    std::vector<double> mass(m);
    mass[0] = dist.condensate();
    for (std::size_t i = 0; i < n; ++i) mass[i + 1] = grid.weight(i) * dist.value(i);

    const auto triples = tables.weak();
    const std::size_t total = triples.size();
    const std::size_t blocks = std::min<std::size_t>(kWeakBlocks, std::max<std::size_t>(total, 1));
    std::vector<double> gain(blocks * m, 0.0);
    std::vector<double> loss(blocks * m, 0.0);

    parallel_blocks(blocks, [&](std::size_t b) {
        const std::size_t lo = total * b / blocks;
        const std::size_t hi = total * (b + 1) / blocks;
        double* gb = gain.data() + b * m;
        double* lb = loss.data() + b * m;
        for (std::size_t t = lo; t < hi; ++t) {
            const WeakTriple& tr = triples[t];
            const double mi = mass[tr.i], mj = mass[tr.j];
            const double mij = mi * mj;
            if (mij == 0.0) continue;
            const double mk = mass[tr.k];
            const double c = tr.cubic * mk + tr.quadratic;
            lb[tr.i] += mj * c;
            lb[tr.j] += mi * c;
            for (const WeakDeposit& d : tables.deposits(tr)) gb[d.node] += mij * (d.cubic * mk + d.quadratic);
        }
    });

    std::vector<double> g_tot(m, 0.0), l_tot(m, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t q = 0; q < m; ++q) {
            g_tot[q] += gain[b * m + q];
            l_tot[q] += loss[b * m + q];
        }
    }

    WeakRates r;
    r.rates.resize(n);
    r.loss_rate.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.rates[i] = (g_tot[i + 1] - mass[i + 1] * l_tot[i + 1]) / grid.weight(i);
        r.loss_rate[i] = l_tot[i + 1];
    }
    r.condensate_rate = g_tot[0] - mass[0] * l_tot[0];
    r.condensate_loss_rate = l_tot[0];
    return r;
}

WeakJacobian collision_jacobian_weak_g(const Distribution& dist, const KernelTables& tables) {
    if (!dist.is_mass()) throw ContractError("collision_jacobian_weak_g: expected mass form g");
    if (dist.size() != tables.grid().size()) throw ContractError("collision_jacobian_weak_g: grid mismatch");
    const EnergyGrid& grid = tables.grid();
    const std::size_t n = dist.size();
    const std::size_t m = n + 1;

    WeakJacobian out;
    out.mass.resize(m);
    out.mass[0] = dist.condensate();
    for (std::size_t i = 0; i < n; ++i) out.mass[i + 1] = grid.weight(i) * dist.value(i);
    const auto& mass = out.mass;

    const auto triples = tables.weak();
    const std::size_t total = triples.size();
    const std::size_t blocks = std::min<std::size_t>(kWeakBlocks, std::max<std::size_t>(total, 1));
    std::vector<double> rate(blocks * m, 0.0);
    std::vector<double> loss(blocks * m, 0.0);
    std::vector<double> jac(blocks * m * m, 0.0);

    parallel_blocks(blocks, [&](std::size_t b) {
        const std::size_t lo = total * b / blocks;
        const std::size_t hi = total * (b + 1) / blocks;
        double* rb = rate.data() + b * m;
        double* lb = loss.data() + b * m;
        double* jb = jac.data() + b * m * m;
        for (std::size_t t = lo; t < hi; ++t) {
            const WeakTriple& tr = triples[t];
            const double mi = mass[tr.i], mj = mass[tr.j], mk = mass[tr.k];
            const double c = tr.cubic * mk + tr.quadratic;
            const double s = mi * mj * c;
            lb[tr.i] += mj * c;
            lb[tr.j] += mi * c;
            rb[tr.i] -= s;
            rb[tr.j] -= s;
            // d s / d(m_i, m_j, m_k)
            const double di = mj * c, dj = mi * c, dk = mi * mj * tr.cubic;
            for (const std::size_t row : {std::size_t{tr.i}, std::size_t{tr.j}}) {
                double* jr = jb + row * m;
                jr[tr.i] -= di;
                jr[tr.j] -= dj;
                jr[tr.k] -= dk;
            }
            const double mij = mi * mj;
            for (const WeakDeposit& d : tables.deposits(tr)) {
                const double gq = d.cubic * mk + d.quadratic;
                rb[d.node] += mij * gq;
                double* jr = jb + static_cast<std::size_t>(d.node) * m;
                jr[tr.i] += mj * gq;
                jr[tr.j] += mi * gq;
                jr[tr.k] += mij * d.cubic;
            }
        }
    });

    out.mass_rates.assign(m, 0.0);
    out.loss_rate.assign(m, 0.0);
    out.jacobian.assign(m * m, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t q = 0; q < m; ++q) {
            out.mass_rates[q] += rate[b * m + q];
            out.loss_rate[q] += loss[b * m + q];
        }
        const double* jb = jac.data() + b * m * m;
        for (std::size_t q = 0; q < m * m; ++q) out.jacobian[q] += jb[q];
    }
    return out;
}

}  // namespace nordheim
