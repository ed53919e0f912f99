#include "nordheim/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "nordheim/errors.hpp"

namespace nordheim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_mass(const Distribution& g, const char* who) {
    if (!g.is_mass()) throw ContractError(std::string(who) + ": expected mass form g");
}

// I(R) = I(lo) + B (R^q - lo^q) on [lo, hi].
struct Piece {
    double lo;
    double hi;
    double I_lo;
    double B;
};

struct Profile {
    double q;          // 1.5 for int f sqrt(e) de, 1 for int g de
    double I0;         // I(0+)
    std::vector<Piece> pieces;

    double at(std::size_t c, double R) const {
        const Piece& p = pieces[c];
        return p.I_lo + p.B * (std::pow(R, q) - std::pow(p.lo, q));
    }
};

Profile occupation_profile(const Distribution& f) {
    const EnergyGrid& grid = f.grid();
    Profile pr{1.5, 0.0, {}};
    double I = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) {
        const double lo = grid.edge(c), hi = grid.edge(c + 1);
        const double B = 2.0 * f.value(c) / 3.0;
        pr.pieces.push_back({lo, hi, I, B});
        I += B * (std::pow(hi, 1.5) - std::pow(lo, 1.5));
    }
    return pr;
}

Profile mass_profile(const Distribution& g) {
    const EnergyGrid& grid = g.grid();
    Profile pr{1.0, g.condensate(), {}};
    double I = g.condensate();
    for (std::size_t c = 0; c < g.size(); ++c) {
        const double lo = grid.edge(c), hi = grid.edge(c + 1);
        pr.pieces.push_back({lo, hi, I, g.value(c)});
        I += g.value(c) * grid.weight(c);
    }
    return pr;
}

// Root of F - level on [a, b] where F - level changes sign; F monotone there.
double bisect(const std::function<double(double)>& F, double level, double a, double b) {
    double fa = F(a) - level;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double fm = F(m) - level;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

CriterionReport sup_min(const Profile& pr, const DetectorParams& p) {
    p.validate();
    const double q = pr.q, th = p.theta_star, nu = p.nu, Ks = p.K_star;
    const double B0 = pr.pieces.empty() ? 0.0 : pr.pieces.front().B;

    // Limits as R, rho -> 0 inside the first cell, where I = I0 + B0 R^q.
    double v0, T0;
    if (pr.I0 > 0.0) {
        v0 = kInf;
        T0 = kInf;
    } else if (B0 == 0.0) {
        v0 = 0.0;
        T0 = 0.0;
    } else {
        v0 = q < 1.5 ? kInf : (q == 1.5 ? B0 / nu : 0.0);
        T0 = q < th ? kInf : (q == th ? B0 / Ks : 0.0);
    }
    CriterionReport best;
    best.value = std::min(v0, T0);
    best.best_rho = 0.0;
    if (std::isinf(best.value)) {
        best.satisfied = true;
        return best;
    }

    double U = v0;  // inf of v over (0, lo]
    for (std::size_t c = 0; c < pr.pieces.size(); ++c) {
        const Piece& pc = pr.pieces[c];
        if (pc.lo >= p.rho0) break;
        const double lo = pc.lo, hi = std::min(pc.hi, p.rho0);
        auto I = [&](double r) { return pr.at(c, r); };
        auto v = [&](double r) { return I(r) / (nu * std::pow(r, 1.5)); };
        auto T = [&](double r) { return I(r) / (Ks * std::pow(r, th)); };
        auto objective = [&](double r) { return std::min({U, v(r), T(r)}); };

        // I = A + B r^q on this cell.
        const double A = pc.I_lo - pc.B * std::pow(lo, q);
        std::vector<double> crit;
        auto add_power_root = [&](double num, double den) {
            // r^q = num / den
            if (den == 0.0) return;
            const double x = num / den;
            if (x > 0.0 && std::isfinite(x)) {
                const double r = std::pow(x, 1.0 / q);
                if (r > lo && r < hi) crit.push_back(r);
            }
        };
        add_power_root(th * A, (q - th) * pc.B);   // T' = 0
        add_power_root(1.5 * A, (q - 1.5) * pc.B); // v' = 0

        std::vector<double> cand{hi};
        if (lo > 0.0) cand.push_back(lo);
        cand.insert(cand.end(), crit.begin(), crit.end());
        const double rx = std::pow(Ks / nu, 1.0 / (1.5 - th));  // v == T wherever I > 0
        if (rx > lo && rx < hi) cand.push_back(rx);

        if (std::isfinite(U)) {
            std::vector<double> knots{lo > 0.0 ? lo : hi * 1e-12, hi};
            knots.insert(knots.end(), crit.begin(), crit.end());
            std::sort(knots.begin(), knots.end());
            for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
                const double a = knots[s], b = knots[s + 1];
                if (!(b > a)) continue;
                for (const auto& F : {std::function<double(double)>(v), std::function<double(double)>(T)}) {
                    const double fa = F(a) - U, fb = F(b) - U;
                    if ((fa < 0.0) != (fb < 0.0)) cand.push_back(bisect(F, U, a, b));
                }
            }
        }

        for (const double r : cand) {
            const double val = objective(r);
            if (val > best.value || (val == best.value && r < best.best_rho)) {
                best.value = val;
                best.best_rho = r;
            }
        }
        U = std::min(U, v(hi));
    }
    best.satisfied = best.value >= 1.0;
    return best;
}

double band_overlap(const EnergyGrid& grid, std::size_t c, double a, double b) {
    const double lo = std::max(grid.edge(c), a), hi = std::min(grid.edge(c + 1), b);
    return hi > lo ? (hi - lo) / grid.weight(c) : 0.0;
}

}  // namespace

DetectorParams DetectorParams::defaults_for(double cutoff) {
    DetectorParams p;
    p.rho0 = 0.1 * cutoff;
    p.rho1 = 0.05 * cutoff;
    return p;
}

void DetectorParams::validate() const {
    if (!(nu > 0.0) || !(K_star > 0.0) || !(theta_star > 0.0) || !(rho0 > 0.0) || !(rho1 > 0.0) || !(K > 0.0)) {
        throw ConfigError("detector parameters must all be positive");
    }
    if (!(theta_star < 1.5)) throw ConfigError("detector parameter theta_star must be below 3/2");
}

double mass_below(const Distribution& g, double R) {
    require_mass(g, "mass_below");
    const EnergyGrid& grid = g.grid();
    if (!(R >= 0.0) || R > grid.cutoff()) throw DomainError("mass_below: R outside [0, L]");
    double m = g.condensate();
    for (std::size_t c = 0; c < g.size(); ++c) {
        const double lo = grid.edge(c), hi = grid.edge(c + 1);
        if (lo >= R) break;
        m += g.value(c) * (std::min(hi, R) - lo);
    }
    return m;
}

LowMassReport low_mass_check(const Distribution& g, double K, double rho1) {
    require_mass(g, "low_mass_check");
    const EnergyGrid& grid = g.grid();
    if (!(K > 0.0)) throw ContractError("low_mass_check: K must be positive");
    if (!(rho1 > 0.0) || rho1 > grid.cutoff()) throw DomainError("low_mass_check: rho1 outside (0, L]");
    LowMassReport r;
    double worst = kInf;
    auto consider = [&](double R) {
        const double v = mass_below(g, R) / std::pow(R, 1.5);
        if (v < worst) {
            worst = v;
            r.worst_R = R;
        }
    };
    for (std::size_t c = 1; c <= g.size() && grid.edge(c) < rho1; ++c) consider(grid.edge(c));
    consider(rho1);
    r.margin = worst - K;
    r.holds = r.margin >= 0.0;
    return r;
}

CriterionReport blowup_criterion(const Distribution& f, const DetectorParams& p) {
    if (!f.is_occupation()) throw ContractError("blowup_criterion: expected occupation form f");
    return sup_min(occupation_profile(f), p);
}

CriterionReport condensation_criterion(const Distribution& g, const DetectorParams& p) {
    require_mass(g, "condensation_criterion");
    return sup_min(mass_profile(g), p);
}

double test_function_moment(const Distribution& g, double R) {
    require_mass(g, "test_function_moment");
    const EnergyGrid& grid = g.grid();
    if (!(R > 0.0) || R > grid.cutoff()) throw DomainError("test_function_moment: R outside (0, L]");
    double m = g.condensate();
    for (std::size_t c = 0; c < g.size(); ++c) {
        const double a = grid.edge(c);
        if (a >= R) break;
        const double b = std::min(grid.edge(c + 1), R);
        m += g.value(c) * ((b - a) - (b * b - a * a) / (2.0 * R));
    }
    return m;
}

EquilibriumDistance equilibrium_distance(const Distribution& d, const EnergyBand& band) {
    const EnergyGrid& grid = d.grid();
    if (!(band.lower >= 0.0) || !(band.upper > band.lower) || band.upper > grid.cutoff()) {
        throw DomainError("equilibrium_distance: band must satisfy 0 <= R < upper <= L");
    }
    const std::size_t n = d.size();
    std::vector<double> g(n), wt(n);
    for (std::size_t c = 0; c < n; ++c) {
        g[c] = d.is_mass() ? d.value(c) : mass_factor(grid.node(c)) * d.value(c);
        wt[c] = band_overlap(grid, c, band.lower, band.upper) * grid.weight(c);
    }
    EquilibriumDistance out;
    for (std::size_t c = 0; c < n; ++c) {
        out.band_mass += wt[c] * g[c];
        out.band_energy += wt[c] * g[c] * grid.node(c);
    }
    const double total = moments(d).M;
    if (!(total > 0.0) || out.band_mass <= 1e-14 * total || !(out.band_energy > 0.0)) {
        out.degenerate = true;
        return out;
    }

    // Band moments of the fitted family, with derivatives in (log beta, alpha).
    struct Fit {
        double M, E, dM_du, dE_du, dM_da, dE_da;
    };
    auto fit_moments = [&](double beta, double alpha) {
        Fit r{0, 0, 0, 0, 0, 0};
        for (std::size_t c = 0; c < n; ++c) {
            if (wt[c] == 0.0) continue;
            const double e = grid.node(c);
            const double f = bose_einstein_density(e, alpha, beta);
            const double h = f * (1.0 + f);  // -d f / d(beta (e + alpha))
            const double mw = wt[c] * mass_factor(e);
            const double dfu = -beta * (e + alpha) * h;
            const double dfa = -beta * h;
            r.M += mw * f;
            r.E += mw * f * e;
            r.dM_du += mw * dfu;
            r.dE_du += mw * dfu * e;
            r.dM_da += mw * dfa;
            r.dE_da += mw * dfa * e;
        }
        return r;
    };
    auto residual = [&](const Fit& F) {
        return std::array<double, 2>{std::log(F.M / out.band_mass), std::log(F.E / out.band_energy)};
    };
    auto norm2 = [](const std::array<double, 2>& r) { return r[0] * r[0] + r[1] * r[1]; };

    const EquilibriumParams start = invert_moments_no_condensate({out.band_mass, out.band_energy});
    double u = std::log(start.beta()), alpha = start.alpha();
    Fit F = fit_moments(std::exp(u), alpha);
    auto r = residual(F);
    for (int it = 0; it < 200 && norm2(r) > 1e-30; ++it) {
        // Gauss-Newton in (u, alpha) on log moments.
        const double j11 = F.dM_du / F.M, j12 = F.dM_da / F.M;
        const double j21 = F.dE_du / F.E, j22 = F.dE_da / F.E;
        double du, da;
        const double det = j11 * j22 - j12 * j21;
        if (det != 0.0) {
            du = -(j22 * r[0] - j12 * r[1]) / det;
            da = -(-j21 * r[0] + j11 * r[1]) / det;
        } else {
            du = 0.0;
            da = 0.0;
        }
        if (alpha + da < 0.0) {
            // alpha on its bound: least squares in u alone.
            da = -alpha;
            const double jj = j11 * j11 + j21 * j21;
            du = jj > 0.0 ? -(j11 * r[0] + j21 * r[1]) / jj : 0.0;
        }
        double step = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const double un = u + step * du, an = std::max(0.0, alpha + step * da);
            const Fit Fn = fit_moments(std::exp(un), an);
            const auto rn = residual(Fn);
            if (std::isfinite(norm2(rn)) && norm2(rn) < norm2(r)) {
                u = un;
                alpha = an;
                F = Fn;
                r = rn;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }

    const double beta = std::exp(u);
    out.params = EquilibriumParams(alpha, beta, 0.0);
    double l1 = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        if (wt[c] == 0.0) continue;
        const double e = grid.node(c);
        l1 += wt[c] * std::fabs(g[c] - mass_factor(e) * bose_einstein_density(e, alpha, beta));
    }
    out.l1_distance = l1 / out.band_mass;
    return out;
}

}  // namespace nordheim
