#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <regex>

#include "nordheim/errors.hpp"
#include "nordheim/io.hpp"
#include "nordheim/parallel.hpp"
#include "nordheim/runner.hpp"

using namespace nordheim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNonFinite = 3;

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

json criterion_json(const CriterionReport& r) {
    return {{"satisfied", r.satisfied}, {"value", number(r.value)}, {"best_rho", r.best_rho}};
}

int cmd_run(const std::string& config_path, const std::string& output_dir, unsigned threads) {
    RunConfig c = load_config(config_path);
    if (!output_dir.empty()) c.output.directory = output_dir;
    if (threads > 0) c.threads = threads;
    const RunArtifacts a = execute_run(c);
    const auto& rec = a.record;
    std::cerr << "status " << to_string(rec.status) << " t " << format_double(rec.t_final) << " steps "
              << rec.accepted_steps << " rejected " << rec.rejected_steps << "\n";
    if (!rec.rows.empty()) {
        const auto& last = rec.rows.back();
        std::cerr << "final M " << format_double(last.M) << " E " << format_double(last.E) << " n0 "
                  << format_double(last.n0) << "\n";
    }
    std::cerr << "outputs in " << a.directory.string() << "\n";
    return rec.status == RunStatus::ReachedNonFinite ? kExitNonFinite : 0;
}

int cmd_classify(double M, double E, double tol) {
    if (!(M > 0.0) || !(E > 0.0)) throw ConfigError("classify: M and E must be positive");
    if (!(tol >= 0.0)) throw ConfigError("classify: --tol must be >= 0");
    const MomentPair m{M, E};
    const auto cls = classify(m, tol);
    const auto eq = invert_moments(m);
    json j{{"class", std::string(to_string(cls.kind))},
           {"ratio", cls.ratio},
           {"tol", tol},
           {"critical_mass", critical_mass(E)},
           {"equilibrium", {{"alpha", eq.alpha()}, {"beta", eq.beta()}, {"m0", eq.m0()}}}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_equilibrium(double alpha, double beta, double m0, const GridSpec& spec, const std::string& snapshot) {
    EquilibriumParams p(alpha, beta, m0);
    const auto m = moments_of_equilibrium(p);
    json j{{"alpha", alpha}, {"beta", beta}, {"m0", m0}, {"M", m.M}, {"E", m.E},
           {"class", std::string(to_string(classify(m).kind))}};
    if (!snapshot.empty()) {
        auto grid = std::make_shared<const EnergyGrid>(build_grid(spec));
        std::vector<double> g(grid->size());
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = mass_factor(grid->node(i)) * bose_einstein_density(grid->node(i), p);
        const auto d = Distribution::mass(grid, std::move(g), m0);
        write_snapshot(snapshot, d, 0.0);
        const auto dm = moments(d);
        j["grid_moments"] = {{"M", dm.M}, {"E", dm.E}};
        j["snapshot"] = snapshot;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

struct CheckFlags {
    std::optional<double> nu, K_star, theta_star, rho0, rho1, K;
    std::vector<double> R;
    std::optional<double> band_lower, band_upper;
};

int cmd_check(const std::string& path, const CheckFlags& fl) {
    const Snapshot s = read_snapshot(path);
    const auto& grid = s.state.grid();
    DetectorParams p = DetectorParams::defaults_for(grid.cutoff());
    if (fl.nu) p.nu = *fl.nu;
    if (fl.K_star) p.K_star = *fl.K_star;
    if (fl.theta_star) p.theta_star = *fl.theta_star;
    if (fl.rho0) p.rho0 = *fl.rho0;
    if (fl.rho1) p.rho1 = *fl.rho1;
    if (fl.K) p.K = *fl.K;
    p.validate();
    if (p.rho0 > grid.cutoff() || p.rho1 > grid.cutoff()) throw ConfigError("check: rho0 and rho1 must not exceed the cutoff");

    const Distribution f = as_occupation(s.state);
    const Distribution g = s.state.is_mass() ? s.state : to_mass_density(s.state);
    const auto blow = blowup_criterion(f, p);
    const auto cond = condensation_criterion(g, p);
    const auto low = low_mass_check(g, p.K, p.rho1);
    const auto m = moments(s.state);

    json j;
    j["snapshot"] = path;
    j["time"] = s.time;
    j["kind"] = s.state.is_mass() ? "mass" : "occupation";
    j["parameters"] = {{"nu", p.nu}, {"K_star", p.K_star}, {"theta_star", p.theta_star},
                       {"rho0", p.rho0}, {"rho1", p.rho1}, {"K", p.K}};
    j["moments"] = {{"M", m.M}, {"E", m.E}, {"n0", g.condensate()}, {"linf", number(linf_occupation(f))}};
    j["blowup_criterion"] = criterion_json(blow);
    j["condensation_criterion"] = criterion_json(cond);
    j["low_mass"] = {{"holds", low.holds}, {"worst_R", low.worst_R}, {"margin", number(low.margin)}};
    json mb = json::array();
    for (double R : fl.R) {
        if (!(R >= 0.0 && R <= grid.cutoff())) throw ConfigError("check: --R values must lie in [0, cutoff]");
        mb.push_back({{"R", R}, {"mass", mass_below(g, R)}});
    }
    j["mass_below"] = mb;
    const EnergyBand band{fl.band_lower.value_or(0.0), fl.band_upper.value_or(grid.cutoff())};
    if (!(band.lower >= 0.0 && band.lower < band.upper && band.upper <= grid.cutoff()))
        throw ConfigError("check: band must satisfy 0 <= lower < upper <= cutoff");
    const auto dist = equilibrium_distance(s.state, band);
    j["equilibrium_distance"] = {{"band", {band.lower, band.upper}},
                                 {"degenerate", dist.degenerate},
                                 {"l1_distance", number(dist.l1_distance)},
                                 {"alpha", dist.params.alpha()},
                                 {"beta", dist.params.beta()}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int cmd_plot(const std::string& run_dir, const std::string& panels_arg, bool log_log, const std::string& out_arg) {
    const fs::path dir(run_dir);
    if (!fs::is_directory(dir)) throw ConfigError("plot: " + run_dir + " is not a directory");
    std::string csv_name = "timeseries.csv";
    if (fs::exists(dir / "manifest.json")) {
        const auto man = json::parse(read_file(dir / "manifest.json"), nullptr, false);
        if (man.is_object() && man.contains("config"))
            csv_name = man["config"].value("output", json::object()).value("csv_name", csv_name);
    }
    const fs::path out = out_arg.empty() ? dir / "plots" : fs::path(out_arg);
    const auto panels = split_list(panels_arg);
    if (panels.empty()) throw ConfigError("plot: no panels requested");

    std::optional<CsvTable> table;
    auto need_table = [&]() -> const CsvTable& {
        if (!table) {
            if (!fs::exists(dir / csv_name)) throw ConfigError("plot: missing " + (dir / csv_name).string());
            table = parse_csv(read_file(dir / csv_name));
            if (table->rows.empty()) throw ConfigError("plot: empty time series in " + csv_name);
        }
        return *table;
    };

    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& panel : panels) {
        if (panel == "f") {
            std::vector<fs::path> snaps;
            for (const auto& e : fs::directory_iterator(dir)) {
                const auto name = e.path().filename().string();
                if (std::regex_match(name, std::regex("snapshot_[0-9]+\\.json")) || name == "final.json")
                    snaps.push_back(e.path());
            }
            std::sort(snaps.begin(), snaps.end());
            if (snaps.empty()) throw ConfigError("plot: no snapshots in " + run_dir);
            std::vector<PlotSeries> series;
            for (const auto& p : snaps) {
                const auto s = read_snapshot(p);
                const auto f = as_occupation(s.state);
                PlotSeries ps;
                ps.label = "t=" + format_double(s.time);
                ps.x.assign(f.grid().nodes().begin(), f.grid().nodes().end());
                ps.y.assign(f.values().begin(), f.values().end());
                series.push_back(std::move(ps));
            }
            files.emplace_back("f.svg", render_svg({"occupation f(e)", "energy", "f", log_log, log_log}, series));
            continue;
        }
        const auto& t = need_table();
        const auto x = t.column("t");
        std::vector<PlotSeries> series;
        std::string title = panel;
        bool logy = false;
        if (panel == "mass_below") {
            for (const auto& c : t.columns)
                if (c.rfind("mass_below_", 0) == 0) series.push_back({"R=" + c.substr(11), x, t.column(c)});
            if (series.empty()) throw ConfigError("plot: missing column mass_below_<R>");
            title = "mass below R";
        } else if (panel == "linf" || panel == "S" || panel == "D" || panel == "n0" || panel == "M" || panel == "E") {
            series.push_back({panel, x, t.column(panel)});
            logy = panel == "linf" && log_log;
        } else {
            throw ConfigError("plot: unknown panel " + panel + " (expected f, linf, S, D, n0, mass_below, M, E)");
        }
        files.emplace_back(panel + ".svg", render_svg({title, "t", panel, false, logy}, series));
    }
    for (const auto& [name, svg] : files) {
        write_file(out / name, svg);
        std::cout << (out / name).string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isotropic Nordheim equation solver"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    unsigned threads = 0;
    auto* run = app.add_subcommand("run", "run a simulation from a JSON config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--output", output_dir, "output directory (overrides the config)");
    run->add_option("--threads", threads, "worker threads (overrides the config)");

    double M = 0.0, E = 0.0, tol = 1e-4;
    auto* cls = app.add_subcommand("classify", "classify (M, E) against the critical curve");
    cls->add_option("--M", M, "particle density")->required();
    cls->add_option("--E", E, "energy density")->required();
    cls->add_option("--tol", tol, "half width of the critical band in |M / M_c(E) - 1|")->capture_default_str();

    double alpha = 0.0, beta = 1.0, m0 = 0.0;
    GridSpec spec;
    std::string eq_snapshot;
    auto* eq = app.add_subcommand("equilibrium", "moments of a Bose-Einstein state, optionally written as a snapshot");
    eq->add_option("--alpha", alpha, "alpha >= 0");
    eq->add_option("--beta", beta, "beta > 0");
    eq->add_option("--m0", m0, "condensate mass (needs alpha = 0)");
    eq->add_option("--node-count", spec.n_nodes, "grid nodes");
    eq->add_option("--cutoff-energy", spec.cutoff, "grid cutoff");
    eq->add_option("--clustering-exponent", spec.clustering, "grid clustering exponent");
    eq->add_option("--snapshot", eq_snapshot, "write the state on the grid to this path");

    std::string snapshot_path;
    CheckFlags fl;
    auto* chk = app.add_subcommand("check", "evaluate the detectors on a snapshot");
    chk->add_option("snapshot", snapshot_path, "snapshot file")->required();
    chk->add_option("--nu", fl.nu);
    chk->add_option("--K-star", fl.K_star);
    chk->add_option("--theta-star", fl.theta_star);
    chk->add_option("--rho0", fl.rho0);
    chk->add_option("--rho1", fl.rho1);
    chk->add_option("--K", fl.K);
    chk->add_option("--R", fl.R, "energies for mass_below");
    chk->add_option("--band-lower", fl.band_lower);
    chk->add_option("--band-upper", fl.band_upper);

    std::string run_dir, panels = "f,linf,S,D,n0,mass_below", plot_out;
    bool log_log = false;
    auto* plt = app.add_subcommand("plot", "write SVG plots of a run directory");
    plt->add_option("run_dir", run_dir, "run output directory")->required();
    plt->add_option("--panels", panels, "comma separated: f, linf, S, D, n0, mass_below, M, E");
    plt->add_flag("--log-log", log_log, "logarithmic axes for the f panel (and log L-infinity)");
    plt->add_option("--output", plot_out, "directory for the SVG files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) return cmd_run(config_path, output_dir, threads);
        if (*cls) return cmd_classify(M, E, tol);
        if (*eq) return cmd_equilibrium(alpha, beta, m0, spec, eq_snapshot);
        if (*chk) return cmd_check(snapshot_path, fl);
        if (*plt) return cmd_plot(run_dir, panels, log_log, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << " (needs " << e.required_bytes() << " bytes)\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
