#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nordheim/errors.hpp"
#include "nordheim/io.hpp"

namespace nordheim {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        seen_.insert(key);
        if (!j_.contains(key)) return require(key, fallback);
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
        return v.get<double>();
    }

    std::uint64_t integer(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!fallback) throw ConfigError(field(key) + ": missing");
            return *fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError(field(key) + ": expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!fallback) throw ConfigError(field(key) + ": missing");
            return *fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) {
        seen_.insert(key);
        std::vector<double> out;
        if (!j_.contains(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(field(key) + ": missing section");
        return Section(j_.at(key), field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown field");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    double require(const std::string& key, std::optional<double> fallback) const {
        if (!fallback) throw ConfigError(field(key) + ": missing");
        return *fallback;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace

DetectorParams RunConfig::detector_params() const {
    return detectors ? *detectors : DetectorParams::defaults_for(grid.cutoff);
}

DiagnosticsConfig RunConfig::diagnostics_config() const {
    DiagnosticsConfig d;
    d.mass_below_R = mass_below_R;
    d.detectors = detector_params();
    d.record_every = record_every;
    d.snapshot_times = snapshot_times;
    d.log_floor = log_floor;
    return d;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    Section root(j, "");

    {
        auto s = root.sub("grid");
        c.grid.n_nodes = s.integer("node_count", c.grid.n_nodes);
        c.grid.cutoff = s.number("cutoff_energy", c.grid.cutoff);
        c.grid.clustering = s.number("clustering_exponent", c.grid.clustering);
        c.grid.condensate_slot = s.boolean("condensate_slot", c.grid.condensate_slot);
        s.finish();
        check(c.grid.n_nodes >= 8 && c.grid.n_nodes < 65535, s.field("node_count"), "must lie in [8, 65534]");
        check(c.grid.cutoff > 0.0 && std::isfinite(c.grid.cutoff), s.field("cutoff_energy"), "must be positive");
        check(c.grid.clustering > 0.0 && std::isfinite(c.grid.clustering), s.field("clustering_exponent"),
              "must be positive");
    }

    {
        auto s = root.sub("initial_datum");
        auto& d = c.initial;
        d.family = s.text("family");
        if (d.family == "bose-einstein") {
            d.alpha = s.number("alpha");
            d.beta = s.number("beta_inverse_energy");
            d.first_cell_mass = s.number("first_cell_mass", 0.0);
            check(d.alpha >= 0.0, s.field("alpha"), "must be >= 0");
            check(d.beta > 0.0, s.field("beta_inverse_energy"), "must be positive");
            check(d.first_cell_mass >= 0.0, s.field("first_cell_mass"), "must be >= 0");
        } else if (d.family == "gaussian-bump") {
            d.amplitude = s.number("amplitude");
            d.center = s.number("center_energy");
            d.width = s.number("width_energy");
            check(d.amplitude >= 0.0, s.field("amplitude"), "must be >= 0");
            check(d.width > 0.0, s.field("width_energy"), "must be positive");
        } else if (d.family == "power-bump") {
            d.amplitude = s.number("amplitude");
            d.support = s.number("support_energy");
            d.exponent = s.number("exponent", 2.0);
            check(d.amplitude >= 0.0, s.field("amplitude"), "must be >= 0");
            check(d.support > 0.0, s.field("support_energy"), "must be positive");
            check(d.exponent >= 0.0, s.field("exponent"), "must be >= 0");
        } else if (d.family == "constant") {
            d.value = s.number("value");
            check(d.value >= 0.0, s.field("value"), "must be >= 0");
        } else if (d.family == "from-snapshot") {
            d.path = s.text("path");
        } else {
            throw ConfigError(s.field("family") +
                              ": expected bose-einstein, gaussian-bump, power-bump, constant or from-snapshot");
        }
        if (s.has("target_criticality_ratio")) {
            check(d.family == "gaussian-bump" || d.family == "power-bump" || d.family == "constant",
                  s.field("target_criticality_ratio"), "only applies to gaussian-bump, power-bump and constant");
            d.target_criticality_ratio = s.number("target_criticality_ratio");
            check(*d.target_criticality_ratio > 0.0, s.field("target_criticality_ratio"), "must be positive");
        }
        s.finish();
    }

    const std::string scheme = root.text("scheme", "weak-g");
    if (scheme == "weak-g")
        c.scheme = Scheme::WeakG;
    else if (scheme == "strong-f")
        c.scheme = Scheme::StrongF;
    else
        throw ConfigError("scheme: expected weak-g or strong-f");
    const std::string stepper = root.text("weak_g_stepper", "explicit");
    if (stepper == "explicit")
        c.stepper = WeakStepper::Explicit;
    else if (stepper == "linearly-implicit")
        c.stepper = WeakStepper::LinearlyImplicit;
    else
        throw ConfigError("weak_g_stepper: expected explicit or linearly-implicit");

    {
        auto s = root.sub("step_control");
        auto& k = c.control;
        k.dt = s.number("dt_time", k.dt);
        k.safety = s.number("safety", k.safety);
        k.max_relative_change = s.number("max_relative_change", k.max_relative_change);
        k.dt_min = s.number("dt_min_time", k.dt_min);
        k.dt_max = s.number("dt_max_time", k.dt_max);
        k.stop_time = s.number("stop_time");
        k.blowup_linf_threshold = s.number("blowup_linf_threshold", k.blowup_linf_threshold);
        s.finish();
        try {
            k.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("step_control: ") + e.what());
        }
    }

    if (root.has("detectors")) {
        auto s = root.sub("detectors");
        DetectorParams p = DetectorParams::defaults_for(c.grid.cutoff);
        p.nu = s.number("nu", p.nu);
        p.K_star = s.number("K_star", p.K_star);
        p.theta_star = s.number("theta_star", p.theta_star);
        p.rho0 = s.number("rho0_energy", p.rho0);
        p.rho1 = s.number("rho1_energy", p.rho1);
        p.K = s.number("K", p.K);
        s.finish();
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("detectors: ") + e.what());
        }
        check(p.rho0 <= c.grid.cutoff, s.field("rho0_energy"), "must not exceed cutoff_energy");
        check(p.rho1 <= c.grid.cutoff, s.field("rho1_energy"), "must not exceed cutoff_energy");
        c.detectors = p;
    }

    if (root.has("diagnostics")) {
        auto s = root.sub("diagnostics");
        c.mass_below_R = s.numbers("mass_below_energies");
        for (double R : c.mass_below_R)
            check(R >= 0.0 && R <= c.grid.cutoff, s.field("mass_below_energies"), "entries must lie in [0, cutoff_energy]");
        c.record_every = s.integer("record_every", 1);
        check(c.record_every >= 1, s.field("record_every"), "must be >= 1");
        c.snapshot_times = s.numbers("snapshot_times");
        for (double t : c.snapshot_times)
            check(t >= 0.0 && t <= c.control.stop_time, s.field("snapshot_times"), "entries must lie in [0, stop_time]");
        c.log_floor = s.number("log_floor", c.log_floor);
        check(c.log_floor > 0.0, s.field("log_floor"), "must be positive");
        s.finish();
    }

    if (root.has("kernel")) {
        auto s = root.sub("kernel");
        c.kernel.cell_samples = s.integer("cell_samples", c.kernel.cell_samples);
        c.kernel.budget_bytes = s.integer("table_budget_bytes", c.kernel.budget_bytes);
        check(c.kernel.cell_samples >= 1, s.field("cell_samples"), "must be >= 1");
        s.finish();
    }

    c.threads = static_cast<unsigned>(root.integer("threads", 1));
    check(c.threads >= 1, "threads", "must be >= 1");

    if (root.has("output")) {
        auto s = root.sub("output");
        c.output.directory = s.text("directory", c.output.directory);
        c.output.csv_name = s.text("csv_name", c.output.csv_name);
        c.output.manifest_name = s.text("manifest_name", c.output.manifest_name);
        s.finish();
    }

    c.random_seed = root.integer("random_seed", 0);
    root.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": parse error: " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json config_to_json(const RunConfig& c) {
    json j;
    j["grid"] = {{"node_count", c.grid.n_nodes},
                 {"cutoff_energy", c.grid.cutoff},
                 {"clustering_exponent", c.grid.clustering},
                 {"condensate_slot", c.grid.condensate_slot}};
    const auto& d = c.initial;
    json init{{"family", d.family}};
    if (d.family == "bose-einstein") {
        init["alpha"] = d.alpha;
        init["beta_inverse_energy"] = d.beta;
        init["first_cell_mass"] = d.first_cell_mass;
    } else if (d.family == "gaussian-bump") {
        init["amplitude"] = d.amplitude;
        init["center_energy"] = d.center;
        init["width_energy"] = d.width;
    } else if (d.family == "power-bump") {
        init["amplitude"] = d.amplitude;
        init["support_energy"] = d.support;
        init["exponent"] = d.exponent;
    } else if (d.family == "constant") {
        init["value"] = d.value;
    } else {
        init["path"] = d.path;
    }
    if (d.target_criticality_ratio) init["target_criticality_ratio"] = *d.target_criticality_ratio;
    j["initial_datum"] = init;
    j["scheme"] = std::string(to_string(c.scheme));
    j["weak_g_stepper"] = std::string(to_string(c.stepper));
    j["step_control"] = {{"dt_time", c.control.dt},
                         {"safety", c.control.safety},
                         {"max_relative_change", c.control.max_relative_change},
                         {"dt_min_time", c.control.dt_min},
                         {"dt_max_time", c.control.dt_max},
                         {"stop_time", c.control.stop_time},
                         {"blowup_linf_threshold", c.control.blowup_linf_threshold}};
    if (c.detectors) {
        const auto& p = *c.detectors;
        j["detectors"] = {{"nu", p.nu},       {"K_star", p.K_star},        {"theta_star", p.theta_star},
                          {"rho0_energy", p.rho0}, {"rho1_energy", p.rho1}, {"K", p.K}};
    }
    j["diagnostics"] = {{"mass_below_energies", c.mass_below_R},
                        {"record_every", c.record_every},
                        {"snapshot_times", c.snapshot_times},
                        {"log_floor", c.log_floor}};
    j["kernel"] = {{"cell_samples", c.kernel.cell_samples}, {"table_budget_bytes", c.kernel.budget_bytes}};
    j["threads"] = c.threads;
    j["output"] = {{"directory", c.output.directory},
                   {"csv_name", c.output.csv_name},
                   {"manifest_name", c.output.manifest_name}};
    j["random_seed"] = c.random_seed;
    return j;
}

Distribution make_initial(const RunConfig& c, std::shared_ptr<const EnergyGrid> grid) {
    const auto& d = c.initial;
    const auto& gr = *grid;
    std::vector<double> f(gr.size(), 0.0);
    if (d.family == "from-snapshot") {
        Snapshot s = read_snapshot(d.path);
        const auto a = s.state.grid().edges();
        const auto b = gr.edges();
        if (a.size() != b.size()) throw ConfigError("initial_datum.path: snapshot grid differs from the configured grid");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - b[i]) > 1e-12 * gr.cutoff())
                throw ConfigError("initial_datum.path: snapshot grid differs from the configured grid");
        if (s.state.is_mass()) return Distribution::mass(grid, {s.state.values().begin(), s.state.values().end()},
                                                         s.state.condensate());
        return Distribution::occupation(grid, {s.state.values().begin(), s.state.values().end()});
    }
    for (std::size_t i = 0; i < gr.size(); ++i) {
        const double e = gr.node(i);
        if (d.family == "bose-einstein") {
            f[i] = bose_einstein_density(e, d.alpha, d.beta);
        } else if (d.family == "gaussian-bump") {
            const double x = (e - d.center) / d.width;
            f[i] = d.amplitude * std::exp(-0.5 * x * x);
        } else if (d.family == "power-bump") {
            f[i] = e < d.support ? d.amplitude * std::pow(1.0 - e / d.support, d.exponent) : 0.0;
        } else {
            f[i] = d.value;
        }
    }
    if (d.family == "bose-einstein" && d.first_cell_mass > 0.0)
        f[0] += d.first_cell_mass / (gr.weight(0) * mass_factor(gr.node(0)));
    if (d.target_criticality_ratio) {
        const auto m = moments(Distribution::occupation(grid, f));
        if (!(m.M > 0.0 && m.E > 0.0)) throw ConfigError("initial_datum: cannot rescale a datum with zero moments");
        const double ratio = m.M / critical_mass(m.E);
        // M scales like s, M_c(E) like s^{3/5}
        const double s = std::pow(*d.target_criticality_ratio / ratio, 2.5);
        for (double& v : f) v *= s;
    }
    return Distribution::occupation(grid, std::move(f));
}

}  // namespace nordheim
