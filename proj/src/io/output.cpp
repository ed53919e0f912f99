#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nordheim/errors.hpp"
#include "nordheim/io.hpp"

namespace nordheim {

using nlohmann::json;

namespace {

json number_or_string(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double number_from(const json& v, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ConfigError("snapshot field " + field + ": expected a number");
}

std::vector<double> numbers_from(const json& j, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_array()) throw ConfigError("snapshot field " + field + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j.at(field)) out.push_back(number_from(v, field));
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json snapshot_to_json(const Distribution& d, double time) {
    const auto& g = d.grid();
    json j;
    j["format"] = "nordheim-snapshot";
    j["version"] = 1;
    j["kind"] = d.is_mass() ? "mass" : "occupation";
    j["time"] = time;
    j["grid"] = {{"edges", std::vector<double>(g.edges().begin(), g.edges().end())},
                 {"nodes", std::vector<double>(g.nodes().begin(), g.nodes().end())},
                 {"weights", std::vector<double>(g.weights().begin(), g.weights().end())},
                 {"cutoff_energy", g.cutoff()},
                 {"clustering_exponent", g.spec().clustering},
                 {"condensate_slot", g.has_condensate_slot()}};
    json vals = json::array();
    for (double v : d.values()) vals.push_back(number_or_string(v));
    j["values"] = vals;
    j["condensate"] = number_or_string(d.condensate());
    return j;
}

Snapshot snapshot_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("snapshot: expected an object");
    if (j.value("format", "") != "nordheim-snapshot") throw ConfigError("snapshot: unknown format");
    if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != 1)
        throw ConfigError("snapshot: unsupported version");
    const std::string kind = j.value("kind", "");
    if (kind != "mass" && kind != "occupation") throw ConfigError("snapshot field kind: expected mass or occupation");
    if (!j.contains("grid") || !j.at("grid").is_object()) throw ConfigError("snapshot field grid: missing");
    const auto& gj = j.at("grid");
    auto edges = numbers_from(gj, "edges");
    const bool slot = gj.value("condensate_slot", true);
    std::shared_ptr<const EnergyGrid> grid;
    try {
        grid = std::make_shared<const EnergyGrid>(grid_from_edges(std::move(edges), slot));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("snapshot field grid.edges: ") + e.what());
    }
    auto values = numbers_from(j, "values");
    if (values.size() != grid->size()) throw ConfigError("snapshot field values: length does not match the grid");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("snapshot field values: entries must be finite and >= 0");
    if (!j.contains("condensate")) throw ConfigError("snapshot field condensate: missing");
    const double n0 = number_from(j.at("condensate"), "condensate");
    if (!j.contains("time")) throw ConfigError("snapshot field time: missing");
    Snapshot s;
    s.time = number_from(j.at("time"), "time");
    if (kind == "mass") {
        if (!(n0 >= 0.0) || !std::isfinite(n0)) throw ConfigError("snapshot field condensate: must be finite and >= 0");
        s.state = Distribution::mass(grid, std::move(values), n0);
    } else {
        if (n0 != 0.0) throw ConfigError("snapshot field condensate: occupation snapshots carry no condensate");
        s.state = Distribution::occupation(grid, std::move(values));
    }
    return s;
}

void write_snapshot(const std::filesystem::path& path, const Distribution& d, double time) {
    write_file(path, snapshot_to_json(d, time).dump(1) + "\n");
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        return snapshot_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::vector<std::string> csv_header(const std::vector<double>& R) {
    std::vector<std::string> h{"t", "dt", "M", "E", "linf", "S", "D", "clamped_fraction", "n0"};
    for (double r : R) h.push_back("mass_below_" + format_double(r));
    for (const char* c : {"blowup_value", "blowup_satisfied", "condensation_value", "condensation_satisfied",
                          "low_mass_margin", "clipped_mass"})
        h.emplace_back(c);
    return h;
}

std::string csv_row(const DiagnosticsRow& r) {
    std::string s;
    auto put = [&](double v) {
        if (!s.empty()) s += ',';
        s += format_double(v);
    };
    for (double v : {r.t, r.dt, r.M, r.E, r.linf, r.S, r.D, r.clamped_fraction, r.n0}) put(v);
    for (double v : r.mass_below) put(v);
    put(r.blowup_value);
    put(r.blowup_satisfied ? 1.0 : 0.0);
    put(r.condensation_value);
    put(r.condensation_satisfied ? 1.0 : 0.0);
    put(r.low_mass_margin);
    put(r.clipped_mass);
    return s;
}

std::string record_to_csv(const RunRecord& rec, const std::vector<double>& R) {
    std::string out;
    const auto h = csv_header(R);
    for (std::size_t i = 0; i < h.size(); ++i) out += (i ? "," : "") + h[i];
    out += '\n';
    for (const auto& row : rec.rows) out += csv_row(row) + '\n';
    return out;
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("missing column " + name);
    const auto c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> f;
        std::string cur;
        for (char ch : l) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        f.push_back(cur);
        return f;
    };
    if (!std::getline(in, line) || line.empty()) throw ConfigError("csv: missing header");
    t.columns = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != t.columns.size()) throw ConfigError("csv line " + std::to_string(lineno) + ": wrong field count");
        std::vector<double> row;
        for (const auto& s : f) {
            if (s == "nan") row.push_back(std::numeric_limits<double>::quiet_NaN());
            else if (s == "inf") row.push_back(std::numeric_limits<double>::infinity());
            else if (s == "-inf") row.push_back(-std::numeric_limits<double>::infinity());
            else {
                try {
                    std::size_t used = 0;
                    row.push_back(std::stod(s, &used));
                    if (used != s.size()) throw std::invalid_argument(s);
                } catch (const std::exception&) {
                    throw ConfigError("csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
                }
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string git_blob_sha1(const std::string& bytes) {
    const std::string head = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("sha1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

json row_to_json(const DiagnosticsRow& r, const std::vector<double>& R) {
    json j;
    j["t"] = number_or_string(r.t);
    j["dt"] = number_or_string(r.dt);
    j["M"] = number_or_string(r.M);
    j["E"] = number_or_string(r.E);
    j["linf"] = number_or_string(r.linf);
    j["S"] = number_or_string(r.S);
    j["D"] = number_or_string(r.D);
    j["clamped_fraction"] = number_or_string(r.clamped_fraction);
    j["n0"] = number_or_string(r.n0);
    json mb = json::object();
    for (std::size_t i = 0; i < R.size() && i < r.mass_below.size(); ++i)
        mb[format_double(R[i])] = number_or_string(r.mass_below[i]);
    j["mass_below"] = mb;
    j["blowup_value"] = number_or_string(r.blowup_value);
    j["blowup_satisfied"] = r.blowup_satisfied;
    j["condensation_value"] = number_or_string(r.condensation_value);
    j["condensation_satisfied"] = r.condensation_satisfied;
    j["low_mass_margin"] = number_or_string(r.low_mass_margin);
    return j;
}

}  // namespace nordheim
