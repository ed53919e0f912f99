#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nordheim/collision.hpp"
#include "nordheim/diagnostics.hpp"
#include "nordheim/grid.hpp"
#include "nordheim/integrator.hpp"

namespace nordheim {

struct InitialDatumSpec {
    std::string family = "gaussian-bump";
    // bose-einstein
    double alpha = 0.0;
    double beta = 1.0;
    double first_cell_mass = 0.0;
    // gaussian-bump, power-bump
    double amplitude = 1.0;
    double center = 1.0;
    double width = 0.5;
    double support = 1.0;
    double exponent = 2.0;
    // constant
    double value = 0.0;
    // from-snapshot
    std::string path;
    // rescales the datum so that M / M_c(E) hits this value (linear families only)
    std::optional<double> target_criticality_ratio;

    bool operator==(const InitialDatumSpec&) const = default;
};

struct OutputSpec {
    std::string directory = "run_output";
    std::string csv_name = "timeseries.csv";
    std::string manifest_name = "manifest.json";

    bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
    GridSpec grid;
    InitialDatumSpec initial;
    Scheme scheme = Scheme::WeakG;
    WeakStepper stepper = WeakStepper::Explicit;
    StepControl control;
    std::optional<DetectorParams> detectors;  // defaults_for(cutoff) when absent
    std::vector<double> mass_below_R;
    std::size_t record_every = 1;
    std::vector<double> snapshot_times;
    double log_floor = kDefaultLogFloor;
    TableOptions kernel;
    unsigned threads = 1;
    OutputSpec output;
    std::uint64_t random_seed = 0;

    DetectorParams detector_params() const;
    DiagnosticsConfig diagnostics_config() const;
};

/// Throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
/// Parse errors are reported with line and column.
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& c);

Distribution make_initial(const RunConfig& c, std::shared_ptr<const EnergyGrid> grid);

struct Snapshot {
    double time = 0.0;
    Distribution state;
};

nlohmann::json snapshot_to_json(const Distribution& d, double time);
Snapshot snapshot_from_json(const nlohmann::json& j);
void write_snapshot(const std::filesystem::path& path, const Distribution& d, double time);
/// Throws ConfigError for unreadable or ill-formed files.
Snapshot read_snapshot(const std::filesystem::path& path);

std::vector<std::string> csv_header(const std::vector<double>& mass_below_R);
std::string csv_row(const DiagnosticsRow& row);
/// One row per recorded accepted step; the initial state goes to the manifest.
std::string record_to_csv(const RunRecord& rec, const std::vector<double>& mass_below_R);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Throws ConfigError naming the column if absent.
    std::vector<double> column(const std::string& name) const;
};
CsvTable parse_csv(const std::string& text);

std::string format_double(double v);

/// SHA-1 of "blob <size>\0" followed by the bytes, as lowercase hex.
std::string git_blob_sha1(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

nlohmann::json row_to_json(const DiagnosticsRow& row, const std::vector<double>& mass_below_R);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

/// Static SVG line plot. Points that are non-finite, or nonpositive on a log
/// axis, are skipped. Byte-identical for identical input.
std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace nordheim
