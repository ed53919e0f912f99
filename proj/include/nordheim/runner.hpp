#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nordheim/io.hpp"

namespace nordheim {

struct OutputFile {
    std::string name;
    std::size_t bytes = 0;
    std::string sha1;
};

struct RunArtifacts {
    RunRecord record;
    Distribution initial;
    std::filesystem::path directory;
    std::vector<OutputFile> files;  // CSV and snapshots, in write order
    nlohmann::json manifest;
};

/// Builds grid, tables and initial datum from the config, runs, and writes the
/// CSV, snapshot_NNN.json for each configured time, final.json and the
/// manifest into config.output.directory. Sets the worker thread count.
RunArtifacts execute_run(const RunConfig& config);

/// TableSet needed by a config: strong-f runs need only the strong table;
/// weak-g runs need both (the strong table feeds the dissipation diagnostic).
TableSet tables_for(const RunConfig& config);

}  // namespace nordheim
