#include "nordheim/runner.hpp"

#include <cstdio>

#include "nordheim/parallel.hpp"

namespace nordheim {

using nlohmann::json;

TableSet tables_for(const RunConfig& c) {
    return c.scheme == Scheme::StrongF ? TableSet::Strong : TableSet::Both;
}

RunArtifacts execute_run(const RunConfig& c) {
    set_worker_threads(c.threads);
    auto grid = std::make_shared<const EnergyGrid>(build_grid(c.grid));
    const KernelTables tables = build_tables(grid, tables_for(c), c.kernel);

    RunArtifacts out;
    out.initial = make_initial(c, grid);
    RunOptions opts;
    opts.scheme = c.scheme;
    opts.stepper = c.stepper;
    opts.diagnostics = c.diagnostics_config();
    out.record = run(out.initial, tables, c.control, opts);
    const auto& rec = out.record;

    out.directory = c.output.directory;
    std::filesystem::create_directories(out.directory);
    auto emit = [&](const std::string& name, const std::string& bytes) {
        write_file(out.directory / name, bytes);
        out.files.push_back({name, bytes.size(), git_blob_sha1(bytes)});
    };
    emit(c.output.csv_name, record_to_csv(rec, c.mass_below_R));
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%03zu.json", i);
        emit(name, snapshot_to_json(rec.snapshots[i].second, rec.snapshots[i].first).dump(1) + "\n");
    }
    emit("final.json", snapshot_to_json(rec.final_state, rec.t_final).dump(1) + "\n");

    const auto m = moments(out.initial);
    json oracle;
    const auto cls = classify(m);
    oracle["criticality"] = std::string(to_string(cls.kind));
    oracle["criticality_ratio"] = cls.ratio;
    if (m.M > 0.0 && m.E > 0.0) {
        const auto eq = invert_moments(m);
        oracle["alpha"] = eq.alpha();
        oracle["beta"] = eq.beta();
        oracle["m0"] = eq.m0();
    }

    json manifest;
    manifest["format"] = "nordheim-manifest";
    manifest["version"] = 1;
    manifest["config"] = config_to_json(c);
    manifest["status"] = std::string(to_string(rec.status));
    manifest["t_final"] = rec.t_final;
    manifest["t_star"] = rec.t_star >= 0.0 ? json(rec.t_star) : json(nullptr);
    manifest["t_first_condensate"] = rec.t_first_condensate >= 0.0 ? json(rec.t_first_condensate) : json(nullptr);
    manifest["accepted_steps"] = rec.accepted_steps;
    manifest["rejected_steps"] = rec.rejected_steps;
    manifest["csv_rows"] = rec.rows.size();
    manifest["clipped_mass_total"] = rec.clipped_mass_total;
    manifest["initial"] = row_to_json(rec.initial, c.mass_below_R);
    manifest["oracle"] = oracle;
    json files = json::array();
    for (const auto& f : out.files) files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha1", f.sha1}});
    manifest["outputs"] = files;
    out.manifest = manifest;
    write_file(out.directory / c.output.manifest_name, manifest.dump(2) + "\n");
    return out;
}

}  // namespace nordheim
