#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "contagionx/analytic.hpp"
#include "contagionx/ingest.hpp"
#include "contagionx/ledger.hpp"
#include "contagionx/stress.hpp"
#include "contagionx/syngen.hpp"
#include "contagionx/topology.hpp"

namespace contagionx {

inline constexpr std::string_view kToolVersion = "0.1.0";

using json = nlohmann::json;

// ---- snapshot files ----

json snapshot_to_json(const ExposureSnapshot& snapshot);
ExposureSnapshot snapshot_from_json(const json& value);
ExposureSnapshot load_snapshot(const std::filesystem::path& path);

/// Snapshot as ingestable CSVs: one 1-day transaction per edge plus a
/// balance-sheet row per bank, both dated at the snapshot date.
void write_snapshot_csvs(const ExposureSnapshot& snapshot,
                         const std::filesystem::path& transactions_path,
                         const std::filesystem::path& balance_sheets_path);

// ---- reports ----

json tables_to_json(const ConditionalTables& tables);
json topology_report_to_json(const ExposureSnapshot& snapshot, const BowTieLabeling& labeling,
                             const ConditionalTables& tables);
json sweep_report_to_json(const SweepReport& report, const ExposureSnapshot& snapshot,
                          const CascadeParams& params);
/// `uncorrelated` may be null when the decorrelated system is supercritical.
json solution_to_json(const AnalyticSolution& correlated, const AnalyticSolution* uncorrelated,
                      double s_montecarlo, std::size_t inout_seeds);

// ---- generator config ----

json generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const json& value);

// ---- tidy CSV series ----

void write_histogram_csv(const SweepReport& report, const std::filesystem::path& path,
                         const std::string& manifest_name);
void write_out_degree_csv(const SweepReport& report, const std::filesystem::path& path,
                          const std::string& manifest_name);
void write_car_bins_csv(const SweepReport& report, const std::filesystem::path& path,
                        const std::string& manifest_name);

// ---- manifests and files ----

struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::string config_hash;
    std::uint64_t random_seed = 0;
    std::vector<std::string> outputs;
    std::int64_t duration_ms = 0;
};

json manifest_to_json(const RunManifest& manifest);

void save_json(const json& value, const std::filesystem::path& path);
json load_json(const std::filesystem::path& path);

std::string fnv1a_hex(std::string_view bytes);

/// Minimal JSON Schema checker covering the subset the shipped schemas use:
/// type, properties, required, items, enum, additionalProperties (boolean).
/// Returns human-readable violations; empty means valid.
std::vector<std::string> validate_against_schema(const json& value, const json& schema);

} // namespace contagionx
