#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "contagionx/errors.hpp"
#include "contagionx/io.hpp"

namespace fs = std::filesystem;
using namespace contagionx;

namespace {

unsigned worker_threads() {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CONTAGIONX_THREADS")) {
        const unsigned long parsed = std::strtoul(env, nullptr, 10);
        if (parsed >= 1)
            threads = std::min<unsigned long>(parsed, 256);
    }
    return threads;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Manifest sits next to the primary output, named after it.
fs::path manifest_path_for(const fs::path& primary_output) {
    fs::path path = primary_output;
    path.replace_filename(primary_output.stem().string() + "_manifest.json");
    return path;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::int64_t elapsed_ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

void finalize_manifest(RunManifest manifest, const Stopwatch& watch, const fs::path& path) {
    manifest.duration_ms = watch.elapsed_ms();
    save_json(manifest_to_json(manifest), path);
}

std::pair<Day, Day> parse_date_range(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw ValidationError("date range must be FIRST:LAST, got '" + text + "'");
    const Day first = Day::parse_iso(text.substr(0, colon));
    const Day last = Day::parse_iso(text.substr(colon + 1));
    if (first > last)
        throw ValidationError("date range starts after it ends: '" + text + "'");
    return {first, last};
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ','))
        if (!item.empty())
            items.push_back(item);
    return items;
}

// ---- subcommand payloads ----

struct IngestArgs {
    std::string transactions, balance_sheets, date_range, exclude, out_dir;
    bool strict = false;
};

int run_ingest(const IngestArgs& args) {
    const Stopwatch watch;
    const auto [first, last] = parse_date_range(args.date_range);
    std::set<std::string> exclusions;
    for (auto& id : split_csv_list(args.exclude))
        exclusions.insert(id);

    CsvDiagnostics tx_diag, bs_diag;
    std::ifstream tx_stream(args.transactions);
    if (!tx_stream)
        throw ValidationError("cannot read " + args.transactions);
    const auto transactions = read_transactions_csv(tx_stream, args.strict, tx_diag);
    std::ifstream bs_stream(args.balance_sheets);
    if (!bs_stream)
        throw ValidationError("cannot read " + args.balance_sheets);
    const auto balance_sheets = read_balance_sheets_csv(bs_stream, args.strict, bs_diag);

    std::vector<std::string> warnings;
    const auto series = snapshot_series(transactions, balance_sheets, first, last, exclusions,
                                        &warnings);

    fs::create_directories(args.out_dir);
    const fs::path manifest_path = fs::path(args.out_dir) / "ingest_manifest.json";
    RunManifest manifest;
    manifest.command = "ingest";
    manifest.inputs = {args.transactions, args.balance_sheets};
    manifest.config_hash =
        fnv1a_hex(read_file(args.transactions) + read_file(args.balance_sheets) + args.date_range +
                  args.exclude);
    for (const ExposureSnapshot& snapshot : series) {
        json doc = snapshot_to_json(snapshot);
        doc["manifest"] = manifest_path.filename().string();
        const fs::path out = fs::path(args.out_dir) / ("snapshot_" + snapshot.date().str() + ".json");
        save_json(doc, out);
        manifest.outputs.push_back(out.filename().string());
    }

    json extra = manifest_to_json(manifest);
    extra["rows_read"] = tx_diag.rows_read + bs_diag.rows_read;
    extra["rows_skipped"] = tx_diag.rows_skipped + bs_diag.rows_skipped;
    json warning_list = json::array();
    for (const auto& w : tx_diag.warnings)
        warning_list.push_back(w);
    for (const auto& w : bs_diag.warnings)
        warning_list.push_back(w);
    for (const auto& w : warnings)
        warning_list.push_back(w);
    extra["warnings"] = std::move(warning_list);
    extra["duration_ms"] = watch.elapsed_ms();
    save_json(extra, manifest_path);

    std::cout << "wrote " << series.size() << " snapshot(s) to " << args.out_dir << " ("
              << tx_diag.rows_skipped + bs_diag.rows_skipped << " row(s) skipped)\n";
    return 0;
}

struct AnalyzeArgs {
    std::string snapshot, out;
    double provision_rate = 1.0;
    std::uint32_t degree_cap = 0;
};

int run_analyze(const AnalyzeArgs& args) {
    const Stopwatch watch;
    const ExposureSnapshot snapshot = load_snapshot(args.snapshot);
    const BowTieLabeling labeling = bow_tie_decompose(snapshot);
    CascadeParams params;
    params.provision_rate = args.provision_rate;
    const std::optional<std::uint32_t> cap =
        args.degree_cap > 0 ? std::optional{args.degree_cap} : std::nullopt;
    const ConditionalTables tables = estimate_vulnerability_tables(snapshot, labeling, params, cap);

    const fs::path out = args.out;
    const fs::path manifest_path = manifest_path_for(out);
    json doc = topology_report_to_json(snapshot, labeling, tables);
    doc["manifest"] = manifest_path.filename().string();
    save_json(doc, out);

    RunManifest manifest;
    manifest.command = "analyze";
    manifest.inputs = {args.snapshot};
    manifest.config_hash = fnv1a_hex(read_file(args.snapshot));
    manifest.outputs = {out.filename().string()};
    finalize_manifest(manifest, watch, manifest_path);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

struct StressArgs {
    std::string snapshot, out, seeds = "all", hist_csv, out_degree_csv, car_csv;
    double provision_rate = 1.0;
};

int run_stress(const StressArgs& args) {
    const Stopwatch watch;
    const ExposureSnapshot snapshot = load_snapshot(args.snapshot);
    const BowTieLabeling labeling = bow_tie_decompose(snapshot);
    CascadeParams params;
    params.provision_rate = args.provision_rate;

    std::vector<std::uint32_t> seeds;
    if (args.seeds == "all") {
        seeds = default_seed_set(snapshot, labeling);
    } else if (args.seeds == "out" || args.seeds == "inout") {
        const BowTieComponent wanted =
            args.seeds == "out" ? BowTieComponent::Out : BowTieComponent::InOut;
        for (std::uint32_t i = 0; i < snapshot.size(); ++i)
            if (labeling.label[i] == wanted)
                seeds.push_back(i);
    } else {
        for (const std::string& id : split_csv_list(args.seeds)) {
            const auto index = snapshot.index_of(id);
            if (!index)
                throw ValidationError("unknown seed bank '" + id + "'");
            seeds.push_back(*index);
        }
        if (seeds.empty())
            throw ValidationError("empty seed list");
    }

    const SweepReport report = sweep(snapshot, seeds, params, worker_threads());

    const fs::path out = args.out;
    const fs::path manifest_path = manifest_path_for(out);
    json doc = sweep_report_to_json(report, snapshot, params);
    doc["manifest"] = manifest_path.filename().string();
    save_json(doc, out);

    RunManifest manifest;
    manifest.command = "stress";
    manifest.inputs = {args.snapshot};
    manifest.config_hash =
        fnv1a_hex(read_file(args.snapshot) + args.seeds + std::to_string(args.provision_rate));
    manifest.outputs = {out.filename().string()};
    if (!args.hist_csv.empty()) {
        write_histogram_csv(report, args.hist_csv, manifest_path.filename().string());
        manifest.outputs.push_back(fs::path(args.hist_csv).filename().string());
    }
    if (!args.out_degree_csv.empty()) {
        write_out_degree_csv(report, args.out_degree_csv, manifest_path.filename().string());
        manifest.outputs.push_back(fs::path(args.out_degree_csv).filename().string());
    }
    if (!args.car_csv.empty()) {
        write_car_bins_csv(report, args.car_csv, manifest_path.filename().string());
        manifest.outputs.push_back(fs::path(args.car_csv).filename().string());
    }
    finalize_manifest(manifest, watch, manifest_path);
    std::cout << "swept " << report.outcomes.size() << " seed(s), mean cluster size "
              << report.mean_cluster_size << '\n';
    return 0;
}

struct SolveArgs {
    std::string snapshot, out;
    double provision_rate = 1.0;
    std::uint32_t degree_cap = 0;
};

int run_solve(const SolveArgs& args) {
    const Stopwatch watch;
    const ExposureSnapshot snapshot = load_snapshot(args.snapshot);
    const BowTieLabeling labeling = bow_tie_decompose(snapshot);
    CascadeParams params;
    params.provision_rate = args.provision_rate;
    const std::optional<std::uint32_t> cap =
        args.degree_cap > 0 ? std::optional{args.degree_cap} : std::nullopt;

    const ConditionalTables tables = estimate_vulnerability_tables(snapshot, labeling, params, cap);
    const AnalyticInputs inputs = AnalyticInputs::from_tables(tables);
    const AnalyticSolution correlated = mean_cluster_size(inputs);
    // Stripping the degree correlations can push an otherwise subcritical
    // system over the percolation threshold; the comparison value is then
    // reported as unbounded rather than failing the whole solve.
    std::optional<AnalyticSolution> uncorrelated;
    try {
        uncorrelated = mean_cluster_size_uncorrelated(inputs);
    } catch (const ModelDomainError&) {
    }

    std::vector<std::uint32_t> seeds;
    for (std::uint32_t i = 0; i < snapshot.size(); ++i)
        if (labeling.label[i] == BowTieComponent::InOut)
            seeds.push_back(i);
    double s_montecarlo = 0.0;
    if (!seeds.empty()) {
        const SweepReport report = sweep(snapshot, seeds, params, worker_threads());
        s_montecarlo = report.mean_cluster_size;
    }

    const fs::path out = args.out;
    const fs::path manifest_path = manifest_path_for(out);
    json doc = solution_to_json(correlated, uncorrelated ? &*uncorrelated : nullptr, s_montecarlo,
                                seeds.size());
    doc["manifest"] = manifest_path.filename().string();
    save_json(doc, out);

    RunManifest manifest;
    manifest.command = "solve";
    manifest.inputs = {args.snapshot};
    manifest.config_hash = fnv1a_hex(read_file(args.snapshot) + std::to_string(args.provision_rate));
    manifest.outputs = {out.filename().string()};
    finalize_manifest(manifest, watch, manifest_path);
    std::cout << "S_analytic=" << correlated.mean_cluster_size
              << " S_uncorrelated=" << uncorrelated.mean_cluster_size
              << " S_montecarlo=" << s_montecarlo << " lambda_max=" << correlated.lambda_max << '\n';
    return 0;
}

struct GenerateArgs {
    std::string config, out_dir;
};

int run_generate(const GenerateArgs& args) {
    const Stopwatch watch;
    const std::string raw = read_file(args.config);
    const GeneratorConfig config = generator_config_from_json(json::parse(raw, nullptr, true));
    const ExposureSnapshot snapshot = generate(config);

    fs::create_directories(args.out_dir);
    const fs::path dir = args.out_dir;
    const fs::path manifest_path = dir / "generate_manifest.json";
    write_snapshot_csvs(snapshot, dir / "transactions.csv", dir / "balance_sheets.csv");
    json doc = snapshot_to_json(snapshot);
    doc["manifest"] = manifest_path.filename().string();
    save_json(doc, dir / "snapshot.json");

    RunManifest manifest;
    manifest.command = "generate";
    manifest.inputs = {args.config};
    manifest.config_hash = fnv1a_hex(raw);
    manifest.random_seed = config.seed;
    manifest.outputs = {"transactions.csv", "balance_sheets.csv", "snapshot.json"};
    finalize_manifest(manifest, watch, manifest_path);
    std::cout << "generated " << snapshot.size() << " banks, " << snapshot.edges().size()
              << " edges in " << args.out_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interbank default-contagion stress testing and analytics"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    CLI::App* cmd_ingest = app.add_subcommand("ingest", "Build daily snapshots from deal CSVs");
    cmd_ingest->add_option("transactions", ingest_args.transactions)->required();
    cmd_ingest->add_option("balance_sheets", ingest_args.balance_sheets)->required();
    cmd_ingest->add_option("--date-range", ingest_args.date_range, "FIRST:LAST (ISO dates)")
        ->required();
    cmd_ingest->add_option("--exclude", ingest_args.exclude, "comma-separated bank ids to drop");
    cmd_ingest->add_option("--out", ingest_args.out_dir)->required();
    cmd_ingest->add_flag("--strict", ingest_args.strict, "abort on the first malformed row");

    AnalyzeArgs analyze_args;
    CLI::App* cmd_analyze = app.add_subcommand("analyze", "Topology report for one snapshot");
    cmd_analyze->add_option("snapshot", analyze_args.snapshot)->required();
    cmd_analyze->add_option("--out", analyze_args.out)->required();
    cmd_analyze->add_option("--provision-rate", analyze_args.provision_rate);
    cmd_analyze->add_option("--degree-cap", analyze_args.degree_cap);

    StressArgs stress_args;
    CLI::App* cmd_stress = app.add_subcommand("stress", "Default-cascade sweep");
    cmd_stress->add_option("snapshot", stress_args.snapshot)->required();
    cmd_stress->add_option("--out", stress_args.out)->required();
    cmd_stress->add_option("--seeds", stress_args.seeds, "all | out | inout | comma-separated ids");
    cmd_stress->add_option("--provision-rate", stress_args.provision_rate);
    cmd_stress->add_option("--hist", stress_args.hist_csv, "cluster-size histogram CSV");
    cmd_stress->add_option("--by-out-degree", stress_args.out_degree_csv);
    cmd_stress->add_option("--by-car", stress_args.car_csv);

    SolveArgs solve_args;
    CLI::App* cmd_solve = app.add_subcommand("solve", "Analytic mean cluster size vs Monte Carlo");
    cmd_solve->add_option("snapshot", solve_args.snapshot)->required();
    cmd_solve->add_option("--out", solve_args.out)->required();
    cmd_solve->add_option("--provision-rate", solve_args.provision_rate);
    cmd_solve->add_option("--degree-cap", solve_args.degree_cap);

    GenerateArgs generate_args;
    CLI::App* cmd_generate = app.add_subcommand("generate", "Synthesize a snapshot from a config");
    cmd_generate->add_option("config", generate_args.config)->required();
    cmd_generate->add_option("--out", generate_args.out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_ingest->parsed())
            return run_ingest(ingest_args);
        if (cmd_analyze->parsed())
            return run_analyze(analyze_args);
        if (cmd_stress->parsed())
            return run_stress(stress_args);
        if (cmd_solve->parsed())
            return run_solve(solve_args);
        if (cmd_generate->parsed())
            return run_generate(generate_args);
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const ModelDomainError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 3;
    } catch (const NumericalError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 4;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
