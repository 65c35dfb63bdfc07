#include "contagionx/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "contagionx/errors.hpp"

namespace contagionx {

namespace {

std::string cell_key(DegreeCell cell) {
    return std::to_string(cell.k) + "," + std::to_string(cell.l);
}

std::string target_key(TargetTuple target) {
    return std::to_string(target.u) + "," + std::to_string(target.t) + "," +
           std::to_string(target.r);
}

std::string pair_label(BowTieComponent borrower, BowTieComponent lender) {
    return std::string(to_string(borrower)) + "->" + std::string(to_string(lender));
}

} // namespace

json snapshot_to_json(const ExposureSnapshot& snapshot) {
    json banks = json::array();
    for (const BankRecord& bank : snapshot.banks()) {
        banks.push_back({{"id", bank.id},
                         {"capital", bank.capital.str()},
                         {"other_risk", bank.other_risk.str()},
                         {"provisions", bank.provisions.str()},
                         {"threshold_class", std::string(to_string(bank.threshold_class))}});
    }
    json edges = json::array();
    for (const auto& e : snapshot.edges()) {
        edges.push_back({{"borrower", snapshot.bank(e.borrower).id},
                         {"lender", snapshot.bank(e.lender).id},
                         {"weight", e.weight.str()}});
    }
    return {{"format", "contagionx.snapshot/1"},
            {"date", snapshot.date().str()},
            {"banks", banks},
            {"edges", edges}};
}

ExposureSnapshot snapshot_from_json(const json& value) {
    try {
        if (value.value("format", "") != "contagionx.snapshot/1")
            throw ValidationError("not a contagionx.snapshot/1 document");
        const Day date = Day::parse_iso(value.at("date").get<std::string>());
        std::vector<BankRecord> banks;
        for (const json& item : value.at("banks")) {
            BankRecord bank;
            bank.id = item.at("id").get<std::string>();
            bank.capital = Money::parse(item.at("capital").get<std::string>());
            bank.other_risk = Money::parse(item.at("other_risk").get<std::string>());
            bank.provisions = Money::parse(item.value("provisions", "0.00"));
            bank.threshold_class =
                threshold_class_from_string(item.at("threshold_class").get<std::string>());
            banks.push_back(std::move(bank));
        }
        std::vector<Exposure> edges;
        for (const json& item : value.at("edges")) {
            edges.push_back({item.at("borrower").get<std::string>(),
                             item.at("lender").get<std::string>(),
                             Money::parse(item.at("weight").get<std::string>())});
        }
        return ExposureSnapshot(date, std::move(banks), edges);
    } catch (const json::exception& err) {
        throw ValidationError(std::string("malformed snapshot JSON: ") + err.what());
    }
}

ExposureSnapshot load_snapshot(const std::filesystem::path& path) {
    return snapshot_from_json(load_json(path));
}

void write_snapshot_csvs(const ExposureSnapshot& snapshot,
                         const std::filesystem::path& transactions_path,
                         const std::filesystem::path& balance_sheets_path) {
    const std::string date = snapshot.date().str();
    {
        std::ofstream out(transactions_path);
        if (!out)
            throw ValidationError("cannot write " + transactions_path.string());
        out << "date,lender_id,borrower_id,amount,maturity_days\n";
        for (const auto& e : snapshot.edges())
            out << date << ',' << snapshot.bank(e.lender).id << ',' << snapshot.bank(e.borrower).id
                << ',' << e.weight.str() << ",1\n";
    }
    {
        std::ofstream out(balance_sheets_path);
        if (!out)
            throw ValidationError("cannot write " + balance_sheets_path.string());
        out << "date,bank_id,capital,other_risk,threshold_class\n";
        for (const BankRecord& bank : snapshot.banks())
            out << date << ',' << bank.id << ',' << bank.capital.str() << ','
                << bank.other_risk.str() << ',' << to_string(bank.threshold_class) << '\n';
    }
}

json tables_to_json(const ConditionalTables& tables) {
    json p_io = json::object();
    for (const auto& [cell, p] : tables.p_io)
        p_io[cell_key(cell)] = p;
    const auto nested_in = [](const std::map<DegreeCell, std::map<std::uint32_t, double>>& rows) {
        json out = json::object();
        for (const auto& [cell, row] : rows) {
            json inner = json::object();
            for (const auto& [r, value] : row)
                inner[std::to_string(r)] = value;
            out[cell_key(cell)] = std::move(inner);
        }
        return out;
    };
    const auto nested_io = [](const std::map<DegreeCell, std::map<TargetTuple, double>>& rows) {
        json out = json::object();
        for (const auto& [cell, row] : rows) {
            json inner = json::object();
            for (const auto& [target, value] : row)
                inner[target_key(target)] = value;
            out[cell_key(cell)] = std::move(inner);
        }
        return out;
    };
    json counts = {{"io_in", json::object()}, {"io_io", json::object()}};
    for (const auto& [cell, count] : tables.io_in_edge_count)
        counts["io_in"][cell_key(cell)] = count;
    for (const auto& [cell, count] : tables.io_io_edge_count)
        counts["io_io"][cell_key(cell)] = count;
    return {{"p_io", std::move(p_io)},
            {"p_io_in", nested_in(tables.p_io_in)},
            {"p_io_io", nested_io(tables.p_io_io)},
            {"v_io_in", nested_in(tables.v_io_in)},
            {"v_io_io", nested_io(tables.v_io_io)},
            {"edge_counts", std::move(counts)}};
}

json topology_report_to_json(const ExposureSnapshot& snapshot, const BowTieLabeling& labeling,
                             const ConditionalTables& tables) {
    const double n = static_cast<double>(snapshot.size());
    json counts = json::object(), shares = json::object();
    for (const BowTieComponent c : {BowTieComponent::In, BowTieComponent::Out,
                                    BowTieComponent::InOut, BowTieComponent::Isolated}) {
        counts[std::string(to_string(c))] = labeling.count(c);
        shares[std::string(to_string(c))] = n > 0 ? labeling.count(c) / n : 0.0;
    }
    json outstanding = json::object();
    for (const auto& [pair, amount] : labeling.outstanding_by_pair)
        outstanding[pair_label(pair.first, pair.second)] = amount.str();

    // Outstanding carried inside the SCC core.
    std::int64_t core_cents = 0;
    std::vector<char> in_core(snapshot.size(), 0);
    for (const std::uint32_t v : labeling.scc_core)
        in_core[v] = 1;
    for (const auto& e : snapshot.edges())
        if (in_core[e.borrower] && in_core[e.lender])
            core_cents += e.weight.cents();
    const double total = snapshot.total_outstanding().value();

    const ClusteringStats stats = clustering_and_density(snapshot);
    const DegreeProfile profile = degree_distributions(snapshot, labeling);
    const auto histogram = [](const std::map<std::uint32_t, std::size_t>& h) {
        json out = json::array();
        for (const auto& [degree, count] : h)
            out.push_back({{"degree", degree}, {"count", count}});
        return out;
    };

    return {{"format", "contagionx.topology_report/1"},
            {"date", snapshot.date().str()},
            {"banks", snapshot.size()},
            {"edges", snapshot.edges().size()},
            {"total_outstanding", snapshot.total_outstanding().str()},
            {"bow_tie",
             {{"counts", std::move(counts)},
              {"shares", std::move(shares)},
              {"outstanding_by_pair", std::move(outstanding)},
              {"scc_core_size", labeling.scc_core.size()},
              {"scc_core_outstanding_share",
               total > 0 ? (static_cast<double>(core_cents) / 100.0) / total : 0.0}}},
            {"clustering", stats.clustering ? json(*stats.clustering) : json(nullptr)},
            {"link_probability", stats.link_probability},
            {"degree_histograms",
             {{"in", histogram(profile.in_degree_hist)}, {"out", histogram(profile.out_degree_hist)}}},
            {"conditional_tables", tables_to_json(tables)}};
}

json sweep_report_to_json(const SweepReport& report, const ExposureSnapshot& snapshot,
                          const CascadeParams& params) {
    json outcomes = json::array();
    for (const SeedOutcome& o : report.outcomes) {
        outcomes.push_back({{"seed", snapshot.bank(o.seed).id},
                            {"component", std::string(to_string(o.component))},
                            {"out_degree", o.out_degree},
                            {"initial_car", o.initial_car},
                            {"cluster_size", o.cluster_size},
                            {"max_depth", o.max_depth},
                            {"t1", o.motif_t1},
                            {"t2", o.motif_t2}});
    }
    json hist = json::array();
    for (const auto& [size, p] : report.cluster_size_hist)
        hist.push_back({{"size", size}, {"probability", p}});
    json rates = json::object(), sizes = json::object();
    for (const auto& [component, rate] : report.cascade_rate)
        rates[std::string(to_string(component))] = rate;
    for (const auto& [component, mean] : report.mean_cluster_size_by_component)
        sizes[std::string(to_string(component))] = mean;
    const auto bins = [](const std::vector<MeanBin>& list) {
        json out = json::array();
        for (const MeanBin& bin : list)
            out.push_back(
                {{"bin", bin.label}, {"seeds", bin.seeds}, {"mean_cluster_size", bin.mean_cluster_size}});
        return out;
    };
    return {{"format", "contagionx.sweep_report/1"},
            {"date", snapshot.date().str()},
            {"provision_rate", params.provision_rate},
            {"seeds", report.outcomes.size()},
            {"outcomes", std::move(outcomes)},
            {"cluster_size_hist", std::move(hist)},
            {"cascade_rate", std::move(rates)},
            {"mean_cluster_size_by_component", std::move(sizes)},
            {"by_out_degree", bins(report.by_out_degree)},
            {"by_car", bins(report.by_car)},
            {"mean_system_car", report.mean_system_car},
            {"mean_cluster_size", report.mean_cluster_size},
            {"total_t1", report.total_t1},
            {"total_t2", report.total_t2}};
}

json solution_to_json(const AnalyticSolution& correlated, const AnalyticSolution* uncorrelated,
                      double s_montecarlo, std::size_t inout_seeds) {
    const json s_uncorrelated =
        uncorrelated ? json(uncorrelated->mean_cluster_size) : json(nullptr);
    return {{"format", "contagionx.solution/1"},
            {"lambda_max", correlated.lambda_max},
            {"row_sum_max", correlated.row_sum_max},
            {"cells", correlated.system.cells()},
            {"S_correlated", correlated.mean_cluster_size},
            {"S_uncorrelated", s_uncorrelated},
            {"comparison",
             {{"S_analytic", correlated.mean_cluster_size},
              {"S_analytic_uncorrelated", s_uncorrelated},
              {"S_montecarlo", s_montecarlo},
              {"inout_seeds", inout_seeds}}}};
}

namespace {

json degree_law_to_json(const DegreeLaw& law) {
    if (law.kind == DegreeLaw::Kind::Poisson)
        return {{"kind", "poisson"}, {"mean", law.mean}};
    return {{"kind", "powerlaw"}, {"exponent", law.exponent}, {"cap", law.cap}};
}

DegreeLaw degree_law_from_json(const json& value) {
    const std::string kind = value.at("kind").get<std::string>();
    if (kind == "poisson")
        return DegreeLaw::poisson(value.at("mean").get<double>());
    if (kind == "powerlaw")
        return DegreeLaw::powerlaw(value.at("exponent").get<double>(),
                                   value.at("cap").get<std::uint32_t>());
    throw ValidationError("unknown degree law kind '" + kind + "'");
}

} // namespace

json generator_config_to_json(const GeneratorConfig& config) {
    json exposure;
    if (config.exposure_law.kind == ExposureLaw::Kind::LogNormal)
        exposure = {{"kind", "lognormal"}, {"mu", config.exposure_law.mu},
                    {"sigma", config.exposure_law.sigma}};
    else
        exposure = {{"kind", "pareto"}, {"alpha", config.exposure_law.alpha},
                    {"minimum", config.exposure_law.minimum}};
    return {{"format", "contagionx.generator_config/1"},
            {"n_banks", config.n_banks},
            {"component_fractions",
             {{"in", config.frac_in},
              {"out", config.frac_out},
              {"inout", config.frac_inout},
              {"isolated", config.frac_isolated}}},
            {"out_degree_law", degree_law_to_json(config.out_degree_law)},
            {"in_degree_law", degree_law_to_json(config.in_degree_law)},
            {"peripheral_out_degree_law", degree_law_to_json(config.peripheral_out_degree_law)},
            {"peripheral_in_degree_law", degree_law_to_json(config.peripheral_in_degree_law)},
            {"disassortativity_strength", config.disassortativity_strength},
            {"exposure_law", std::move(exposure)},
            {"peripheral_exposure_scale", config.peripheral_exposure_scale},
            {"exposure_out_degree_elasticity", config.exposure_out_degree_elasticity},
            {"target_car_law", {{"mean", config.target_car_mean}, {"spread", config.target_car_spread}}},
            {"other_risk",
             {{"ratio", config.other_risk_ratio},
              {"floor_mu", config.other_risk_floor_mu},
              {"floor_sigma", config.other_risk_floor_sigma}}},
            {"deposit_taking_fraction", config.deposit_taking_fraction},
            {"date", config.date.str()},
            {"seed", config.seed}};
}

GeneratorConfig generator_config_from_json(const json& value) {
    try {
        GeneratorConfig config;
        if (value.contains("n_banks"))
            config.n_banks = value.at("n_banks").get<std::uint32_t>();
        if (value.contains("component_fractions")) {
            const json& f = value.at("component_fractions");
            config.frac_in = f.at("in").get<double>();
            config.frac_out = f.at("out").get<double>();
            config.frac_inout = f.at("inout").get<double>();
            config.frac_isolated = f.at("isolated").get<double>();
        }
        if (value.contains("out_degree_law"))
            config.out_degree_law = degree_law_from_json(value.at("out_degree_law"));
        if (value.contains("in_degree_law"))
            config.in_degree_law = degree_law_from_json(value.at("in_degree_law"));
        if (value.contains("peripheral_out_degree_law"))
            config.peripheral_out_degree_law =
                degree_law_from_json(value.at("peripheral_out_degree_law"));
        if (value.contains("peripheral_in_degree_law"))
            config.peripheral_in_degree_law =
                degree_law_from_json(value.at("peripheral_in_degree_law"));
        if (value.contains("disassortativity_strength"))
            config.disassortativity_strength = value.at("disassortativity_strength").get<double>();
        if (value.contains("exposure_law")) {
            const json& e = value.at("exposure_law");
            const std::string kind = e.at("kind").get<std::string>();
            if (kind == "lognormal")
                config.exposure_law =
                    ExposureLaw::lognormal(e.at("mu").get<double>(), e.at("sigma").get<double>());
            else if (kind == "pareto")
                config.exposure_law =
                    ExposureLaw::pareto(e.at("alpha").get<double>(), e.at("minimum").get<double>());
            else
                throw ValidationError("unknown exposure law kind '" + kind + "'");
        }
        if (value.contains("peripheral_exposure_scale"))
            config.peripheral_exposure_scale = value.at("peripheral_exposure_scale").get<double>();
        if (value.contains("exposure_out_degree_elasticity"))
            config.exposure_out_degree_elasticity =
                value.at("exposure_out_degree_elasticity").get<double>();
        if (value.contains("target_car_law")) {
            config.target_car_mean = value.at("target_car_law").at("mean").get<double>();
            config.target_car_spread = value.at("target_car_law").at("spread").get<double>();
        }
        if (value.contains("other_risk")) {
            const json& o = value.at("other_risk");
            config.other_risk_ratio = o.at("ratio").get<double>();
            config.other_risk_floor_mu = o.at("floor_mu").get<double>();
            config.other_risk_floor_sigma = o.at("floor_sigma").get<double>();
        }
        if (value.contains("deposit_taking_fraction"))
            config.deposit_taking_fraction = value.at("deposit_taking_fraction").get<double>();
        if (value.contains("date"))
            config.date = Day::parse_iso(value.at("date").get<std::string>());
        if (value.contains("seed"))
            config.seed = value.at("seed").get<std::uint64_t>();
        return config;
    } catch (const json::exception& err) {
        throw ValidationError(std::string("malformed generator config: ") + err.what());
    }
}

namespace {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

void write_series(const std::filesystem::path& path, const std::string& manifest_name,
                  const std::string& header, const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write " + path.string());
    out << "# manifest: " << manifest_name << '\n' << header << '\n';
    for (const std::string& row : rows)
        out << row << '\n';
}

} // namespace

void write_histogram_csv(const SweepReport& report, const std::filesystem::path& path,
                         const std::string& manifest_name) {
    std::vector<std::string> rows;
    for (const auto& [size, p] : report.cluster_size_hist)
        rows.push_back(std::to_string(size) + "," + format_double(p));
    write_series(path, manifest_name, "size,probability", rows);
}

void write_out_degree_csv(const SweepReport& report, const std::filesystem::path& path,
                          const std::string& manifest_name) {
    std::vector<std::string> rows;
    for (const MeanBin& bin : report.by_out_degree)
        if (bin.seeds > 0)
            rows.push_back(bin.label + "," + format_double(bin.mean_cluster_size) + "," +
                           std::to_string(bin.seeds));
    write_series(path, manifest_name, "out_degree_bin,mean_cluster_size,seeds", rows);
}

void write_car_bins_csv(const SweepReport& report, const std::filesystem::path& path,
                        const std::string& manifest_name) {
    std::vector<std::string> rows;
    for (const MeanBin& bin : report.by_car)
        if (bin.seeds > 0)
            rows.push_back(bin.label + "," + format_double(bin.mean_cluster_size) + "," +
                           std::to_string(bin.seeds));
    write_series(path, manifest_name, "car_bin,mean_cluster_size,seeds", rows);
}

json manifest_to_json(const RunManifest& manifest) {
    return {{"format", "contagionx.manifest/1"},
            {"command", manifest.command},
            {"tool_version", std::string(kToolVersion)},
            {"inputs", manifest.inputs},
            {"config_hash", manifest.config_hash},
            {"random_seed", manifest.random_seed},
            {"outputs", manifest.outputs},
            {"duration_ms", manifest.duration_ms}};
}

void save_json(const json& value, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write " + path.string());
    out << value.dump(2) << '\n';
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& err) {
        throw ValidationError("invalid JSON in " + path.string() + ": " + err.what());
    }
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

bool matches_type(const json& value, const std::string& type) {
    if (type == "object")
        return value.is_object();
    if (type == "array")
        return value.is_array();
    if (type == "string")
        return value.is_string();
    if (type == "number")
        return value.is_number();
    if (type == "integer")
        return value.is_number_integer() || value.is_number_unsigned();
    if (type == "boolean")
        return value.is_boolean();
    if (type == "null")
        return value.is_null();
    return false;
}

void validate_node(const json& value, const json& schema, const std::string& where,
                   std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const json& type = schema.at("type");
        bool ok = false;
        if (type.is_array()) {
            for (const json& option : type)
                ok = ok || matches_type(value, option.get<std::string>());
        } else {
            ok = matches_type(value, type.get<std::string>());
        }
        if (!ok) {
            errors.push_back(where + ": expected type " + type.dump() + ", got " +
                             std::string(value.type_name()));
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const json& option : schema.at("enum"))
            found = found || option == value;
        if (!found)
            errors.push_back(where + ": value " + value.dump() + " not in enum");
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const json& key : schema.at("required"))
                if (!value.contains(key.get<std::string>()))
                    errors.push_back(where + ": missing required property '" +
                                     key.get<std::string>() + "'");
        const json* properties = schema.contains("properties") ? &schema.at("properties") : nullptr;
        for (const auto& [key, child] : value.items()) {
            if (properties && properties->contains(key)) {
                validate_node(child, properties->at(key), where + "." + key, errors);
            } else if (schema.contains("additionalProperties")) {
                const json& extra = schema.at("additionalProperties");
                if (extra.is_boolean() && !extra.get<bool>())
                    errors.push_back(where + ": unexpected property '" + key + "'");
                else if (extra.is_object())
                    validate_node(child, extra, where + "." + key, errors);
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        std::size_t position = 0;
        for (const json& child : value)
            validate_node(child, schema.at("items"), where + "[" + std::to_string(position++) + "]",
                          errors);
    }
}

} // namespace

std::vector<std::string> validate_against_schema(const json& value, const json& schema) {
    std::vector<std::string> errors;
    validate_node(value, schema, "$", errors);
    return errors;
}

} // namespace contagionx
