#pragma once

// Shared oracles and fixtures. Everything here recomputes results through
// routes independent of the library's engine code paths: set-based fixed
// points, exhaustive triple scans, naive group-bys and textbook formulas.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "contagionx/analytic.hpp"
#include "contagionx/ledger.hpp"
#include "contagionx/stress.hpp"
#include "contagionx/topology.hpp"

namespace contagionx::testing {

// ---- snapshot construction helpers ----

struct BankSpec {
    std::string id;
    double capital = 0.0;
    double other_risk = 0.0;
    ThresholdClass threshold_class = ThresholdClass::DepositTaking;
    double provisions = 0.0;
};

struct EdgeSpec {
    std::string borrower;
    std::string lender;
    double weight;
};

inline ExposureSnapshot make_snapshot(const std::vector<BankSpec>& banks,
                                      const std::vector<EdgeSpec>& edges,
                                      Day date = Day::from_days(15000)) {
    std::vector<BankRecord> records;
    for (const BankSpec& spec : banks) {
        BankRecord record;
        record.id = spec.id;
        record.capital = Money::from_value(spec.capital);
        record.other_risk = Money::from_value(spec.other_risk);
        record.provisions = Money::from_value(spec.provisions);
        record.threshold_class = spec.threshold_class;
        records.push_back(std::move(record));
    }
    std::vector<Exposure> exposures;
    for (const EdgeSpec& spec : edges)
        exposures.push_back({spec.borrower, spec.lender, Money::from_value(spec.weight)});
    return ExposureSnapshot(date, std::move(records), exposures);
}

// ---- cascade oracle: set-based fixed point ----
// Re-derives the defaulted set from scratch on every pass: default every
// bank whose CAR under provisions from the current defaulted set is below
// its threshold, until stable.

inline std::set<std::uint32_t> cascade_fixed_point_oracle(const ExposureSnapshot& snapshot,
                                                          std::uint32_t seed,
                                                          const CascadeParams& params = {}) {
    std::set<std::uint32_t> defaulted{seed};
    while (true) {
        std::set<std::uint32_t> next = defaulted;
        for (std::uint32_t b = 0; b < snapshot.size(); ++b) {
            if (defaulted.count(b))
                continue;
            BankRecord record = snapshot.bank(b);
            for (const auto& e : snapshot.edges())
                if (e.lender == b && defaulted.count(e.borrower))
                    record = apply_default_provision(record, e.weight, params.provision_rate);
            if (car_below_threshold(compute_car(record), params.threshold_for(record)))
                next.insert(b);
        }
        if (next == defaulted)
            return defaulted;
        defaulted = std::move(next);
    }
}

// Sequential one-bank-at-a-time closure in a caller-supplied scan order;
// used by the order-independence property.
inline std::set<std::uint32_t> cascade_sequential_oracle(const ExposureSnapshot& snapshot,
                                                         std::uint32_t seed,
                                                         const std::vector<std::uint32_t>& order,
                                                         const CascadeParams& params = {}) {
    std::set<std::uint32_t> defaulted{seed};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const std::uint32_t b : order) {
            if (defaulted.count(b))
                continue;
            BankRecord record = snapshot.bank(b);
            for (const auto& e : snapshot.edges())
                if (e.lender == b && defaulted.count(e.borrower))
                    record = apply_default_provision(record, e.weight, params.provision_rate);
            if (car_below_threshold(compute_car(record), params.threshold_for(record))) {
                defaulted.insert(b);
                changed = true;
            }
        }
    }
    return defaulted;
}

// ---- directed triangle oracle: exhaustive triple scan ----

inline std::pair<std::uint64_t, std::uint64_t>
triangle_oracle(const std::vector<std::uint32_t>& nodes, const ExposureSnapshot& snapshot) {
    std::set<std::uint32_t> members(nodes.begin(), nodes.end());
    const auto arc = [&](std::uint32_t a, std::uint32_t b) {
        for (const auto& e : snapshot.edges())
            if (e.borrower == a && e.lender == b)
                return true;
        return false;
    };
    std::vector<std::uint32_t> list(members.begin(), members.end());
    std::uint64_t t1 = 0, t2 = 0;
    for (std::size_t i = 0; i < list.size(); ++i)
        for (std::size_t j = i + 1; j < list.size(); ++j)
            for (std::size_t k = j + 1; k < list.size(); ++k) {
                const std::uint32_t a = list[i], b = list[j], c = list[k];
                int arcs = 0;
                arcs += arc(a, b) || arc(b, a);
                arcs += arc(b, c) || arc(c, b);
                arcs += arc(a, c) || arc(c, a);
                if (arcs != 3)
                    continue;
                if ((arc(a, b) && arc(b, c) && arc(c, a)) ||
                    (arc(b, a) && arc(c, b) && arc(a, c)))
                    ++t1;
                else
                    ++t2;
            }
    return {t1, t2};
}

// ---- random test snapshots (independent of the syngen module) ----

struct RandomSnapshotOptions {
    std::uint32_t min_banks = 4;
    std::uint32_t max_banks = 12;
    double edge_probability = 0.35; // per unordered pair; orientation is a coin flip
    double car_low = 0.11;          // all banks start above their threshold
    double car_high = 0.35;
    double weight_low = 0.5;
    double weight_high = 20.0;
    double other_risk_low = 2.0;
    double other_risk_high = 40.0;
};

inline ExposureSnapshot random_snapshot(std::mt19937_64& rng,
                                        const RandomSnapshotOptions& options = {}) {
    std::uniform_int_distribution<std::uint32_t> size_dist(options.min_banks, options.max_banks);
    const std::uint32_t n = size_dist(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> weight(options.weight_low, options.weight_high);
    std::uniform_real_distribution<double> other(options.other_risk_low, options.other_risk_high);

    std::vector<EdgeSpec> edges;
    const auto name = [](std::uint32_t i) { return "B" + std::to_string(i + 1); };
    std::vector<double> claims(n, 0.0);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (unit(rng) >= options.edge_probability)
                continue;
            const double w = weight(rng);
            if (unit(rng) < 0.5) {
                edges.push_back({name(i), name(j), w});
                claims[j] += w;
            } else {
                edges.push_back({name(j), name(i), w});
                claims[i] += w;
            }
        }

    std::vector<BankSpec> banks;
    for (std::uint32_t i = 0; i < n; ++i) {
        BankSpec bank;
        bank.id = name(i);
        bank.other_risk = other(rng);
        bank.threshold_class = unit(rng) < 0.7 ? ThresholdClass::DepositTaking
                                               : ThresholdClass::Other;
        const double threshold = threshold_of(bank.threshold_class);
        std::uniform_real_distribution<double> car(std::max(options.car_low, threshold + 0.01),
                                                   options.car_high);
        bank.capital = car(rng) * (0.2 * claims[i] + bank.other_risk);
        banks.push_back(std::move(bank));
    }
    return make_snapshot(banks, edges);
}

// ---- random analytic table sets ----

struct RandomTableOptions {
    std::size_t cells = 5;
    std::uint32_t min_k = 1;
    std::uint32_t max_k = 4;
    std::uint32_t max_l = 3;
    double v_floor = 0.0; // io_io vulnerabilities drawn from v_floor + v_scale * U
    double v_scale = 0.5;
};

inline AnalyticInputs random_inputs(std::mt19937_64& rng, const RandomTableOptions& options = {}) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> k_dist(options.min_k, options.max_k);
    std::uniform_int_distribution<std::uint32_t> l_dist(0, options.max_l);
    std::uniform_int_distribution<std::uint32_t> r_dist(1, 5);

    std::set<DegreeCell> cells;
    while (cells.size() < options.cells)
        cells.insert({k_dist(rng), l_dist(rng)});
    std::vector<DegreeCell> index(cells.begin(), cells.end());

    AnalyticInputs inputs;
    double total = 0.0;
    for (const DegreeCell cell : index) {
        const double mass = 0.1 + unit(rng);
        inputs.p_io[cell] = mass;
        total += mass;
    }
    for (auto& [cell, p] : inputs.p_io)
        p /= total;

    for (const DegreeCell cell : index) {
        // IO->IO row over 2-4 targets whose (u,t) stay inside the cell set.
        const std::size_t targets = 2 + static_cast<std::size_t>(unit(rng) * 3);
        std::map<TargetTuple, double> row;
        double row_total = 0.0;
        for (std::size_t i = 0; i < targets; ++i) {
            const DegreeCell target = index[static_cast<std::size_t>(unit(rng) * index.size())];
            const TargetTuple tuple{target.k, target.l, r_dist(rng)};
            const double mass = 0.1 + unit(rng);
            row[tuple] += mass;
            row_total += mass;
        }
        for (auto& [tuple, p] : row) {
            p /= row_total;
            inputs.v_io_io[cell][tuple] =
                std::min(1.0, options.v_floor + options.v_scale * unit(rng));
        }
        inputs.p_io_io[cell] = std::move(row);
        inputs.io_io_edge_count[cell] = 1 + static_cast<std::size_t>(unit(rng) * 40);

        if (cell.l > 0) {
            std::map<std::uint32_t, double> in_row;
            double in_total = 0.0;
            const std::size_t in_targets = 1 + static_cast<std::size_t>(unit(rng) * 3);
            for (std::size_t i = 0; i < in_targets; ++i) {
                const double mass = 0.1 + unit(rng);
                in_row[r_dist(rng)] += mass;
                in_total += mass;
            }
            for (auto& [r, p] : in_row) {
                p /= in_total;
                inputs.v_io_in[cell][r] = unit(rng);
            }
            inputs.p_io_in[cell] = std::move(in_row);
            inputs.io_in_edge_count[cell] = 1 + static_cast<std::size_t>(unit(rng) * 40);
        }
    }
    return inputs;
}

/// Rescales v_io_io so the system's maximal row sum lands at `target`
/// (entries clipped at 1; pass target < 1 for subcritical sets).
inline void scale_to_row_sum(AnalyticInputs& inputs, double target) {
    const AnalyticSystem system = build_system(inputs);
    const std::size_t n = system.cells();
    double max_row = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += system.a[i * n + j];
        max_row = std::max(max_row, row);
    }
    if (max_row <= 0.0)
        return;
    const double factor = target / max_row;
    for (auto& [cell, row] : inputs.v_io_io)
        for (auto& [tuple, v] : row)
            v = std::min(1.0, v * factor);
}

// ---- naive scalar-loop recomputation of the linear system ----

struct NaiveSystem {
    std::map<DegreeCell, std::map<DegreeCell, double>> a;
    std::map<DegreeCell, double> gamma;
    std::map<DegreeCell, double> omega;
};

inline NaiveSystem naive_build_system(const AnalyticInputs& inputs) {
    NaiveSystem naive;
    const auto omega_of = [&](DegreeCell cell) {
        double sum = 0.0;
        const auto row = inputs.p_io_in.find(cell);
        if (row == inputs.p_io_in.end())
            return 0.0;
        for (const auto& [r, p] : row->second) {
            double v = 0.0;
            const auto v_row = inputs.v_io_in.find(cell);
            if (v_row != inputs.v_io_in.end())
                if (const auto it = v_row->second.find(r); it != v_row->second.end())
                    v = it->second;
            sum += p * v;
        }
        return sum;
    };
    for (const auto& [cell, row] : inputs.p_io_io) {
        double gamma = 0.0;
        for (const auto& [tuple, p] : row) {
            double v = 0.0;
            const auto v_row = inputs.v_io_io.find(cell);
            if (v_row != inputs.v_io_io.end())
                if (const auto it = v_row->second.find(tuple); it != v_row->second.end())
                    v = it->second;
            naive.a[cell][{tuple.u, tuple.t}] += static_cast<double>(tuple.u) * p * v;
            gamma += p * v;
            gamma += p * v * static_cast<double>(tuple.t) * omega_of({tuple.u, tuple.t});
        }
        naive.gamma[cell] = gamma;
    }
    for (const auto& [cell, p] : inputs.p_io)
        naive.omega[cell] = omega_of(cell);
    return naive;
}

} // namespace contagionx::testing
