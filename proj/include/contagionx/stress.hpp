#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "contagionx/ledger.hpp"
#include "contagionx/topology.hpp"

namespace contagionx {

struct CascadeParams {
    double provision_rate = 1.0;
    double deposit_threshold = 0.10;
    double other_threshold = 0.12;

    double threshold_for(const BankRecord& bank) const {
        return bank.threshold_class == ThresholdClass::DepositTaking ? deposit_threshold
                                                                     : other_threshold;
    }
};

/// Outcome of one default cascade. rounds[0] holds the seed; round n+1
/// holds the banks whose CAR fell below threshold once provisions on all
/// exposures to banks defaulted in rounds <= n were accumulated.
struct CascadeResult {
    std::uint32_t seed = 0;
    std::vector<std::vector<std::uint32_t>> rounds;
    std::size_t cluster_size = 0; // defaults excluding the seed
    std::size_t max_depth = 0;    // non-empty rounds after round 0
    std::vector<double> final_cars; // per bank, at final provisions
    std::uint64_t motif_t1 = 0;     // cyclic triangles within the defaulted set
    std::uint64_t motif_t2 = 0;     // feed-forward triangles

    std::vector<std::uint32_t> defaulted() const; // sorted, includes seed
};

CascadeResult run_cascade(const ExposureSnapshot& snapshot, std::uint32_t seed,
                          const CascadeParams& params = {});
CascadeResult run_cascade(const ExposureSnapshot& snapshot, std::string_view seed_id,
                          const CascadeParams& params = {});

/// True iff provisioning the single netted exposure carried by this edge
/// (its borrower defaults, everything else untouched) pushes the lender's
/// CAR below the lender's threshold.
bool edge_vulnerability(const ExposureSnapshot& snapshot, std::uint32_t edge_id,
                        const CascadeParams& params = {});

/// Full conditional P/v tables with vulnerability estimated per edge.
ConditionalTables estimate_vulnerability_tables(const ExposureSnapshot& snapshot,
                                                const BowTieLabeling& labeling,
                                                const CascadeParams& params = {},
                                                std::optional<std::uint32_t> degree_cap = {});

struct SeedOutcome {
    std::uint32_t seed = 0;
    BowTieComponent component = BowTieComponent::Isolated;
    std::uint32_t out_degree = 0;
    double initial_car = 0.0;
    std::size_t cluster_size = 0;
    std::size_t max_depth = 0;
    std::uint64_t motif_t1 = 0;
    std::uint64_t motif_t2 = 0;
};

struct MeanBin {
    std::string label;
    std::size_t seeds = 0;
    double mean_cluster_size = 0.0;
};

struct SweepReport {
    std::vector<SeedOutcome> outcomes;           // in seed order
    std::map<std::size_t, double> cluster_size_hist; // size -> probability
    std::map<BowTieComponent, double> cascade_rate;  // share of seeds with size >= 1
    std::map<BowTieComponent, double> mean_cluster_size_by_component;
    std::vector<MeanBin> by_out_degree; // unit bins to 10, then 11-20, 21+
    std::vector<MeanBin> by_car;        // <10, 10-12, 12-14, 14-16, >=16 percent
    double mean_system_car = 0.0;       // over all banks in the snapshot
    double mean_cluster_size = 0.0;     // over seeds considered
    std::uint64_t total_t1 = 0;         // triangle totals inside default clusters
    std::uint64_t total_t2 = 0;
};

/// One independent cascade per seed on fresh balance-sheet state.
/// An empty `seeds` list defaults to all Out and InOut banks. `threads`
/// bounds worker parallelism; results do not depend on it.
SweepReport sweep(const ExposureSnapshot& snapshot, std::vector<std::uint32_t> seeds,
                  const CascadeParams& params = {}, unsigned threads = 1);

std::vector<std::uint32_t> default_seed_set(const ExposureSnapshot& snapshot,
                                            const BowTieLabeling& labeling);

} // namespace contagionx
