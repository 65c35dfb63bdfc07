#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "contagionx/ledger.hpp"

namespace contagionx {

/// Functional role of a bank on a given day, defined through its degrees:
/// In = pure lender (claims only), Out = pure borrower (obligations only),
/// InOut = both, Isolated = no deals.
enum class BowTieComponent : std::uint8_t { In, Out, InOut, Isolated };

std::string_view to_string(BowTieComponent c);

struct BowTieLabeling {
    std::vector<BowTieComponent> label; // per bank index
    /// Largest strongly connected component of the subgraph induced by the
    /// InOut banks; empty when every SCC there is a singleton.
    std::vector<std::uint32_t> scc_core;
    /// Outstanding aggregated by (borrower component, lender component).
    std::map<std::pair<BowTieComponent, BowTieComponent>, Money> outstanding_by_pair;

    std::size_t count(BowTieComponent c) const;
};

BowTieLabeling bow_tie_decompose(const ExposureSnapshot& snapshot);

/// Source degree cell of an InOut bank: k outgoing links into InOut,
/// l outgoing links into In.
struct DegreeCell {
    std::uint32_t k = 0;
    std::uint32_t l = 0;
    auto operator<=>(const DegreeCell&) const = default;
};

/// Degrees of the bank at the receiving end of an InOut -> InOut link:
/// its own (u, t) split plus its total in-degree r.
struct TargetTuple {
    std::uint32_t u = 0;
    std::uint32_t t = 0;
    std::uint32_t r = 0;
    auto operator<=>(const TargetTuple&) const = default;
};

struct DegreeProfile {
    std::vector<std::uint32_t> out_to_inout; // k per bank
    std::vector<std::uint32_t> out_to_in;    // l per bank
    std::vector<std::uint32_t> in_degree;
    std::vector<std::uint32_t> out_degree;
    std::map<std::uint32_t, std::size_t> in_degree_hist;  // over all banks
    std::map<std::uint32_t, std::size_t> out_degree_hist;
};

DegreeProfile degree_distributions(const ExposureSnapshot& snapshot,
                                   const BowTieLabeling& labeling);

struct ClusteringStats {
    /// Global clustering coefficient of the unoriented projection; absent
    /// when fewer than three non-isolated nodes (or no connected triples).
    std::optional<double> clustering;
    /// Undirected link count over the maximum possible among non-isolated
    /// nodes.
    double link_probability = 0.0;
    std::size_t non_isolated_nodes = 0;
    std::size_t undirected_edges = 0;
};

ClusteringStats clustering_and_density(const ExposureSnapshot& snapshot);

/// Empirical conditional degree distributions and link vulnerabilities,
/// keyed by the source cell (k,l). Cells with no observed edges are absent.
struct ConditionalTables {
    std::map<DegreeCell, double> p_io; // distribution of InOut source cells
    std::map<DegreeCell, std::map<std::uint32_t, double>> p_io_in;  // r | (k,l)
    std::map<DegreeCell, std::map<TargetTuple, double>> p_io_io;    // (u,t,r) | (k,l)
    std::map<DegreeCell, std::map<std::uint32_t, double>> v_io_in;  // vulnerable fraction
    std::map<DegreeCell, std::map<TargetTuple, double>> v_io_io;
    // Edge tallies per source cell, needed to marginalize the conditionals.
    std::map<DegreeCell, std::size_t> io_in_edge_count;
    std::map<DegreeCell, std::size_t> io_io_edge_count;
};

/// `vulnerable` decides, per edge id, whether a default of the borrower
/// would propagate over that single link (supplied by the stress module).
/// `degree_cap`, when set, bins every degree component above the cap into
/// the cap value.
ConditionalTables conditional_tables(const ExposureSnapshot& snapshot,
                                     const BowTieLabeling& labeling,
                                     const std::function<bool(std::uint32_t)>& vulnerable,
                                     std::optional<std::uint32_t> degree_cap = std::nullopt);

/// Directed triangle census over the subgraph induced by `nodes`:
/// T1 = cyclic triangles (A->B->C->A), T2 = feed-forward triangles
/// (A->B, B->C, A->C).
std::pair<std::uint64_t, std::uint64_t>
count_triangles_directed(const std::vector<std::uint32_t>& nodes, const ExposureSnapshot& snapshot);

} // namespace contagionx
