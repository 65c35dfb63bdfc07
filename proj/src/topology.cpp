#include "contagionx/topology.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "contagionx/errors.hpp"

namespace contagionx {

std::string_view to_string(BowTieComponent c) {
    switch (c) {
    case BowTieComponent::In:
        return "in";
    case BowTieComponent::Out:
        return "out";
    case BowTieComponent::InOut:
        return "inout";
    case BowTieComponent::Isolated:
        return "isolated";
    }
    return "?";
}

std::size_t BowTieLabeling::count(BowTieComponent c) const {
    return static_cast<std::size_t>(std::count(label.begin(), label.end(), c));
}

namespace {

// Iterative Tarjan over the subgraph induced by `members`. Returns the
// largest non-singleton SCC (ties broken towards the smaller minimum index).
std::vector<std::uint32_t> largest_scc(const ExposureSnapshot& snapshot,
                                       const std::vector<std::uint32_t>& members) {
    const std::uint32_t none = 0xffffffffu;
    const std::size_t n = snapshot.size();
    std::vector<std::uint32_t> order(n, none), low(n, 0);
    std::vector<bool> member(n, false), on_stack(n, false);
    for (std::uint32_t v : members)
        member[v] = true;

    std::vector<std::uint32_t> stack;
    std::vector<std::uint32_t> best;
    std::uint32_t counter = 0;

    struct Frame {
        std::uint32_t node;
        std::size_t next_edge;
    };
    std::vector<Frame> call;

    for (std::uint32_t root : members) {
        if (order[root] != none)
            continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, next] = call.back();
            if (next == 0) {
                order[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            const auto edges = snapshot.out_edges(v);
            bool descended = false;
            while (next < edges.size()) {
                const std::uint32_t w = snapshot.edges()[edges[next]].lender;
                ++next;
                if (!member[w])
                    continue;
                if (order[w] == none) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w])
                    low[v] = std::min(low[v], order[w]);
            }
            if (descended)
                continue;
            if (low[v] == order[v]) {
                std::vector<std::uint32_t> component;
                while (true) {
                    const std::uint32_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component.push_back(w);
                    if (w == v)
                        break;
                }
                if (component.size() > 1) {
                    std::sort(component.begin(), component.end());
                    if (component.size() > best.size() ||
                        (component.size() == best.size() && !best.empty() &&
                         component.front() < best.front()))
                        best = std::move(component);
                }
            }
            const std::uint32_t child = v;
            call.pop_back();
            if (!call.empty())
                low[call.back().node] = std::min(low[call.back().node], low[child]);
        }
    }
    return best;
}

} // namespace

BowTieLabeling bow_tie_decompose(const ExposureSnapshot& snapshot) {
    BowTieLabeling result;
    const std::size_t n = snapshot.size();
    result.label.resize(n);
    std::vector<std::uint32_t> inout;
    for (std::uint32_t i = 0; i < n; ++i) {
        const bool has_out = snapshot.out_degree(i) > 0;
        const bool has_in = snapshot.in_degree(i) > 0;
        if (has_out && has_in) {
            result.label[i] = BowTieComponent::InOut;
            inout.push_back(i);
        } else if (has_out) {
            result.label[i] = BowTieComponent::Out;
        } else if (has_in) {
            result.label[i] = BowTieComponent::In;
        } else {
            result.label[i] = BowTieComponent::Isolated;
        }
    }
    result.scc_core = largest_scc(snapshot, inout);
    for (const auto& e : snapshot.edges())
        result.outstanding_by_pair[{result.label[e.borrower], result.label[e.lender]}] += e.weight;
    return result;
}

DegreeProfile degree_distributions(const ExposureSnapshot& snapshot,
                                   const BowTieLabeling& labeling) {
    const std::size_t n = snapshot.size();
    if (labeling.label.size() != n)
        throw ValidationError("labeling does not match snapshot");
    DegreeProfile profile;
    profile.out_to_inout.assign(n, 0);
    profile.out_to_in.assign(n, 0);
    profile.in_degree.assign(n, 0);
    profile.out_degree.assign(n, 0);
    for (const auto& e : snapshot.edges()) {
        ++profile.out_degree[e.borrower];
        ++profile.in_degree[e.lender];
        if (labeling.label[e.lender] == BowTieComponent::InOut)
            ++profile.out_to_inout[e.borrower];
        else if (labeling.label[e.lender] == BowTieComponent::In)
            ++profile.out_to_in[e.borrower];
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        ++profile.in_degree_hist[profile.in_degree[i]];
        ++profile.out_degree_hist[profile.out_degree[i]];
    }
    return profile;
}

ClusteringStats clustering_and_density(const ExposureSnapshot& snapshot) {
    const std::size_t n = snapshot.size();
    ClusteringStats stats;

    // Unoriented projection restricted to banks with at least one deal.
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (const auto& e : snapshot.edges()) {
        adj[e.borrower].push_back(e.lender);
        adj[e.lender].push_back(e.borrower);
    }
    std::size_t non_isolated = 0;
    for (auto& neighbours : adj) {
        std::sort(neighbours.begin(), neighbours.end());
        neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
        if (!neighbours.empty())
            ++non_isolated;
    }
    stats.non_isolated_nodes = non_isolated;
    // Netting forbids antiparallel pairs, so every directed edge is one
    // undirected link.
    stats.undirected_edges = snapshot.edges().size();
    if (non_isolated >= 2) {
        const double possible = 0.5 * static_cast<double>(non_isolated) *
                                static_cast<double>(non_isolated - 1);
        stats.link_probability = static_cast<double>(stats.undirected_edges) / possible;
    }

    if (non_isolated < 3)
        return stats;

    std::uint64_t triangles = 0;
    std::uint64_t triples = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto& nb = adj[v];
        const std::uint64_t d = nb.size();
        if (d >= 2)
            triples += d * (d - 1) / 2;
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (nb[i] <= v)
                continue;
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                if (nb[j] <= v)
                    continue;
                if (std::binary_search(adj[nb[i]].begin(), adj[nb[i]].end(), nb[j]))
                    ++triangles;
            }
        }
    }
    if (triples > 0)
        stats.clustering = 3.0 * static_cast<double>(triangles) / static_cast<double>(triples);
    return stats;
}

ConditionalTables conditional_tables(const ExposureSnapshot& snapshot,
                                     const BowTieLabeling& labeling,
                                     const std::function<bool(std::uint32_t)>& vulnerable,
                                     std::optional<std::uint32_t> degree_cap) {
    const DegreeProfile profile = degree_distributions(snapshot, labeling);
    const auto capped = [&](std::uint32_t d) {
        return degree_cap ? std::min(d, *degree_cap) : d;
    };
    const auto cell_of = [&](std::uint32_t bank) {
        return DegreeCell{capped(profile.out_to_inout[bank]), capped(profile.out_to_in[bank])};
    };

    ConditionalTables tables;

    std::size_t inout_count = 0;
    for (std::uint32_t i = 0; i < snapshot.size(); ++i) {
        if (labeling.label[i] != BowTieComponent::InOut)
            continue;
        ++inout_count;
        tables.p_io[cell_of(i)] += 1.0;
    }
    for (auto& [cell, p] : tables.p_io)
        p /= static_cast<double>(inout_count);

    // Raw tallies: edge counts and vulnerable-edge counts per conditioning
    // cell and target tuple.
    std::map<DegreeCell, std::map<TargetTuple, std::pair<std::size_t, std::size_t>>> io_io;
    std::map<DegreeCell, std::map<std::uint32_t, std::pair<std::size_t, std::size_t>>> io_in;
    for (std::uint32_t id = 0; id < snapshot.edges().size(); ++id) {
        const auto& e = snapshot.edges()[id];
        if (labeling.label[e.borrower] != BowTieComponent::InOut)
            continue;
        const DegreeCell source = cell_of(e.borrower);
        const bool vul = vulnerable(id);
        if (labeling.label[e.lender] == BowTieComponent::InOut) {
            const TargetTuple target{capped(profile.out_to_inout[e.lender]),
                                     capped(profile.out_to_in[e.lender]),
                                     capped(profile.in_degree[e.lender])};
            auto& slot = io_io[source][target];
            ++slot.first;
            slot.second += vul ? 1 : 0;
        } else if (labeling.label[e.lender] == BowTieComponent::In) {
            const std::uint32_t r = capped(profile.in_degree[e.lender]);
            auto& slot = io_in[source][r];
            ++slot.first;
            slot.second += vul ? 1 : 0;
        }
    }

    for (const auto& [cell, targets] : io_io) {
        std::size_t total = 0;
        for (const auto& [target, counts] : targets)
            total += counts.first;
        tables.io_io_edge_count[cell] = total;
        for (const auto& [target, counts] : targets) {
            tables.p_io_io[cell][target] =
                static_cast<double>(counts.first) / static_cast<double>(total);
            tables.v_io_io[cell][target] =
                static_cast<double>(counts.second) / static_cast<double>(counts.first);
        }
    }
    for (const auto& [cell, targets] : io_in) {
        std::size_t total = 0;
        for (const auto& [r, counts] : targets)
            total += counts.first;
        tables.io_in_edge_count[cell] = total;
        for (const auto& [r, counts] : targets) {
            tables.p_io_in[cell][r] = static_cast<double>(counts.first) / static_cast<double>(total);
            tables.v_io_in[cell][r] =
                static_cast<double>(counts.second) / static_cast<double>(counts.first);
        }
    }
    return tables;
}

std::pair<std::uint64_t, std::uint64_t>
count_triangles_directed(const std::vector<std::uint32_t>& nodes,
                         const ExposureSnapshot& snapshot) {
    std::unordered_set<std::uint32_t> in_set(nodes.begin(), nodes.end());
    for (std::uint32_t v : nodes)
        if (v >= snapshot.size())
            throw ValidationError("triangle census node out of range");

    // Directed adjacency of the induced subgraph, plus the undirected view.
    std::unordered_set<std::uint64_t> arcs;
    std::vector<std::uint32_t> members(in_set.begin(), in_set.end());
    std::sort(members.begin(), members.end());
    std::vector<std::vector<std::uint32_t>> undirected(members.size());
    std::unordered_map<std::uint32_t, std::uint32_t> local;
    for (std::uint32_t i = 0; i < members.size(); ++i)
        local[members[i]] = i;
    for (const auto& e : snapshot.edges()) {
        if (!in_set.count(e.borrower) || !in_set.count(e.lender))
            continue;
        arcs.insert((static_cast<std::uint64_t>(e.borrower) << 32) | e.lender);
        undirected[local[e.borrower]].push_back(local[e.lender]);
        undirected[local[e.lender]].push_back(local[e.borrower]);
    }
    for (auto& nb : undirected)
        std::sort(nb.begin(), nb.end());
    const auto has_arc = [&](std::uint32_t a, std::uint32_t b) {
        return arcs.count((static_cast<std::uint64_t>(a) << 32) | b) != 0;
    };

    std::uint64_t cyclic = 0, feed_forward = 0;
    for (std::uint32_t i = 0; i < members.size(); ++i) {
        const auto& nb = undirected[i];
        for (std::size_t a = 0; a < nb.size(); ++a) {
            if (nb[a] <= i)
                continue;
            for (std::size_t b = a + 1; b < nb.size(); ++b) {
                if (nb[b] <= i || nb[a] == nb[b])
                    continue;
                if (!std::binary_search(undirected[nb[a]].begin(), undirected[nb[a]].end(), nb[b]))
                    continue;
                const std::uint32_t x = members[i], y = members[nb[a]], z = members[nb[b]];
                // Netted graphs have exactly one arc per adjacent pair, so a
                // triangle is cyclic iff every node has in- and out-degree 1
                // within it.
                const bool xy = has_arc(x, y), yz = has_arc(y, z), zx = has_arc(z, x);
                const bool is_cycle = (xy && yz && zx) || (!xy && !yz && !zx);
                if (is_cycle)
                    ++cyclic;
                else
                    ++feed_forward;
            }
        }
    }
    return {cyclic, feed_forward};
}

} // namespace contagionx
