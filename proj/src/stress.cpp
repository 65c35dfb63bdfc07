#include "contagionx/stress.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "contagionx/errors.hpp"

namespace contagionx {

std::vector<std::uint32_t> CascadeResult::defaulted() const {
    std::vector<std::uint32_t> all;
    for (const auto& round : rounds)
        all.insert(all.end(), round.begin(), round.end());
    std::sort(all.begin(), all.end());
    return all;
}

namespace {

double car_from_cents(const BankRecord& bank, std::int64_t provisions_cents,
                      std::uint32_t bank_index) {
    const std::int64_t den_fifths =
        (bank.interbank_claims.cents() - provisions_cents) + 5 * bank.other_risk.cents();
    if (den_fifths <= 0)
        throw ModelDomainError("degenerate balance sheet mid-cascade for bank '" + bank.id +
                               "' (index " + std::to_string(bank_index) + ")");
    return 5.0 * static_cast<double>(bank.capital.cents() - provisions_cents) /
           static_cast<double>(den_fifths);
}

} // namespace

CascadeResult run_cascade(const ExposureSnapshot& snapshot, std::uint32_t seed,
                          const CascadeParams& params) {
    const std::size_t n = snapshot.size();
    if (seed >= n)
        throw ValidationError("unknown cascade seed index " + std::to_string(seed));
    if (!(params.provision_rate > 0.0) || params.provision_rate > 1.0)
        throw ValidationError("provision rate must be in (0,1]");

    std::vector<std::int64_t> provisions(n);
    for (std::size_t i = 0; i < n; ++i)
        provisions[i] = snapshot.bank(i).provisions.cents();
    std::vector<char> defaulted(n, 0), queued(n, 0);

    CascadeResult result;
    result.seed = seed;
    result.rounds.push_back({seed});
    defaulted[seed] = 1;

    std::vector<std::uint32_t> frontier{seed}, candidates, next;
    while (!frontier.empty()) {
        candidates.clear();
        for (const std::uint32_t b : frontier) {
            for (const std::uint32_t edge_id : snapshot.out_edges(b)) {
                const auto& e = snapshot.edges()[edge_id];
                if (defaulted[e.lender])
                    continue;
                provisions[e.lender] += Money::from_cents(e.weight.cents())
                                            .scaled(params.provision_rate)
                                            .cents();
                if (!queued[e.lender]) {
                    queued[e.lender] = 1;
                    candidates.push_back(e.lender);
                }
            }
        }
        next.clear();
        for (const std::uint32_t c : candidates) {
            queued[c] = 0;
            const double car = car_from_cents(snapshot.bank(c), provisions[c], c);
            if (car_below_threshold(car, params.threshold_for(snapshot.bank(c)))) {
                defaulted[c] = 1;
                next.push_back(c);
            }
        }
        std::sort(next.begin(), next.end());
        if (!next.empty())
            result.rounds.push_back(next);
        frontier = next;
    }

    for (std::size_t r = 1; r < result.rounds.size(); ++r)
        result.cluster_size += result.rounds[r].size();
    result.max_depth = result.rounds.size() - 1;
    result.final_cars.resize(n);
    for (std::uint32_t i = 0; i < n; ++i)
        result.final_cars[i] = car_from_cents(snapshot.bank(i), provisions[i], i);
    const auto motifs = count_triangles_directed(result.defaulted(), snapshot);
    result.motif_t1 = motifs.first;
    result.motif_t2 = motifs.second;
    return result;
}

CascadeResult run_cascade(const ExposureSnapshot& snapshot, std::string_view seed_id,
                          const CascadeParams& params) {
    const auto index = snapshot.index_of(seed_id);
    if (!index)
        throw ValidationError("unknown cascade seed '" + std::string(seed_id) + "'");
    return run_cascade(snapshot, *index, params);
}

bool edge_vulnerability(const ExposureSnapshot& snapshot, std::uint32_t edge_id,
                        const CascadeParams& params) {
    if (edge_id >= snapshot.edges().size())
        throw ValidationError("edge id out of range");
    const auto& e = snapshot.edges()[edge_id];
    const BankRecord provisioned =
        apply_default_provision(snapshot.bank(e.lender), e.weight, params.provision_rate);
    return car_below_threshold(compute_car(provisioned),
                               params.threshold_for(provisioned));
}

ConditionalTables estimate_vulnerability_tables(const ExposureSnapshot& snapshot,
                                                const BowTieLabeling& labeling,
                                                const CascadeParams& params,
                                                std::optional<std::uint32_t> degree_cap) {
    return conditional_tables(
        snapshot, labeling,
        [&](std::uint32_t edge_id) { return edge_vulnerability(snapshot, edge_id, params); },
        degree_cap);
}

std::vector<std::uint32_t> default_seed_set(const ExposureSnapshot& snapshot,
                                            const BowTieLabeling& labeling) {
    std::vector<std::uint32_t> seeds;
    for (std::uint32_t i = 0; i < snapshot.size(); ++i)
        if (labeling.label[i] == BowTieComponent::Out || labeling.label[i] == BowTieComponent::InOut)
            seeds.push_back(i);
    return seeds;
}

namespace {

struct OutDegreeBin {
    std::string label;
    std::uint32_t lo, hi; // inclusive
};

std::vector<OutDegreeBin> out_degree_bins() {
    std::vector<OutDegreeBin> bins;
    for (std::uint32_t d = 0; d <= 10; ++d)
        bins.push_back({std::to_string(d), d, d});
    bins.push_back({"11-20", 11, 20});
    bins.push_back({"21+", 21, 0xffffffffu});
    return bins;
}

} // namespace

SweepReport sweep(const ExposureSnapshot& snapshot, std::vector<std::uint32_t> seeds,
                  const CascadeParams& params, unsigned threads) {
    const BowTieLabeling labeling = bow_tie_decompose(snapshot);
    if (seeds.empty())
        seeds = default_seed_set(snapshot, labeling);
    for (const std::uint32_t s : seeds)
        if (s >= snapshot.size())
            throw ValidationError("sweep seed index out of range: " + std::to_string(s));

    SweepReport report;
    report.outcomes.resize(seeds.size());

    const auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint32_t seed = seeds[i];
            CascadeResult cascade;
            try {
                cascade = run_cascade(snapshot, seed, params);
            } catch (const Error& err) {
                throw ModelDomainError("cascade from seed '" + snapshot.bank(seed).id +
                                       "' failed: " + err.what());
            }
            SeedOutcome& o = report.outcomes[i];
            o.seed = seed;
            o.component = labeling.label[seed];
            o.out_degree = static_cast<std::uint32_t>(snapshot.out_degree(seed));
            o.initial_car = compute_car(snapshot.bank(seed));
            o.cluster_size = cascade.cluster_size;
            o.max_depth = cascade.max_depth;
            o.motif_t1 = cascade.motif_t1;
            o.motif_t2 = cascade.motif_t2;
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1 || seeds.size() < 2 * threads) {
        run_range(0, seeds.size());
    } else {
        // Seeds are independent; workers own disjoint slots of `outcomes`,
        // so the merged result is identical for any thread count.
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const std::size_t chunk = (seeds.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min<std::size_t>(t * chunk, seeds.size());
            const std::size_t end = std::min<std::size_t>(begin + chunk, seeds.size());
            if (begin == end)
                break;
            pool.emplace_back([&, begin, end] {
                try {
                    run_range(begin, end);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            });
        }
        for (auto& worker : pool)
            worker.join();
        if (failure)
            std::rethrow_exception(failure);
    }

    // Aggregations.
    const double n_seeds = static_cast<double>(seeds.size());
    std::map<BowTieComponent, std::pair<std::size_t, std::size_t>> rate_tally; // (cascades, seeds)
    std::map<BowTieComponent, std::pair<double, std::size_t>> size_tally;
    for (const SeedOutcome& o : report.outcomes) {
        report.cluster_size_hist[o.cluster_size] += 1.0;
        auto& rate = rate_tally[o.component];
        rate.first += o.cluster_size >= 1 ? 1 : 0;
        ++rate.second;
        auto& size = size_tally[o.component];
        size.first += static_cast<double>(o.cluster_size);
        ++size.second;
        report.mean_cluster_size += static_cast<double>(o.cluster_size);
        report.total_t1 += o.motif_t1;
        report.total_t2 += o.motif_t2;
    }
    if (!seeds.empty()) {
        for (auto& [size, p] : report.cluster_size_hist)
            p /= n_seeds;
        report.mean_cluster_size /= n_seeds;
    }
    for (const auto& [component, tally] : rate_tally)
        report.cascade_rate[component] =
            static_cast<double>(tally.first) / static_cast<double>(tally.second);
    for (const auto& [component, tally] : size_tally)
        report.mean_cluster_size_by_component[component] =
            tally.first / static_cast<double>(tally.second);

    for (const auto& bin : out_degree_bins()) {
        MeanBin out{bin.label, 0, 0.0};
        for (const SeedOutcome& o : report.outcomes) {
            if (o.out_degree < bin.lo || o.out_degree > bin.hi)
                continue;
            ++out.seeds;
            out.mean_cluster_size += static_cast<double>(o.cluster_size);
        }
        if (out.seeds > 0)
            out.mean_cluster_size /= static_cast<double>(out.seeds);
        report.by_out_degree.push_back(std::move(out));
    }

    const struct {
        const char* label;
        double lo, hi;
    } car_bins[] = {{"<10", -1e30, 0.10},
                    {"10-12", 0.10, 0.12},
                    {"12-14", 0.12, 0.14},
                    {"14-16", 0.14, 0.16},
                    {">=16", 0.16, 1e30}};
    for (const auto& bin : car_bins) {
        MeanBin out{bin.label, 0, 0.0};
        for (const SeedOutcome& o : report.outcomes) {
            if (o.initial_car < bin.lo || o.initial_car >= bin.hi)
                continue;
            ++out.seeds;
            out.mean_cluster_size += static_cast<double>(o.cluster_size);
        }
        if (out.seeds > 0)
            out.mean_cluster_size /= static_cast<double>(out.seeds);
        report.by_car.push_back(std::move(out));
    }

    double car_sum = 0.0;
    for (std::size_t i = 0; i < snapshot.size(); ++i)
        car_sum += compute_car(snapshot.bank(i));
    report.mean_system_car = snapshot.size() ? car_sum / static_cast<double>(snapshot.size()) : 0.0;
    return report;
}

} // namespace contagionx
