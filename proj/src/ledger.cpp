#include "contagionx/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "contagionx/errors.hpp"

namespace contagionx {

ThresholdClass threshold_class_from_string(std::string_view text) {
    if (text == "deposit_taking")
        return ThresholdClass::DepositTaking;
    if (text == "other")
        return ThresholdClass::Other;
    throw ValidationError("unknown threshold class '" + std::string(text) +
                          "', expected deposit_taking or other");
}

std::string_view to_string(ThresholdClass c) {
    return c == ThresholdClass::DepositTaking ? "deposit_taking" : "other";
}

std::vector<Exposure> net_exposures(const std::vector<BilateralClaim>& claims) {
    // Gross obligation of borrower towards lender, summed over repeats.
    std::map<std::pair<std::string, std::string>, std::int64_t> gross;
    for (const auto& c : claims) {
        if (c.amount.is_negative())
            throw ValidationError("negative claim amount " + c.amount.str() + " between '" +
                                  c.borrower_id + "' and '" + c.lender_id + "'");
        if (c.borrower_id == c.lender_id)
            throw ValidationError("self-claim for bank '" + c.borrower_id + "'");
        gross[{c.borrower_id, c.lender_id}] += c.amount.cents();
    }

    std::vector<Exposure> edges;
    for (const auto& [pair, cents] : gross) {
        const auto& [borrower, lender] = pair;
        if (borrower > lender)
            continue; // handled from the lexicographically smaller side
        std::int64_t reverse = 0;
        if (auto it = gross.find({lender, borrower}); it != gross.end())
            reverse = it->second;
        const std::int64_t net = cents - reverse;
        if (net > 0)
            edges.push_back({borrower, lender, Money::from_cents(net)});
        else if (net < 0)
            edges.push_back({lender, borrower, Money::from_cents(-net)});
    }
    // Pairs that only appear with borrower > lender.
    for (const auto& [pair, cents] : gross) {
        const auto& [borrower, lender] = pair;
        if (borrower < lender || gross.count({lender, borrower}))
            continue;
        if (cents > 0)
            edges.push_back({borrower, lender, Money::from_cents(cents)});
    }
    std::sort(edges.begin(), edges.end(), [](const Exposure& a, const Exposure& b) {
        return std::tie(a.borrower_id, a.lender_id) < std::tie(b.borrower_id, b.lender_id);
    });
    return edges;
}

double compute_car(const BankRecord& bank) {
    // Denominator 0.2 (A_IC - P_IC) + O, kept exact in integer fifths of a
    // cent: (A - P) + 5 O <= 0 iff the true denominator is non-positive.
    const std::int64_t den_fifths = (bank.interbank_claims.cents() - bank.provisions.cents()) +
                                    5 * bank.other_risk.cents();
    if (den_fifths <= 0)
        throw ModelDomainError("degenerate balance sheet for bank '" + bank.id +
                               "': non-positive CAR denominator");
    const double numerator = static_cast<double>(bank.capital.cents() - bank.provisions.cents());
    return 5.0 * numerator / static_cast<double>(den_fifths);
}

BankRecord apply_default_provision(const BankRecord& bank, Money exposure_to_defaulter,
                                   double provision_rate) {
    if (!(provision_rate > 0.0) || provision_rate > 1.0)
        throw ValidationError("provision rate must be in (0,1], got " +
                              std::to_string(provision_rate));
    if (exposure_to_defaulter.is_negative())
        throw ValidationError("negative exposure for bank '" + bank.id + "'");
    BankRecord updated = bank;
    updated.provisions += exposure_to_defaulter.scaled(provision_rate);
    if (updated.provisions > updated.interbank_claims)
        throw ValidationError("provisions " + updated.provisions.str() + " exceed interbank claims " +
                              updated.interbank_claims.str() + " for bank '" + bank.id + "'");
    return updated;
}

bool car_below_threshold(double car, double threshold) {
    return car < threshold - 1e-12 * std::abs(threshold);
}

ExposureSnapshot::ExposureSnapshot(Day date, std::vector<BankRecord> banks,
                                   const std::vector<Exposure>& edges)
    : date_(date), banks_(std::move(banks)) {
    index_.reserve(banks_.size());
    for (std::uint32_t i = 0; i < banks_.size(); ++i) {
        const BankRecord& b = banks_[i];
        if (b.capital.is_negative() || b.other_risk.is_negative())
            throw ValidationError("negative capital or other risk for bank '" + b.id + "'");
        if (b.provisions.is_negative())
            throw ValidationError("negative provisions for bank '" + b.id + "'");
        if (!index_.emplace(b.id, i).second)
            throw ValidationError("duplicate bank id '" + b.id + "'");
    }

    edges_.reserve(edges.size());
    for (const Exposure& e : edges) {
        const auto borrower = index_.find(e.borrower_id);
        const auto lender = index_.find(e.lender_id);
        if (borrower == index_.end() || lender == index_.end())
            throw ValidationError("edge endpoint not in snapshot: '" + e.borrower_id + "' -> '" +
                                  e.lender_id + "'");
        if (!(e.weight > Money{}))
            throw ValidationError("non-positive exposure weight on edge '" + e.borrower_id +
                                  "' -> '" + e.lender_id + "'");
        if (borrower->second == lender->second)
            throw ValidationError("self-edge for bank '" + e.borrower_id + "'");
        edges_.push_back({borrower->second, lender->second, e.weight});
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.borrower, a.lender) < std::tie(b.borrower, b.lender);
    });
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (edges_[i - 1].borrower == edges_[i].borrower && edges_[i - 1].lender == edges_[i].lender)
            throw ValidationError("duplicate edge '" + banks_[edges_[i].borrower].id + "' -> '" +
                                  banks_[edges_[i].lender].id + "'");
    for (const Edge& e : edges_) {
        const auto reverse = std::lower_bound(
            edges_.begin(), edges_.end(), std::pair{e.lender, e.borrower},
            [](const Edge& a, const std::pair<std::uint32_t, std::uint32_t>& key) {
                return std::tie(a.borrower, a.lender) < std::tie(key.first, key.second);
            });
        if (reverse != edges_.end() && reverse->borrower == e.lender && reverse->lender == e.borrower)
            throw ValidationError("antiparallel edge pair between '" + banks_[e.borrower].id +
                                  "' and '" + banks_[e.lender].id + "' (exposures must be netted)");
    }

    // Claims are derived from the graph, never trusted from the input record.
    std::vector<std::int64_t> claims(banks_.size(), 0);
    std::int64_t total = 0;
    for (const Edge& e : edges_) {
        claims[e.lender] += e.weight.cents();
        total += e.weight.cents();
    }
    total_outstanding_ = Money::from_cents(total);
    for (std::uint32_t i = 0; i < banks_.size(); ++i) {
        banks_[i].interbank_claims = Money::from_cents(claims[i]);
        if (banks_[i].provisions > banks_[i].interbank_claims)
            throw ValidationError("provisions exceed interbank claims for bank '" + banks_[i].id +
                                  "'");
    }

    // CSR adjacency over edge ids, in both directions.
    out_offsets_.assign(banks_.size() + 1, 0);
    in_offsets_.assign(banks_.size() + 1, 0);
    for (const Edge& e : edges_) {
        ++out_offsets_[e.borrower + 1];
        ++in_offsets_[e.lender + 1];
    }
    for (std::size_t i = 1; i < out_offsets_.size(); ++i) {
        out_offsets_[i] += out_offsets_[i - 1];
        in_offsets_[i] += in_offsets_[i - 1];
    }
    out_edge_ids_.resize(edges_.size());
    in_edge_ids_.resize(edges_.size());
    std::vector<std::uint32_t> out_cursor(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::uint32_t> in_cursor(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::uint32_t id = 0; id < edges_.size(); ++id) {
        out_edge_ids_[out_cursor[edges_[id].borrower]++] = id;
        in_edge_ids_[in_cursor[edges_[id].lender]++] = id;
    }
}

std::optional<std::uint32_t> ExposureSnapshot::index_of(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    return it == index_.end() ? std::nullopt : std::optional{it->second};
}

std::span<const std::uint32_t> ExposureSnapshot::out_edges(std::size_t bank) const {
    return {out_edge_ids_.data() + out_offsets_[bank],
            out_edge_ids_.data() + out_offsets_[bank + 1]};
}

std::span<const std::uint32_t> ExposureSnapshot::in_edges(std::size_t bank) const {
    return {in_edge_ids_.data() + in_offsets_[bank], in_edge_ids_.data() + in_offsets_[bank + 1]};
}

} // namespace contagionx
