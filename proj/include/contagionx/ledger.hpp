#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "contagionx/calendar.hpp"
#include "contagionx/money.hpp"

namespace contagionx {

/// Regulatory minimum CAR class. Deposit-taking banks must keep CAR above
/// 10%, banks restricted to other activities above 12%.
enum class ThresholdClass : std::uint8_t { DepositTaking, Other };

constexpr double threshold_of(ThresholdClass c) {
    return c == ThresholdClass::DepositTaking ? 0.10 : 0.12;
}

ThresholdClass threshold_class_from_string(std::string_view text);
std::string_view to_string(ThresholdClass c);

/// A bank's balance-sheet state as seen by the simplified CAR formula:
/// capital K, interbank claims A_IC (derived from snapshot in-edges),
/// accumulated loan-loss provisions P_IC and the aggregate other-risk
/// denominator contribution.
struct BankRecord {
    std::string id;
    Money capital;
    Money interbank_claims;
    Money other_risk;
    Money provisions;
    ThresholdClass threshold_class = ThresholdClass::DepositTaking;

    double threshold() const { return threshold_of(threshold_class); }
};

/// One netted directed exposure: the borrower owes the lender `weight`.
/// The edge borrower -> lender is the direction default contagion travels.
struct Exposure {
    std::string borrower_id;
    std::string lender_id;
    Money weight;
};

/// A gross bilateral position prior to netting: `lender_id` lent `amount`
/// to `borrower_id`. Pairs may repeat; amounts are summed before netting.
struct BilateralClaim {
    std::string borrower_id;
    std::string lender_id;
    Money amount;
};

/// Nets gross bilateral positions pairwise: for each unordered pair {i,j}
/// at most one directed edge survives, carrying the absolute difference of
/// the two gross obligations. Exact offsets produce no edge.
std::vector<Exposure> net_exposures(const std::vector<BilateralClaim>& claims);

/// Simplified capital adequacy ratio,
///     CAR = (K - P_IC) / (0.2 (A_IC - P_IC) + O).
/// Throws ModelDomainError when the denominator is not positive.
double compute_car(const BankRecord& bank);

/// Returns a copy of `bank` with provisions increased by
/// rate * exposure_to_defaulter (nearest cent). Throws on resulting
/// provisions exceeding interbank claims.
BankRecord apply_default_provision(const BankRecord& bank, Money exposure_to_defaulter,
                                   double provision_rate);

/// Strict threshold comparison with a relative tolerance of 1e-12:
/// values within tolerance of the threshold count as meeting it.
bool car_below_threshold(double car, double threshold);

/// A dated, validated netted exposure graph together with per-bank records.
/// Banks are addressed by dense index; ids resolve through index_of().
/// Construction recomputes interbank_claims from in-edges and enforces the
/// netting invariants (positive weights, no self-edges, at most one edge per
/// ordered pair, no antiparallel pairs).
class ExposureSnapshot {
public:
    struct Edge {
        std::uint32_t borrower;
        std::uint32_t lender;
        Money weight;
    };

    ExposureSnapshot(Day date, std::vector<BankRecord> banks, const std::vector<Exposure>& edges);

    Day date() const { return date_; }
    std::size_t size() const { return banks_.size(); }
    const std::vector<BankRecord>& banks() const { return banks_; }
    const BankRecord& bank(std::size_t i) const { return banks_[i]; }
    std::optional<std::uint32_t> index_of(std::string_view id) const;

    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const std::uint32_t> out_edges(std::size_t bank) const;
    std::span<const std::uint32_t> in_edges(std::size_t bank) const;
    std::size_t out_degree(std::size_t bank) const { return out_edges(bank).size(); }
    std::size_t in_degree(std::size_t bank) const { return in_edges(bank).size(); }

    Money total_outstanding() const { return total_outstanding_; }

private:
    Day date_;
    std::vector<BankRecord> banks_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<Edge> edges_;
    // CSR-style adjacency over edge ids
    std::vector<std::uint32_t> out_offsets_, out_edge_ids_;
    std::vector<std::uint32_t> in_offsets_, in_edge_ids_;
    Money total_outstanding_;
};

} // namespace contagionx
