#pragma once

#include <cstdint>
#include <string>

#include "contagionx/calendar.hpp"
#include "contagionx/ledger.hpp"

namespace contagionx {

struct DegreeLaw {
    enum class Kind : std::uint8_t { Poisson, PowerLaw };
    Kind kind = Kind::Poisson;
    double mean = 2.0;       // Poisson
    double exponent = 2.0;   // PowerLaw: P(k) ~ k^-exponent on 1..cap
    std::uint32_t cap = 30;  // PowerLaw upper cutoff

    static DegreeLaw poisson(double mean) { return {Kind::Poisson, mean, 0.0, 0}; }
    static DegreeLaw powerlaw(double exponent, std::uint32_t cap) {
        return {Kind::PowerLaw, 0.0, exponent, cap};
    }
};

struct ExposureLaw {
    enum class Kind : std::uint8_t { LogNormal, Pareto };
    Kind kind = Kind::LogNormal;
    double mu = 0.0;      // LogNormal: log-scale of the amount in money units
    double sigma = 1.0;
    double alpha = 2.0;   // Pareto
    double minimum = 1.0;

    static ExposureLaw lognormal(double mu, double sigma) {
        return {Kind::LogNormal, mu, sigma, 0.0, 0.0};
    }
    static ExposureLaw pareto(double alpha, double minimum) {
        return {Kind::Pareto, 0.0, 0.0, alpha, minimum};
    }
};

/// Everything a synthetic daily snapshot is drawn from. Identical configs
/// (including seed) produce bit-identical snapshots.
struct GeneratorConfig {
    std::uint32_t n_banks = 500;

    // Component assignment; must sum to 1.
    double frac_in = 0.65;
    double frac_out = 0.15;
    double frac_inout = 0.18;
    double frac_isolated = 0.02;

    // Degree laws for the InOut core and for the pure components. Pure
    // borrowers and lenders sit on the periphery with systematically fewer
    // counterparties, so they draw from their own laws.
    DegreeLaw out_degree_law = DegreeLaw::powerlaw(1.6, 30);
    DegreeLaw in_degree_law = DegreeLaw::poisson(2.2);
    DegreeLaw peripheral_out_degree_law = DegreeLaw::poisson(0.6);
    DegreeLaw peripheral_in_degree_law = DegreeLaw::poisson(1.2);

    /// Target magnitude of the negative degree correlation between edge
    /// endpoints, reached by degree-preserving swaps (0 disables rewiring).
    double disassortativity_strength = 0.3;

    ExposureLaw exposure_law = ExposureLaw::lognormal(1.0, 1.2);
    /// Deal-size multiplier for loans taken by pure borrowers; the paper's
    /// Out periphery carries only a sliver of total outstanding.
    double peripheral_exposure_scale = 0.3;
    /// Deal sizes scale with the borrower's number of lenders as
    /// out_degree^elasticity: bigger borrowers take bigger loans.
    double exposure_out_degree_elasticity = 0.48;

    // Initial CAR per bank: normal(mean, spread), truncated to stay above
    // the bank's regulatory threshold. Capital is backed out from the draw.
    double target_car_mean = 0.147;
    double target_car_spread = 0.02;

    // Other-risk denominator: ratio * interbank claims + lognormal floor.
    double other_risk_ratio = 6.25;
    double other_risk_floor_mu = 5.35;
    double other_risk_floor_sigma = 0.8;

    double deposit_taking_fraction = 0.75;

    Day date = Day::from_days(15000); // 2011-01-28
    std::uint64_t seed = 1;
};

ExposureSnapshot generate(const GeneratorConfig& config);

struct CalibrationTargets {
    double frac_in = 0.65;
    double frac_out = 0.15;
    double frac_inout = 0.18;
    double frac_isolated = 0.02;
    /// Mean number of lenders per borrowing bank (Out and InOut).
    double mean_out_degree = 3.0;
    /// Mean CAR over all banks, as a ratio (0.147 = 14.7%).
    double mean_car = 0.147;
};

/// Tolerances: fractions +-3 points, mean degree +-10%, mean CAR +-1 point.
struct CalibrationTolerances {
    double fraction_points = 0.03;
    double degree_relative = 0.10;
    double car_points = 0.01;
};

/// Bounded search for a config whose generated snapshots hit the targets.
/// Throws ModelDomainError with the best residuals when the budget runs out.
GeneratorConfig calibrate_to_reference(const CalibrationTargets& targets,
                                       const GeneratorConfig& base = {},
                                       const CalibrationTolerances& tolerances = {});

} // namespace contagionx
