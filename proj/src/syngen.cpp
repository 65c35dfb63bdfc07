#include "contagionx/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "contagionx/errors.hpp"
#include "contagionx/topology.hpp"

namespace contagionx {

namespace {

using Rng = std::mt19937_64;

void validate_config(const GeneratorConfig& config) {
    if (config.n_banks == 0)
        throw ValidationError("generator: n_banks must be positive");
    const double fraction_sum =
        config.frac_in + config.frac_out + config.frac_inout + config.frac_isolated;
    if (config.frac_in < 0 || config.frac_out < 0 || config.frac_inout < 0 ||
        config.frac_isolated < 0 || std::abs(fraction_sum - 1.0) > 1e-9)
        throw ValidationError("generator: component fractions must be nonnegative and sum to 1");
    for (const DegreeLaw* law :
         {&config.out_degree_law, &config.in_degree_law, &config.peripheral_out_degree_law,
          &config.peripheral_in_degree_law}) {
        if (law->kind == DegreeLaw::Kind::Poisson && !(law->mean > 0))
            throw ValidationError("generator: poisson degree mean must be positive");
        if (law->kind == DegreeLaw::Kind::PowerLaw &&
            (law->cap < 1 || law->cap >= config.n_banks || !(law->exponent > 0)))
            throw ValidationError("generator: power-law cap must be in [1, n_banks)");
    }
    if (config.disassortativity_strength < 0 || config.disassortativity_strength > 1)
        throw ValidationError("generator: disassortativity strength must be in [0,1]");
    if (!(config.target_car_mean > 0) || config.target_car_spread < 0)
        throw ValidationError("generator: invalid target CAR law");
    if (config.other_risk_ratio < 0)
        throw ValidationError("generator: other_risk_ratio must be nonnegative");
    if (!(config.peripheral_exposure_scale > 0) || config.exposure_out_degree_elasticity < 0)
        throw ValidationError("generator: invalid exposure scaling");
    if (config.deposit_taking_fraction < 0 || config.deposit_taking_fraction > 1)
        throw ValidationError("generator: deposit_taking_fraction must be in [0,1]");
}

struct DegreeSampler {
    const DegreeLaw& law;
    std::vector<double> cdf; // PowerLaw only

    explicit DegreeSampler(const DegreeLaw& law) : law(law) {
        if (law.kind == DegreeLaw::Kind::PowerLaw) {
            cdf.resize(law.cap);
            double total = 0.0;
            for (std::uint32_t k = 1; k <= law.cap; ++k) {
                total += std::pow(static_cast<double>(k), -law.exponent);
                cdf[k - 1] = total;
            }
            for (double& c : cdf)
                c /= total;
        }
    }

    // Zero-truncated draw: every bank in a borrowing/lending role has at
    // least one counterparty.
    std::uint32_t draw_positive(Rng& rng) const {
        if (law.kind == DegreeLaw::Kind::PowerLaw) {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            return static_cast<std::uint32_t>(it - cdf.begin()) + 1;
        }
        std::poisson_distribution<std::uint32_t> poisson(law.mean);
        for (int attempt = 0; attempt < 10000; ++attempt) {
            const std::uint32_t k = poisson(rng);
            if (k > 0)
                return k;
        }
        return 1;
    }
};

constexpr std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct DirectedEdge {
    std::uint32_t borrower;
    std::uint32_t lender;
};

// Random stub matching with local repair; restarts with a fresh shuffle when
// repair stalls.
std::vector<DirectedEdge> match_stubs(std::vector<std::uint32_t> out_stubs,
                                      std::vector<std::uint32_t> in_stubs, Rng& rng) {
    if (out_stubs.size() != in_stubs.size())
        throw NumericalError("generator: unbalanced stub lists");
    const std::size_t m = out_stubs.size();
    std::vector<DirectedEdge> edges(m);
    if (m == 0)
        return edges;

    for (int restart = 0; restart < 100; ++restart) {
        std::shuffle(in_stubs.begin(), in_stubs.end(), rng);
        for (std::size_t i = 0; i < m; ++i)
            edges[i] = {out_stubs[i], in_stubs[i]};

        std::unordered_map<std::uint64_t, std::uint32_t> count;
        count.reserve(2 * m);
        for (const auto& e : edges)
            ++count[pair_key(e.borrower, e.lender)];
        const auto is_conflict = [&](const DirectedEdge& e) {
            if (e.borrower == e.lender)
                return true;
            if (count[pair_key(e.borrower, e.lender)] > 1)
                return true;
            const auto reverse = count.find(pair_key(e.lender, e.borrower));
            return reverse != count.end() && reverse->second > 0;
        };

        std::uniform_int_distribution<std::size_t> any_position(0, m - 1);
        bool clean = false;
        for (int pass = 0; pass < 200 && !clean; ++pass) {
            clean = true;
            for (std::size_t i = 0; i < m; ++i) {
                if (!is_conflict(edges[i]))
                    continue;
                clean = false;
                // Swap lenders with a random partner position if that makes
                // both pairs valid.
                for (int attempt = 0; attempt < 50; ++attempt) {
                    const std::size_t j = any_position(rng);
                    if (j == i)
                        continue;
                    const DirectedEdge a{edges[i].borrower, edges[j].lender};
                    const DirectedEdge b{edges[j].borrower, edges[i].lender};
                    --count[pair_key(edges[i].borrower, edges[i].lender)];
                    --count[pair_key(edges[j].borrower, edges[j].lender)];
                    const auto ok = [&](const DirectedEdge& e) {
                        if (e.borrower == e.lender)
                            return false;
                        const auto self = count.find(pair_key(e.borrower, e.lender));
                        if (self != count.end() && self->second > 0)
                            return false;
                        const auto reverse = count.find(pair_key(e.lender, e.borrower));
                        return reverse == count.end() || reverse->second == 0;
                    };
                    const bool both_ok =
                        ok(a) && ok(b) &&
                        !(a.borrower == b.lender && b.borrower == a.lender) &&
                        !(a.borrower == b.borrower && a.lender == b.lender);
                    if (both_ok) {
                        edges[i] = a;
                        edges[j] = b;
                        ++count[pair_key(a.borrower, a.lender)];
                        ++count[pair_key(b.borrower, b.lender)];
                        break;
                    }
                    ++count[pair_key(edges[i].borrower, edges[i].lender)];
                    ++count[pair_key(edges[j].borrower, edges[j].lender)];
                }
            }
        }
        if (clean)
            return edges;
    }
    throw ModelDomainError("generator: stub matching infeasible after 100 restarts "
                           "(degree sequence too dense for a simple netted graph)");
}

void disassortative_rewire(std::vector<DirectedEdge>& edges, double strength,
                           const std::vector<std::uint32_t>& out_degree,
                           const std::vector<std::uint32_t>& in_degree, Rng& rng) {
    const std::size_t m = edges.size();
    if (strength <= 0.0 || m < 2)
        return;

    std::unordered_map<std::uint64_t, std::uint32_t> count;
    count.reserve(2 * m);
    for (const auto& e : edges)
        ++count[pair_key(e.borrower, e.lender)];

    // Pearson correlation between borrower out-degree and lender in-degree
    // over edges. Degrees are invariant under swaps, so only sum_xy moves.
    double sum_x = 0, sum_y = 0, sum_xx = 0, sum_yy = 0, sum_xy = 0;
    for (const auto& e : edges) {
        const double x = out_degree[e.borrower];
        const double y = in_degree[e.lender];
        sum_x += x;
        sum_y += y;
        sum_xx += x * x;
        sum_yy += y * y;
        sum_xy += x * y;
    }
    const double nm = static_cast<double>(m);
    const double var_x = nm * sum_xx - sum_x * sum_x;
    const double var_y = nm * sum_yy - sum_y * sum_y;
    if (var_x <= 0.0 || var_y <= 0.0)
        return; // degenerate degree spread, nothing to correlate
    const double denom = std::sqrt(var_x * var_y);
    const auto correlation = [&] { return (nm * sum_xy - sum_x * sum_y) / denom; };

    const double target = -strength;
    const std::size_t budget = 20 * m;
    std::uniform_int_distribution<std::size_t> any_edge(0, m - 1);
    for (std::size_t proposal = 0; proposal < budget; ++proposal) {
        if (correlation() <= target)
            break;
        const std::size_t i = any_edge(rng);
        const std::size_t j = any_edge(rng);
        if (i == j)
            continue;
        const DirectedEdge a{edges[i].borrower, edges[j].lender};
        const DirectedEdge b{edges[j].borrower, edges[i].lender};
        const double delta =
            (static_cast<double>(out_degree[a.borrower]) - out_degree[b.borrower]) *
            (static_cast<double>(in_degree[a.lender]) - in_degree[b.lender]);
        if (delta >= 0.0)
            continue;
        if (a.borrower == a.lender || b.borrower == b.lender)
            continue;
        --count[pair_key(edges[i].borrower, edges[i].lender)];
        --count[pair_key(edges[j].borrower, edges[j].lender)];
        const auto ok = [&](const DirectedEdge& e) {
            const auto self = count.find(pair_key(e.borrower, e.lender));
            if (self != count.end() && self->second > 0)
                return false;
            const auto reverse = count.find(pair_key(e.lender, e.borrower));
            return reverse == count.end() || reverse->second == 0;
        };
        const bool both_ok = ok(a) && ok(b) &&
                             !(a.borrower == b.lender && b.borrower == a.lender) &&
                             !(a.borrower == b.borrower && a.lender == b.lender);
        if (!both_ok) {
            ++count[pair_key(edges[i].borrower, edges[i].lender)];
            ++count[pair_key(edges[j].borrower, edges[j].lender)];
            continue;
        }
        edges[i] = a;
        edges[j] = b;
        ++count[pair_key(a.borrower, a.lender)];
        ++count[pair_key(b.borrower, b.lender)];
        sum_xy += delta;
    }
}

std::vector<std::size_t> apportion(std::uint32_t n, const std::vector<double>& fractions) {
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double exact = fractions[i] * n;
        counts[i] = static_cast<std::size_t>(exact);
        assigned += counts[i];
        remainders.push_back({exact - std::floor(exact), i});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned)
        ++counts[remainders[i % remainders.size()].second];
    return counts;
}

} // namespace

ExposureSnapshot generate(const GeneratorConfig& config) {
    validate_config(config);
    Rng rng(config.seed);
    const std::uint32_t n = config.n_banks;

    // Components occupy contiguous index ranges: InOut, In, Out, Isolated.
    const auto counts =
        apportion(n, {config.frac_inout, config.frac_in, config.frac_out, config.frac_isolated});
    const std::size_t n_inout = counts[0], n_in = counts[1], n_out = counts[2];
    const auto role_of = [&](std::uint32_t i) {
        if (i < n_inout)
            return BowTieComponent::InOut;
        if (i < n_inout + n_in)
            return BowTieComponent::In;
        if (i < n_inout + n_in + n_out)
            return BowTieComponent::Out;
        return BowTieComponent::Isolated;
    };

    // Degree draws per role.
    const DegreeSampler core_out(config.out_degree_law), core_in(config.in_degree_law);
    const DegreeSampler periph_out(config.peripheral_out_degree_law);
    const DegreeSampler periph_in(config.peripheral_in_degree_law);
    std::vector<std::uint32_t> out_degree(n, 0), in_degree(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        switch (role_of(i)) {
        case BowTieComponent::InOut:
            out_degree[i] = core_out.draw_positive(rng);
            in_degree[i] = core_in.draw_positive(rng);
            break;
        case BowTieComponent::In:
            in_degree[i] = periph_in.draw_positive(rng);
            break;
        case BowTieComponent::Out:
            out_degree[i] = periph_out.draw_positive(rng);
            break;
        case BowTieComponent::Isolated:
            break;
        }
    }

    // Stub balance: add stubs on the deficient side where possible,
    // otherwise trim the excess side.
    std::vector<std::uint32_t> can_out, can_in;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (role_of(i) == BowTieComponent::InOut || role_of(i) == BowTieComponent::Out)
            can_out.push_back(i);
        if (role_of(i) == BowTieComponent::InOut || role_of(i) == BowTieComponent::In)
            can_in.push_back(i);
    }
    auto total = [](const std::vector<std::uint32_t>& d) {
        return std::accumulate(d.begin(), d.end(), std::uint64_t{0});
    };
    while (total(out_degree) < total(in_degree)) {
        if (!can_out.empty()) {
            ++out_degree[can_out[std::uniform_int_distribution<std::size_t>(
                0, can_out.size() - 1)(rng)]];
        } else {
            // No borrowers exist; drop lending stubs instead.
            std::vector<std::uint32_t> holders;
            for (std::uint32_t i = 0; i < n; ++i)
                if (in_degree[i] > 0)
                    holders.push_back(i);
            --in_degree[holders[std::uniform_int_distribution<std::size_t>(
                0, holders.size() - 1)(rng)]];
        }
    }
    while (total(in_degree) < total(out_degree)) {
        if (!can_in.empty()) {
            ++in_degree[can_in[std::uniform_int_distribution<std::size_t>(0, can_in.size() - 1)(
                rng)]];
        } else {
            std::vector<std::uint32_t> holders;
            for (std::uint32_t i = 0; i < n; ++i)
                if (out_degree[i] > 0)
                    holders.push_back(i);
            --out_degree[holders[std::uniform_int_distribution<std::size_t>(
                0, holders.size() - 1)(rng)]];
        }
    }

    std::vector<std::uint32_t> out_stubs, in_stubs;
    for (std::uint32_t i = 0; i < n; ++i) {
        out_stubs.insert(out_stubs.end(), out_degree[i], i);
        in_stubs.insert(in_stubs.end(), in_degree[i], i);
    }
    // A simple netted graph holds at most one edge per unordered pair;
    // past a quarter of that the matching has no realistic chance.
    if (n < 2 || out_stubs.size() > static_cast<std::size_t>(n) * (n - 1) / 8)
        if (!out_stubs.empty())
            throw ModelDomainError("generator: degree sequence too dense for a simple netted "
                                   "graph (" +
                                   std::to_string(out_stubs.size()) + " edges over " +
                                   std::to_string(n) + " banks)");
    std::vector<DirectedEdge> edges = match_stubs(std::move(out_stubs), std::move(in_stubs), rng);
    disassortative_rewire(edges, config.disassortativity_strength, out_degree, in_degree, rng);
    std::sort(edges.begin(), edges.end(), [](const DirectedEdge& a, const DirectedEdge& b) {
        return std::tie(a.borrower, a.lender) < std::tie(b.borrower, b.lender);
    });

    // Exposure weights, then claims per lender.
    const std::uint32_t digits = static_cast<std::uint32_t>(std::to_string(n).size());
    const auto bank_id = [&](std::uint32_t i) {
        std::ostringstream out;
        out << 'B';
        const std::string number = std::to_string(i + 1);
        out << std::string(digits - std::min<std::size_t>(digits, number.size()), '0') << number;
        return out.str();
    };
    std::vector<Exposure> exposures;
    exposures.reserve(edges.size());
    std::vector<std::int64_t> claims_cents(n, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (const auto& e : edges) {
        double amount = 0.0;
        if (config.exposure_law.kind == ExposureLaw::Kind::LogNormal) {
            amount = std::exp(config.exposure_law.mu + config.exposure_law.sigma * normal(rng));
        } else {
            const double u = std::max(uniform(rng), 1e-12);
            amount =
                config.exposure_law.minimum / std::pow(u, 1.0 / config.exposure_law.alpha);
        }
        amount *= std::pow(static_cast<double>(out_degree[e.borrower]),
                           config.exposure_out_degree_elasticity);
        if (role_of(e.borrower) == BowTieComponent::Out)
            amount *= config.peripheral_exposure_scale;
        Money weight = Money::from_value(amount);
        if (weight.cents() < 1)
            weight = Money::from_cents(1);
        claims_cents[e.lender] += weight.cents();
        exposures.push_back({bank_id(e.borrower), bank_id(e.lender), weight});
    }

    // Balance sheets: draw the other-risk denominator and an initial CAR,
    // then back capital out of the CAR identity.
    std::vector<BankRecord> banks(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        BankRecord& bank = banks[i];
        bank.id = bank_id(i);
        bank.threshold_class = uniform(rng) < config.deposit_taking_fraction
                                   ? ThresholdClass::DepositTaking
                                   : ThresholdClass::Other;
        const double claims = static_cast<double>(claims_cents[i]) / 100.0;
        const double floor =
            std::exp(config.other_risk_floor_mu + config.other_risk_floor_sigma * normal(rng));
        const double other_risk = config.other_risk_ratio * claims + floor;
        bank.other_risk = Money::from_value(std::max(other_risk, 0.01));

        const double threshold = threshold_of(bank.threshold_class);
        double car = 0.0;
        bool drawn = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            car = config.target_car_mean + config.target_car_spread * normal(rng);
            if (car >= threshold + 0.005) {
                drawn = true;
                break;
            }
        }
        if (!drawn)
            car = threshold + 0.005;
        bank.capital = Money::from_value(car * (0.2 * claims + bank.other_risk.value()));
    }

    return ExposureSnapshot(config.date, std::move(banks), exposures);
}

namespace {

struct Measured {
    double frac_in = 0, frac_out = 0, frac_inout = 0, frac_isolated = 0;
    double mean_out_degree = 0;
    double mean_car = 0;
};

Measured measure(const ExposureSnapshot& snapshot) {
    Measured m;
    const BowTieLabeling labeling = bow_tie_decompose(snapshot);
    const double n = static_cast<double>(snapshot.size());
    m.frac_in = labeling.count(BowTieComponent::In) / n;
    m.frac_out = labeling.count(BowTieComponent::Out) / n;
    m.frac_inout = labeling.count(BowTieComponent::InOut) / n;
    m.frac_isolated = labeling.count(BowTieComponent::Isolated) / n;
    std::size_t borrowers = 0, out_edges = 0;
    double car_sum = 0.0;
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
        if (snapshot.out_degree(i) > 0) {
            ++borrowers;
            out_edges += snapshot.out_degree(i);
        }
        car_sum += compute_car(snapshot.bank(i));
    }
    m.mean_out_degree =
        borrowers ? static_cast<double>(out_edges) / static_cast<double>(borrowers) : 0.0;
    m.mean_car = car_sum / n;
    return m;
}

} // namespace

GeneratorConfig calibrate_to_reference(const CalibrationTargets& targets,
                                       const GeneratorConfig& base,
                                       const CalibrationTolerances& tolerances) {
    const double fraction_sum =
        targets.frac_in + targets.frac_out + targets.frac_inout + targets.frac_isolated;
    if (std::abs(fraction_sum - 1.0) > 1e-6)
        throw ValidationError("calibration targets: fractions must sum to 1");
    if (!(targets.mean_out_degree > 0) || !(targets.mean_car > 0))
        throw ValidationError("calibration targets must be positive");

    GeneratorConfig config = base;
    config.frac_in = targets.frac_in;
    config.frac_out = targets.frac_out;
    config.frac_inout = targets.frac_inout;
    config.frac_isolated = targets.frac_isolated;
    config.target_car_mean = targets.mean_car;

    Measured best{};
    double best_residual = 1e300;
    GeneratorConfig best_config = config;

    for (int iteration = 0; iteration < 24; ++iteration) {
        Measured m;
        try {
            m = measure(generate(config));
        } catch (const ModelDomainError&) {
            // Degree laws overshot what a simple graph can carry; back off.
            for (DegreeLaw* law : {&config.out_degree_law, &config.in_degree_law,
                                   &config.peripheral_in_degree_law}) {
                if (law->kind == DegreeLaw::Kind::Poisson)
                    law->mean = std::max(0.05, law->mean * 0.5);
                else
                    law->exponent = std::min(4.5, law->exponent + 0.3);
            }
            continue;
        }
        const double frac_residual =
            std::max({std::abs(m.frac_in - targets.frac_in), std::abs(m.frac_out - targets.frac_out),
                      std::abs(m.frac_inout - targets.frac_inout),
                      std::abs(m.frac_isolated - targets.frac_isolated)});
        const double degree_residual =
            std::abs(m.mean_out_degree - targets.mean_out_degree) / targets.mean_out_degree;
        const double car_residual = std::abs(m.mean_car - targets.mean_car);
        const double residual = frac_residual / tolerances.fraction_points +
                                degree_residual / tolerances.degree_relative +
                                car_residual / tolerances.car_points;
        if (residual < best_residual) {
            best_residual = residual;
            best = m;
            best_config = config;
        }
        if (frac_residual <= tolerances.fraction_points &&
            degree_residual <= tolerances.degree_relative &&
            car_residual <= tolerances.car_points)
            return config;

        // Nudge the controllable knobs towards the targets. The edge count
        // is pinned by whichever stub side is larger, so the out- and
        // in-degree laws are scaled together.
        if (m.mean_out_degree > 0) {
            const double ratio =
                std::clamp(targets.mean_out_degree / m.mean_out_degree, 1.0 / 3.0, 3.0);
            const auto rescale = [&](DegreeLaw& law) {
                if (law.kind == DegreeLaw::Kind::Poisson)
                    law.mean = std::clamp(law.mean * ratio, 0.05, 50.0);
                else
                    law.exponent =
                        std::clamp(law.exponent + (ratio < 1.0 ? 0.2 : -0.2) *
                                                      std::min(1.0, std::abs(ratio - 1.0) * 4),
                                   1.05, 4.5);
            };
            rescale(config.out_degree_law);
            rescale(config.in_degree_law);
            rescale(config.peripheral_in_degree_law);
        }
        config.target_car_mean += targets.mean_car - m.mean_car;
        if (!(config.target_car_mean > 0))
            config.target_car_mean = targets.mean_car;
    }

    std::ostringstream message;
    message << "calibration failed; best residuals: fractions ("
            << best.frac_in - targets.frac_in << ", " << best.frac_out - targets.frac_out << ", "
            << best.frac_inout - targets.frac_inout << ", "
            << best.frac_isolated - targets.frac_isolated << "), mean out-degree "
            << best.mean_out_degree << " vs " << targets.mean_out_degree << ", mean CAR "
            << best.mean_car << " vs " << targets.mean_car;
    throw ModelDomainError(message.str());
}

} // namespace contagionx
