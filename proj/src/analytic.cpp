#include "contagionx/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "contagionx/errors.hpp"

namespace contagionx {

AnalyticInputs AnalyticInputs::from_tables(const ConditionalTables& tables) {
    AnalyticInputs inputs;
    inputs.p_io = tables.p_io;
    inputs.p_io_in = tables.p_io_in;
    inputs.p_io_io = tables.p_io_io;
    inputs.v_io_in = tables.v_io_in;
    inputs.v_io_io = tables.v_io_io;
    inputs.io_in_edge_count = tables.io_in_edge_count;
    inputs.io_io_edge_count = tables.io_io_edge_count;
    return inputs;
}

namespace {

double cell_weight(const std::map<DegreeCell, std::size_t>& counts, DegreeCell cell) {
    const auto it = counts.find(cell);
    return it == counts.end() ? 1.0 : static_cast<double>(it->second);
}

} // namespace

AnalyticInputs AnalyticInputs::uncorrelated() const {
    AnalyticInputs flat = *this;

    // Edge-weighted marginals over all IO->IO edges: probability of a target
    // tuple, and the vulnerable fraction within each target tuple.
    std::map<TargetTuple, double> p_marginal;
    std::map<TargetTuple, double> v_weighted;
    double total = 0.0;
    for (const auto& [cell, row] : p_io_io) {
        const double w = cell_weight(io_io_edge_count, cell);
        total += w;
        for (const auto& [target, p] : row) {
            p_marginal[target] += w * p;
            const auto v_row = v_io_io.find(cell);
            double v = 0.0;
            if (v_row != v_io_io.end())
                if (const auto it = v_row->second.find(target); it != v_row->second.end())
                    v = it->second;
            v_weighted[target] += w * p * v;
        }
    }
    std::map<TargetTuple, double> v_marginal;
    for (auto& [target, mass] : p_marginal) {
        if (mass > 0.0)
            v_marginal[target] = v_weighted[target] / mass;
        if (total > 0.0)
            mass /= total;
    }

    std::map<std::uint32_t, double> p_in_marginal, v_in_weighted, v_in_marginal;
    double total_in = 0.0;
    for (const auto& [cell, row] : p_io_in) {
        const double w = cell_weight(io_in_edge_count, cell);
        total_in += w;
        for (const auto& [r, p] : row) {
            p_in_marginal[r] += w * p;
            const auto v_row = v_io_in.find(cell);
            double v = 0.0;
            if (v_row != v_io_in.end())
                if (const auto it = v_row->second.find(r); it != v_row->second.end())
                    v = it->second;
            v_in_weighted[r] += w * p * v;
        }
    }
    for (auto& [r, mass] : p_in_marginal) {
        if (mass > 0.0)
            v_in_marginal[r] = v_in_weighted[r] / mass;
        if (total_in > 0.0)
            mass /= total_in;
    }

    for (auto& [cell, row] : flat.p_io_io)
        row = p_marginal;
    for (auto& [cell, row] : flat.v_io_io)
        row = v_marginal;
    for (auto& [cell, row] : flat.p_io_in)
        row = p_in_marginal;
    for (auto& [cell, row] : flat.v_io_in)
        row = v_in_marginal;
    return flat;
}

void AnalyticInputs::validate() const {
    double p_io_total = 0.0;
    for (const auto& [cell, p] : p_io) {
        if (p < 0.0)
            throw ValidationError("negative P_IO probability");
        p_io_total += p;
    }
    if (!p_io.empty() && std::abs(p_io_total - 1.0) > 1e-9)
        throw ValidationError("P_IO does not sum to 1");
    const auto check_row_sum = [](double sum) {
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("conditional distribution row does not sum to 1");
    };
    for (const auto& [cell, row] : p_io_in) {
        double sum = 0.0;
        for (const auto& [r, p] : row) {
            if (p < 0.0)
                throw ValidationError("negative conditional probability");
            sum += p;
        }
        if (!row.empty())
            check_row_sum(sum);
    }
    for (const auto& [cell, row] : p_io_io) {
        double sum = 0.0;
        for (const auto& [target, p] : row) {
            if (p < 0.0)
                throw ValidationError("negative conditional probability");
            sum += p;
        }
        if (!row.empty())
            check_row_sum(sum);
    }
    for (const auto& [cell, row] : v_io_in)
        for (const auto& [r, v] : row)
            if (v < 0.0 || v > 1.0)
                throw ValidationError("vulnerability outside [0,1]");
    for (const auto& [cell, row] : v_io_io)
        for (const auto& [target, v] : row)
            if (v < 0.0 || v > 1.0)
                throw ValidationError("vulnerability outside [0,1]");
}

std::optional<std::size_t> AnalyticSystem::position(DegreeCell cell) const {
    const auto it = std::lower_bound(index.begin(), index.end(), cell);
    if (it == index.end() || *it != cell)
        return std::nullopt;
    return static_cast<std::size_t>(it - index.begin());
}

namespace {

double lookup_v_io_io(const AnalyticInputs& inputs, DegreeCell cell, TargetTuple target) {
    const auto row = inputs.v_io_io.find(cell);
    if (row == inputs.v_io_io.end())
        return 0.0;
    const auto it = row->second.find(target);
    return it == row->second.end() ? 0.0 : it->second;
}

double lookup_v_io_in(const AnalyticInputs& inputs, DegreeCell cell, std::uint32_t r) {
    const auto row = inputs.v_io_in.find(cell);
    if (row == inputs.v_io_in.end())
        return 0.0;
    const auto it = row->second.find(r);
    return it == row->second.end() ? 0.0 : it->second;
}

// omega row sum for one source cell: sum_r P(r|k,l) v(r|k,l).
double omega_sum_for(const AnalyticInputs& inputs, DegreeCell cell) {
    const auto row = inputs.p_io_in.find(cell);
    if (row == inputs.p_io_in.end())
        return 0.0;
    double sum = 0.0;
    for (const auto& [r, p] : row->second)
        sum += p * lookup_v_io_in(inputs, cell, r);
    return sum;
}

} // namespace

AnalyticSystem build_system(const AnalyticInputs& inputs) {
    inputs.validate();

    // Index = P_IO support plus every (u,t) cell reachable through IO->IO
    // rows, closed transitively.
    std::set<DegreeCell> cells;
    for (const auto& [cell, p] : inputs.p_io)
        if (p > 0.0)
            cells.insert(cell);
    std::vector<DegreeCell> queue(cells.begin(), cells.end());
    while (!queue.empty()) {
        const DegreeCell cell = queue.back();
        queue.pop_back();
        const auto row = inputs.p_io_io.find(cell);
        if (row == inputs.p_io_io.end())
            continue;
        for (const auto& [target, p] : row->second) {
            if (p <= 0.0)
                continue;
            const DegreeCell reached{target.u, target.t};
            if (cells.insert(reached).second)
                queue.push_back(reached);
        }
    }

    AnalyticSystem system;
    system.index.assign(cells.begin(), cells.end());
    const std::size_t n = system.index.size();
    system.a.assign(n * n, 0.0);
    system.gamma.assign(n, 0.0);
    system.omega_sums.assign(n, 0.0);

    for (std::size_t row = 0; row < n; ++row) {
        const DegreeCell cell = system.index[row];
        system.omega_sums[row] = omega_sum_for(inputs, cell);

        const auto conditional = inputs.p_io_io.find(cell);
        if (conditional == inputs.p_io_io.end())
            continue;
        double gamma = 0.0;
        for (const auto& [target, p] : conditional->second) {
            const double v = lookup_v_io_io(inputs, cell, target);
            const double pv = p * v;
            if (pv == 0.0)
                continue;
            const DegreeCell reached{target.u, target.t};
            const auto column = system.position(reached);
            if (column)
                system.a[row * n + *column] += static_cast<double>(target.u) * pv;
            gamma += pv * (1.0 + static_cast<double>(target.t) * omega_sum_for(inputs, reached));
        }
        system.gamma[row] = gamma;
    }
    return system;
}

namespace {

// Strongly connected components of the support digraph of a dense matrix
// (iterative Tarjan). The spectral radius of a nonnegative matrix is the
// maximum over its irreducible diagonal blocks.
std::vector<std::vector<std::size_t>> support_components(const std::vector<double>& a,
                                                         std::size_t n) {
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> order(n, none), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;
    struct Frame {
        std::size_t node, next;
    };
    std::vector<Frame> call;
    for (std::size_t root = 0; root < n; ++root) {
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
            bool descended = false;
            while (next < n) {
                const std::size_t w = next++;
                if (a[v * n + w] <= 0.0)
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
                std::vector<std::size_t> component;
                while (true) {
                    const std::size_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component.push_back(w);
                    if (w == v)
                        break;
                }
                components.push_back(std::move(component));
            }
            const std::size_t child = v;
            call.pop_back();
            if (!call.empty())
                low[call.back().node] = std::min(low[call.back().node], low[child]);
        }
    }
    return components;
}

} // namespace

SpectralInfo spectral_check(const std::vector<double>& a, std::size_t n) {
    if (a.size() != n * n)
        throw ValidationError("spectral check: matrix size mismatch");
    for (const double entry : a)
        if (entry < 0.0 || !std::isfinite(entry))
            throw ValidationError("spectral check requires a finite nonnegative matrix");

    SpectralInfo info;
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row_sum += a[i * n + j];
        info.row_sum_max = std::max(info.row_sum_max, row_sum);
    }
    if (n == 0) {
        info.subcritical = true;
        return info;
    }

    // Power-iterate each irreducible block, with a +I shift so periodic
    // blocks cannot oscillate. The Collatz-Wielandt ratio of a positive
    // iterate estimates the block's Perron root.
    std::mt19937_64 rng(0x5eedu);
    std::uniform_real_distribution<double> uniform(0.5, 1.5);
    constexpr std::size_t max_iterations = 10000;
    constexpr double tolerance = 1e-10;

    double lambda = 0.0;
    for (const auto& block : support_components(a, n)) {
        if (block.size() == 1) {
            const std::size_t v = block[0];
            lambda = std::max(lambda, a[v * n + v]);
            continue;
        }
        const std::size_t m = block.size();
        std::vector<double> x(m), y(m);
        for (double& value : x)
            value = uniform(rng);
        double estimate = 0.0;
        bool converged = false;
        for (std::size_t it = 1; it <= max_iterations && !converged; ++it) {
            double ratio_max = 0.0, norm = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double sum = x[i]; // the +I shift
                for (std::size_t j = 0; j < m; ++j)
                    sum += a[block[i] * n + block[j]] * x[j];
                y[i] = sum;
                ratio_max = std::max(ratio_max, sum / x[i]);
                norm += sum * sum;
            }
            norm = std::sqrt(norm);
            for (std::size_t i = 0; i < m; ++i)
                x[i] = y[i] / norm;
            const double next = ratio_max - 1.0;
            converged = it > 1 && std::abs(next - estimate) < tolerance;
            estimate = next;
            ++info.iterations;
        }
        if (!converged)
            throw NumericalError("power iteration did not converge within " +
                                 std::to_string(max_iterations) +
                                 " iterations on an irreducible block of size " +
                                 std::to_string(m));
        lambda = std::max(lambda, estimate);
    }
    info.lambda_max = lambda;
    info.subcritical = lambda < 1.0 - 1e-9;
    return info;
}

namespace {

AnalyticSolution solve_mean_cluster_size(const AnalyticInputs& inputs) {
    AnalyticSolution solution;
    solution.system = build_system(inputs);
    const std::size_t n = solution.system.cells();

    const SpectralInfo spectral = spectral_check(solution.system.a, n);
    solution.lambda_max = spectral.lambda_max;
    solution.row_sum_max = spectral.row_sum_max;
    solution.subcritical = spectral.subcritical;
    if (!spectral.subcritical)
        throw ModelDomainError(
            "supercritical contagion matrix (lambda_max = " + std::to_string(spectral.lambda_max) +
            " >= 1): the mean cluster size is valid only in the absence of a giant cluster");

    solution.dm.assign(n, 0.0);
    if (n > 0) {
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const Eigen::Map<const RowMajor> a(solution.system.a.data(),
                                           static_cast<Eigen::Index>(n),
                                           static_cast<Eigen::Index>(n));
        const Eigen::Map<const Eigen::VectorXd> gamma(solution.system.gamma.data(),
                                                      static_cast<Eigen::Index>(n));
        Eigen::VectorXd dm;
        if (n <= 2000) {
            const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - a;
            dm = Eigen::PartialPivLU<Eigen::MatrixXd>(lhs).solve(gamma);
        } else {
            // Subcritical Neumann iteration dM <- gamma + A dM.
            dm = gamma;
            for (std::size_t it = 0; it < 100000; ++it) {
                Eigen::VectorXd next = gamma + a * dm;
                const double delta = (next - dm).lpNorm<Eigen::Infinity>();
                dm = std::move(next);
                if (delta < 1e-12)
                    break;
            }
        }
        const double residual = ((dm - a * dm) - gamma).lpNorm<Eigen::Infinity>();
        if (!std::isfinite(residual) || residual > 1e-10 * (1.0 + gamma.lpNorm<Eigen::Infinity>()))
            throw NumericalError("linear solve for dM failed (residual " +
                                 std::to_string(residual) + ")");
        for (std::size_t i = 0; i < n; ++i)
            solution.dm[i] = dm[static_cast<Eigen::Index>(i)];
    }

    double s = 0.0;
    for (const auto& [cell, p] : inputs.p_io) {
        if (p <= 0.0)
            continue;
        const auto position = solution.system.position(cell);
        if (!position)
            continue;
        s += p * (static_cast<double>(cell.k) * solution.dm[*position] +
                  static_cast<double>(cell.l) * solution.system.omega_sums[*position]);
    }
    solution.mean_cluster_size = s;
    return solution;
}

} // namespace

AnalyticSolution mean_cluster_size(const AnalyticInputs& inputs) {
    return solve_mean_cluster_size(inputs);
}

AnalyticSolution mean_cluster_size_uncorrelated(const AnalyticInputs& inputs) {
    return solve_mean_cluster_size(inputs.uncorrelated());
}

GeneratingFunctionEval evaluate_generating_functions(const AnalyticInputs& inputs, double x,
                                                     double y) {
    if (x < 0.0 || y < 0.0 || x > 1.001 || y > 1.001)
        throw ValidationError("generating functions are evaluated on [0, 1] "
                              "(plus a small margin for numeric differentiation)");
    inputs.validate();
    const AnalyticSystem system = build_system(inputs);
    const std::size_t n = system.cells();

    GeneratingFunctionEval eval;
    // N_{k,l}(y) has no recursive part: a branch into the In component
    // terminates there.
    std::vector<double> n_values(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const DegreeCell cell = system.index[i];
        const auto row = inputs.p_io_in.find(cell);
        if (row == inputs.p_io_in.end() || row->second.empty())
            continue;
        double value = 0.0;
        for (const auto& [r, p] : row->second) {
            const double v = lookup_v_io_in(inputs, cell, r);
            value += p * (1.0 - v + y * v);
        }
        n_values[i] = value;
    }

    std::vector<double> m_values(n, 1.0), next(n, 1.0);
    constexpr std::size_t max_iterations = 100000;
    constexpr double tolerance = 1e-12;
    std::size_t iterations = 0;
    for (; iterations < max_iterations; ++iterations) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const DegreeCell cell = system.index[i];
            const auto row = inputs.p_io_io.find(cell);
            if (row == inputs.p_io_io.end() || row->second.empty()) {
                next[i] = 1.0;
            } else {
                double safe = 0.0, spreading = 0.0;
                for (const auto& [target, p] : row->second) {
                    const double v = lookup_v_io_io(inputs, cell, target);
                    safe += p * (1.0 - v);
                    if (v == 0.0)
                        continue;
                    const auto position = system.position({target.u, target.t});
                    const double m = position ? m_values[*position] : 1.0;
                    const double nn = position ? n_values[*position] : 1.0;
                    spreading += p * v * std::pow(m, static_cast<double>(target.u)) *
                                 std::pow(nn, static_cast<double>(target.t));
                }
                next[i] = safe + x * spreading;
            }
            delta = std::max(delta, std::abs(next[i] - m_values[i]));
        }
        m_values.swap(next);
        if (delta < tolerance)
            break;
    }
    if (iterations >= max_iterations)
        throw NumericalError("generating-function fixed point did not converge within " +
                             std::to_string(max_iterations) + " iterations");
    eval.iterations = iterations + 1;

    double f = 0.0;
    for (const auto& [cell, p] : inputs.p_io) {
        if (p <= 0.0)
            continue;
        const auto position = system.position(cell);
        const double m = position ? m_values[*position] : 1.0;
        const double nn = position ? n_values[*position] : 1.0;
        f += p * std::pow(m, static_cast<double>(cell.k)) * std::pow(nn, static_cast<double>(cell.l));
    }
    eval.f = f;
    for (std::size_t i = 0; i < n; ++i) {
        eval.n_values[system.index[i]] = n_values[i];
        eval.m_values[system.index[i]] = m_values[i];
    }
    return eval;
}

} // namespace contagionx
