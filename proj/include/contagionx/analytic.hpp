#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "contagionx/topology.hpp"

namespace contagionx {

/// Conditional degree/vulnerability tables in the shape the cluster-size
/// model consumes. Usually lifted from empirical ConditionalTables, but may
/// be assembled directly (synthetic table sets in tests).
struct AnalyticInputs {
    std::map<DegreeCell, double> p_io;
    std::map<DegreeCell, std::map<std::uint32_t, double>> p_io_in;
    std::map<DegreeCell, std::map<TargetTuple, double>> p_io_io;
    std::map<DegreeCell, std::map<std::uint32_t, double>> v_io_in;
    std::map<DegreeCell, std::map<TargetTuple, double>> v_io_io;
    // Per-cell edge tallies; used as marginalization weights. Cells missing
    // from these maps weigh in with 1 when marginalizing.
    std::map<DegreeCell, std::size_t> io_in_edge_count;
    std::map<DegreeCell, std::size_t> io_io_edge_count;

    static AnalyticInputs from_tables(const ConditionalTables& tables);

    /// Degree-degree correlations stripped: every conditional row replaced
    /// by the edge-weighted marginal over all edges of its class.
    AnalyticInputs uncorrelated() const;

    /// Probabilities in range and conditional rows normalized to 1 +- 1e-9.
    void validate() const;
};

/// The linearized propagation system around x = y = 1:
///     dM = A dM + gamma dx,
/// with one row per reachable source cell. `a` is row-major over
/// index x index; omega_sums holds the per-cell In-branch terms.
struct AnalyticSystem {
    std::vector<DegreeCell> index;
    std::vector<double> a;
    std::vector<double> gamma;
    std::vector<double> omega_sums;

    std::size_t cells() const { return index.size(); }
    std::optional<std::size_t> position(DegreeCell cell) const;
};

AnalyticSystem build_system(const AnalyticInputs& inputs);

struct SpectralInfo {
    double lambda_max = 0.0;
    double row_sum_max = 0.0;
    bool subcritical = true;
    std::size_t iterations = 0;
};

/// Spectral radius of a nonnegative square matrix by power iteration
/// (tolerance 1e-10, at most 10000 iterations, randomized positive start).
/// subcritical means lambda_max < 1 - 1e-9.
SpectralInfo spectral_check(const std::vector<double>& a, std::size_t n);

struct AnalyticSolution {
    AnalyticSystem system;
    std::vector<double> dm; // dM/dx per index cell
    double lambda_max = 0.0;
    double row_sum_max = 0.0;
    double mean_cluster_size = 0.0; // S
    bool subcritical = true;
};

/// Mean default-cluster size S for a seed drawn from the InOut component:
/// solves (I - A) dM = gamma and contracts with P_IO and the omega terms.
/// Supercritical inputs raise ModelDomainError (percolative phase); an
/// unresolvable solve raises NumericalError.
AnalyticSolution mean_cluster_size(const AnalyticInputs& inputs);

/// Same pipeline on the decorrelated tables.
AnalyticSolution mean_cluster_size_uncorrelated(const AnalyticInputs& inputs);

struct GeneratingFunctionEval {
    std::map<DegreeCell, double> n_values;
    std::map<DegreeCell, double> m_values;
    double f = 0.0;
    std::size_t iterations = 0;
};

/// Evaluates the generating functions N_{k,l}(y), the M fixed point and
/// F(M,N) at a given (x, y). Accepts arguments slightly above 1 so central
/// differences at x = y = 1 stay inside the domain.
GeneratingFunctionEval evaluate_generating_functions(const AnalyticInputs& inputs, double x,
                                                     double y);

} // namespace contagionx
