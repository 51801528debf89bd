#pragma once

// Linear N-particle space-time Ornstein-Uhlenbeck systems
//
//   Y_i(t,x) = y + int int ((1/N) sum_j a_j Y_j - Y_i) dzeta + B_i(t,x),
//
// their closed form through f and the rank-one structure of A, the remainder
// I_{i,N}, and the mean-field limit.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sheetlab/noise.hpp"
#include "sheetlab/solver.hpp"

namespace sheetlab {

/// Law of the coefficients a_j: a point mass or uniform on [lo, hi].
struct ADistribution {
    enum class Kind { constant, uniform };
    Kind kind = Kind::constant;
    double lo = 1.0;
    double hi = 1.0;

    /// N draws from substream `key` (all equal to lo for a point mass).
    std::vector<double> sample(int N, std::uint64_t key) const;
};

struct ChaosConfig {
    int N = 1;
    std::vector<double> a_values;  ///< used when a_distribution is empty
    std::optional<ADistribution> a_distribution;
    double y0 = 1.0;
    Grid grid{{1.0, 1.0}, 16, 16};
    std::uint64_t seed = 0;
    double q = 1e-3;  ///< required lower bound on (1/N) sum a_j
    double a_bound = 1e3;

    /// Throws unless N >= 1, a_values has N bounded entries and mean >= q.
    void validate() const;
};

/// Drift (A/N - I) Y and identity diffusion on N channels.
CoefficientField particle_system_coefficients(std::vector<double> a_values);

/// Goursat scheme for the N-particle system on an N-channel sheet.
StateField simulate_particle_system(const ChaosConfig& cfg, const SheetPath& sheet);

/// (-1)^n (I - A/|A|) + ((1/N)|A| - 1)^n A/|A|, row-major N x N, where every
/// row of A is a and |A| = sum_j a_j.
std::vector<double> matrix_power_decomposition(std::span<const double> a_values, int n);

/// Closed form on the grid: f(tx((1/N)|A| - 1)) y plus the discrete
/// stochastic convolution with kernels f(-(t-u)(x-v)) on (I - A/|A|) dB and
/// f((t-u)(x-v)((1/N)|A| - 1)) on A/|A| dB, lower-corner evaluation.
StateField closed_form_solution(const ChaosConfig& cfg, const SheetPath& sheet);

/// I_{i,N} at node z from its definition,
///   -sum_j int int f(-(t-u)(x-v)) a_j/|A| dB_j
///   +sum_j int int f(-(t-u)(x-v)) ((1/N)|A| - 1) a_j/|A| dB_j;
/// it does not depend on i.
double remainder(const ChaosConfig& cfg, const SheetPath& sheet, Point z);

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

/// Mean of I_{i,N}(z)^2 over replicates; replicate r uses sheet substream
/// (seed, r), so runs with different N share their first channels.
MonteCarloEstimate remainder_variance(const ChaosConfig& cfg, Point z, int replicates, std::uint64_t seed,
                                      int workers = 1);

/// f(tx(a - 1)) y + sum_cells f(-(t-u)(x-v)) dB*(cell).
StateField limit_solution(double a, double y0, const SheetPath& sheet_star);

struct LimitSpdeReport {
    double deterministic_residual = 0.0;  ///< sup |d2u/dtdx - (a-1) u| for u = f(tx(a-1)) y
    double stochastic_residual = 0.0;     ///< sup over nodes of RMS over replicates
    double mean_field_sup = 0.0;          ///< sup |replicate mean of Y - f(tx(a-1)) y|
};

/// Plugs limit_solution into Y = y + sum (a E[Y] - Y) dt dx + B*, with E[Y]
/// the replicate average. The deterministic check differentiates u through
/// the series derivatives of f.
LimitSpdeReport verify_limit_spde(double a, double y0, const Grid& grid, int replicates, std::uint64_t seed,
                                  int workers = 1);

/// Same, with the replicate sheets supplied (for coupled refinement).
LimitSpdeReport verify_limit_spde(double a, double y0, const std::vector<SheetPath>& sheets);

}  // namespace sheetlab
