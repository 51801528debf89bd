#pragma once

// Explicit lower-corner Goursat scheme for systems driven by an m-channel sheet,
// the conditional McKean-Vlasov particle method, and Picard iteration.

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sheetlab/measures.hpp"
#include "sheetlab/noise.hpp"
#include "sheetlab/plane.hpp"

namespace sheetlab {

/// Drift alpha(z, y, mu) in R^n and diffusion beta(z, y, mu) in R^{n x m}
/// (row-major, beta[k*m + l]). `mu` is null whenever depends_on_measure is
/// false.
struct CoefficientField {
    using DriftFn = std::function<void(Point, std::span<const double>, const EmpiricalMeasure*, std::span<double>)>;
    using DiffusionFn = DriftFn;

    int n = 1;
    int m = 1;
    DriftFn drift;
    DiffusionFn diffusion;
    bool depends_on_state = true;
    bool depends_on_measure = false;
    std::optional<double> lipschitz_hint;

    void validate() const;

    /// Constant alpha (size n) and beta (size n*m).
    static CoefficientField constant(std::vector<double> alpha, std::vector<double> beta, int m);

    /// n = 1: alpha = kappa * (a * mean(mu) - y), beta = sigma (one entry per
    /// channel). Lipschitz hint kappa * (1 + |a|).
    static CoefficientField conditional_ou(double kappa, double a, std::vector<double> sigma);
};

/// Per-node state vectors of dimension n.
class StateField {
public:
    StateField(const Grid& grid, int n, std::span<const double> fill);

    const Grid& grid() const { return grid_; }
    int dim() const { return n_; }
    std::span<double> at(int i, int j) { return {values_.data() + grid_.flat(i, j) * n_, static_cast<std::size_t>(n_)}; }
    std::span<const double> at(int i, int j) const {
        return {values_.data() + grid_.flat(i, j) * n_, static_cast<std::size_t>(n_)};
    }
    double operator()(int i, int j, int k = 0) const { return values_[grid_.flat(i, j) * n_ + k]; }
    std::span<const double> values() const { return values_; }

    /// Component k at every node.
    NodeField<double> component(int k) const;

private:
    Grid grid_;
    int n_;
    std::vector<double> values_;
};

/// Measure handed to the coefficients at node (i, j), or null.
using MeasureSource = std::function<const EmpiricalMeasure*(int, int)>;

/// Y_{i+1,j+1} = Y_{i+1,j} + Y_{i,j+1} - Y_{i,j} + alpha_ij dt dx + beta_ij dB(cell_ij),
/// with Y = y0 on both axes.
StateField solve_goursat(const CoefficientField& coeffs, std::span<const double> y0, const SheetPath& sheet,
                         const MeasureSource& measure_source = {});

/// M coupled particles. Particle p is driven by channel 0 of `common` and by
/// the m-1 channels of idiosyncratic(p).
class ParticleEnsemble {
public:
    ParticleEnsemble(CoefficientField coeffs, std::shared_ptr<const SheetPath> common,
                     std::vector<SheetPath> idiosyncratic, std::vector<StateField> states, std::uint64_t seed);

    std::size_t size() const { return states_.size(); }
    const Grid& grid() const { return common_->grid(); }
    int dim() const { return coeffs_.n; }
    std::uint64_t seed() const { return seed_; }
    const CoefficientField& coefficients() const { return coeffs_; }
    const SheetPath& common() const { return *common_; }
    const SheetPath& idiosyncratic(std::size_t p) const { return idiosyncratic_[p]; }
    const StateField& particle(std::size_t p) const { return states_[p]; }

    /// Equal-weight measure of all particle states at node (i, j).
    EmpiricalMeasure measure_at(int i, int j) const;

    /// Increment of particle p's channel l (0 = common) over cell (i, j).
    double cell_increment(std::size_t p, int channel, int i, int j) const {
        return channel == 0 ? common_->cell_increment(0, i, j) : idiosyncratic_[p].cell_increment(channel - 1, i, j);
    }

private:
    CoefficientField coeffs_;
    std::shared_ptr<const SheetPath> common_;
    std::vector<SheetPath> idiosyncratic_;
    std::vector<StateField> states_;
    std::uint64_t seed_;
};

/// Noise for an ensemble: common sheet from substream (seed, 0), particle p's
/// idiosyncratic sheet from substream (seed, p + 1).
struct EnsembleNoise {
    std::shared_ptr<const SheetPath> common;
    std::vector<SheetPath> idiosyncratic;
};

EnsembleNoise sample_ensemble_noise(const Grid& grid, int m, std::size_t particles, std::uint64_t seed);

/// Restriction of ensemble noise to a coarser grid (coupled refinement).
EnsembleNoise coarsen_noise(const EnsembleNoise& noise, int factor);

struct SolveOptions {
    int workers = 1;
};

/// Advances all particles row by row; the coefficients at node (i, j) see the
/// equal-weight empirical measure of the particle states at (i, j).
ParticleEnsemble solve_conditional_mkv(const CoefficientField& coeffs, std::span<const double> y0,
                                       std::size_t particles, const Grid& grid, std::uint64_t seed,
                                       const SolveOptions& options = {});
ParticleEnsemble solve_conditional_mkv(const CoefficientField& coeffs, std::span<const double> y0,
                                       const EnsembleNoise& noise, std::uint64_t seed,
                                       const SolveOptions& options = {});

struct PicardResult {
    std::optional<ParticleEnsemble> ensemble;  ///< last iterate
    std::vector<double> gaps;                  ///< sup over nodes of mean_p |Y^{n+1} - Y^n|^2
    bool converged = false;
    bool diverged = false;  ///< gaps grew three times in a row
};

/// Y^0 = y0; Y^{n+1} solves the Goursat recursion with coefficients frozen at
/// Y^n and its empirical measures. Noise is shared by all iterates.
PicardResult picard_solve(const CoefficientField& coeffs, std::span<const double> y0, std::size_t particles,
                          const Grid& grid, std::uint64_t seed, int max_iter, double tol,
                          const SolveOptions& options = {});
PicardResult picard_solve(const CoefficientField& coeffs, std::span<const double> y0, const EnsembleNoise& noise,
                          std::uint64_t seed, int max_iter, double tol, const SolveOptions& options = {});

struct ConvergenceRadiusReport {
    double area = 0.0;           ///< T * X
    double r0 = 0.0;
    double K = 0.0;
    double gronwall_limit = 0.0;  ///< r0 / K (infinite for K = 0)
    double picard_limit = 0.0;    ///< sqrt(r0) / K
    bool gronwall_ok = false;     ///< K |z| <= r0
    bool picard_ok = false;       ///< K |z| < sqrt(r0)
};

/// Requires coeffs.lipschitz_hint.
ConvergenceRadiusReport convergence_radius_report(const CoefficientField& coeffs, const Grid& grid);

enum class SliceAxis { fixed_t, fixed_x };

/// CSV of one grid line: coordinate followed by the n state components.
void write_state_slice(const StateField& field, SliceAxis axis, int index, std::ostream& out);

}  // namespace sheetlab
