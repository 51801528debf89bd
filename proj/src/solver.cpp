#include "sheetlab/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/series.hpp"

namespace sheetlab {

namespace {

constexpr double kR0Tol = 1e-12;

void check_y0(const CoefficientField& coeffs, std::span<const double> y0) {
    if (static_cast<int>(y0.size()) != coeffs.n)
        throw std::invalid_argument("initial state has " + std::to_string(y0.size()) + " components, expected " +
                                    std::to_string(coeffs.n));
}

// Scratch buffers for one cell update.
struct CellScratch {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> dB;

    explicit CellScratch(const CoefficientField& c)
        : alpha(static_cast<std::size_t>(c.n)), beta(static_cast<std::size_t>(c.n * c.m)),
          dB(static_cast<std::size_t>(c.m)) {}
};

// Y(i+1,j+1) from the three other corners of cell (i,j); coefficients are
// evaluated at `arg` (the state at (i,j) of the iterate being read).
void update_cell(const CoefficientField& c, StateField& y, int i, int j, std::span<const double> arg,
                 const EmpiricalMeasure* mu, CellScratch& s) {
    const Grid& g = y.grid();
    const Point z = g.node(i, j);
    c.drift(z, arg, mu, s.alpha);
    c.diffusion(z, arg, mu, s.beta);
    const double area = g.cell_area();
    auto out = y.at(i + 1, j + 1);
    const auto left = y.at(i + 1, j);
    const auto down = y.at(i, j + 1);
    const auto corner = y.at(i, j);
    for (int k = 0; k < c.n; ++k) {
        double v = left[k] + down[k] - corner[k] + s.alpha[k] * area;
        for (int l = 0; l < c.m; ++l) v += s.beta[k * c.m + l] * s.dB[l];
        out[k] = v;
    }
}

EmpiricalMeasure node_measure(const std::vector<StateField>& states, int n, int i, int j) {
    std::vector<double> samples;
    samples.reserve(states.size() * static_cast<std::size_t>(n));
    for (const StateField& s : states) {
        const auto v = s.at(i, j);
        samples.insert(samples.end(), v.begin(), v.end());
    }
    return EmpiricalMeasure::uniform(n, std::move(samples));
}

void check_noise(const CoefficientField& coeffs, const EnsembleNoise& noise) {
    if (!noise.common) throw std::invalid_argument("ensemble noise has no common sheet");
    if (noise.idiosyncratic.empty()) throw std::invalid_argument("particle count must be >= 1");
    if (coeffs.m < 2) throw std::invalid_argument("conditional McKean-Vlasov needs m >= 2 channels");
    if (noise.common->channels() < 1) throw std::invalid_argument("common sheet has no channels");
    for (const SheetPath& s : noise.idiosyncratic) {
        if (!(s.grid() == noise.common->grid())) throw std::invalid_argument("particle sheets on different grids");
        if (s.channels() != coeffs.m - 1)
            throw std::invalid_argument("idiosyncratic sheets need m - 1 channels");
    }
}

// One sweep of the particle scheme. With `frozen` null the coefficients read
// the states being built (the particle method); otherwise they read `frozen`
// (one Picard step).
std::vector<StateField> sweep(const CoefficientField& coeffs, std::span<const double> y0, const EnsembleNoise& noise,
                              const std::vector<StateField>* frozen, int workers) {
    const Grid& grid = noise.common->grid();
    const std::size_t M = noise.idiosyncratic.size();
    std::vector<StateField> states(M, StateField(grid, coeffs.n, y0));
    const std::vector<StateField>& source = frozen ? *frozen : states;
    std::vector<std::optional<EmpiricalMeasure>> row_mu(static_cast<std::size_t>(grid.nx()));
    for (int i = 0; i < grid.nt(); ++i) {
        if (coeffs.depends_on_measure)
            for (int j = 0; j < grid.nx(); ++j) row_mu[j] = node_measure(source, coeffs.n, i, j);
        parallel_map(M, workers, [&](std::size_t p) {
            CellScratch s(coeffs);
            for (int j = 0; j < grid.nx(); ++j) {
                s.dB[0] = noise.common->cell_increment(0, i, j);
                for (int l = 1; l < coeffs.m; ++l) s.dB[l] = noise.idiosyncratic[p].cell_increment(l - 1, i, j);
                const EmpiricalMeasure* mu = coeffs.depends_on_measure ? &*row_mu[j] : nullptr;
                update_cell(coeffs, states[p], i, j, source[p].at(i, j), mu, s);
            }
            return 0;
        });
    }
    return states;
}

}  // namespace

void CoefficientField::validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("coefficient field needs n >= 1 and m >= 1");
    if (!drift || !diffusion) throw std::invalid_argument("coefficient field needs drift and diffusion maps");
}

CoefficientField CoefficientField::constant(std::vector<double> alpha, std::vector<double> beta, int m) {
    const int n = static_cast<int>(alpha.size());
    if (n < 1 || m < 1 || beta.size() != static_cast<std::size_t>(n * m))
        throw std::invalid_argument("constant coefficients need n >= 1 drift entries and n*m diffusion entries");
    CoefficientField c;
    c.n = n;
    c.m = m;
    c.drift = [alpha](Point, std::span<const double>, const EmpiricalMeasure*, std::span<double> out) {
        std::copy(alpha.begin(), alpha.end(), out.begin());
    };
    c.diffusion = [beta](Point, std::span<const double>, const EmpiricalMeasure*, std::span<double> out) {
        std::copy(beta.begin(), beta.end(), out.begin());
    };
    c.depends_on_state = false;
    c.depends_on_measure = false;
    c.lipschitz_hint = 0.0;
    return c;
}

CoefficientField CoefficientField::conditional_ou(double kappa, double a, std::vector<double> sigma) {
    if (sigma.empty()) throw std::invalid_argument("conditional_ou needs at least one channel");
    CoefficientField c;
    c.n = 1;
    c.m = static_cast<int>(sigma.size());
    c.drift = [kappa, a](Point, std::span<const double> y, const EmpiricalMeasure* mu, std::span<double> out) {
        out[0] = kappa * (a * mu->mean(0) - y[0]);
    };
    c.diffusion = [sigma](Point, std::span<const double>, const EmpiricalMeasure*, std::span<double> out) {
        std::copy(sigma.begin(), sigma.end(), out.begin());
    };
    c.depends_on_state = true;
    c.depends_on_measure = true;
    c.lipschitz_hint = std::abs(kappa) * (1.0 + std::abs(a));
    return c;
}

StateField::StateField(const Grid& grid, int n, std::span<const double> fill) : grid_(grid), n_(n) {
    if (n < 1 || static_cast<int>(fill.size()) != n) throw std::invalid_argument("state fill has wrong dimension");
    values_.resize(grid.node_count() * static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < grid.node_count(); ++k) std::copy(fill.begin(), fill.end(), values_.begin() + k * n);
}

NodeField<double> StateField::component(int k) const {
    if (k < 0 || k >= n_) throw std::out_of_range("state component out of range");
    NodeField<double> out(grid_);
    for (int i = 0; i <= grid_.nt(); ++i)
        for (int j = 0; j <= grid_.nx(); ++j) out(i, j) = (*this)(i, j, k);
    return out;
}

StateField solve_goursat(const CoefficientField& coeffs, std::span<const double> y0, const SheetPath& sheet,
                         const MeasureSource& measure_source) {
    coeffs.validate();
    check_y0(coeffs, y0);
    if (coeffs.m != sheet.channels())
        throw std::invalid_argument("coefficient channel count " + std::to_string(coeffs.m) +
                                    " does not match sheet channels " + std::to_string(sheet.channels()));
    if (coeffs.depends_on_measure && !measure_source)
        throw std::invalid_argument("coefficients depend on the measure but no measure source was given");
    const Grid& grid = sheet.grid();
    StateField y(grid, coeffs.n, y0);
    CellScratch s(coeffs);
    for (int i = 0; i < grid.nt(); ++i)
        for (int j = 0; j < grid.nx(); ++j) {
            for (int l = 0; l < coeffs.m; ++l) s.dB[l] = sheet.cell_increment(l, i, j);
            const EmpiricalMeasure* mu = nullptr;
            if (coeffs.depends_on_measure) {
                mu = measure_source(i, j);
                if (!mu) throw std::invalid_argument("measure source returned no measure");
            }
            update_cell(coeffs, y, i, j, y.at(i, j), mu, s);
        }
    return y;
}

ParticleEnsemble::ParticleEnsemble(CoefficientField coeffs, std::shared_ptr<const SheetPath> common,
                                   std::vector<SheetPath> idiosyncratic, std::vector<StateField> states,
                                   std::uint64_t seed)
    : coeffs_(std::move(coeffs)), common_(std::move(common)), idiosyncratic_(std::move(idiosyncratic)),
      states_(std::move(states)), seed_(seed) {
    if (states_.empty() || states_.size() != idiosyncratic_.size())
        throw std::invalid_argument("ensemble needs one idiosyncratic sheet per particle");
}

EmpiricalMeasure ParticleEnsemble::measure_at(int i, int j) const { return node_measure(states_, dim(), i, j); }

EnsembleNoise sample_ensemble_noise(const Grid& grid, int m, std::size_t particles, std::uint64_t seed) {
    if (m < 2) throw std::invalid_argument("ensemble noise needs m >= 2 channels");
    if (particles == 0) throw std::invalid_argument("particle count must be >= 1");
    EnsembleNoise noise;
    noise.common = std::make_shared<const SheetPath>(sample_sheet(grid, 1, derive_seed(seed, {0})));
    noise.idiosyncratic.reserve(particles);
    for (std::size_t p = 0; p < particles; ++p)
        noise.idiosyncratic.push_back(sample_sheet(grid, m - 1, derive_seed(seed, {p + 1})));
    return noise;
}

EnsembleNoise coarsen_noise(const EnsembleNoise& noise, int factor) {
    EnsembleNoise out;
    out.common = std::make_shared<const SheetPath>(noise.common->coarsened(factor));
    out.idiosyncratic.reserve(noise.idiosyncratic.size());
    for (const SheetPath& s : noise.idiosyncratic) out.idiosyncratic.push_back(s.coarsened(factor));
    return out;
}

ParticleEnsemble solve_conditional_mkv(const CoefficientField& coeffs, std::span<const double> y0,
                                       std::size_t particles, const Grid& grid, std::uint64_t seed,
                                       const SolveOptions& options) {
    coeffs.validate();
    if (particles == 0) throw std::invalid_argument("particle count must be >= 1");
    return solve_conditional_mkv(coeffs, y0, sample_ensemble_noise(grid, coeffs.m, particles, seed), seed, options);
}

ParticleEnsemble solve_conditional_mkv(const CoefficientField& coeffs, std::span<const double> y0,
                                       const EnsembleNoise& noise, std::uint64_t seed, const SolveOptions& options) {
    coeffs.validate();
    check_y0(coeffs, y0);
    check_noise(coeffs, noise);
    auto states = sweep(coeffs, y0, noise, nullptr, options.workers);
    return ParticleEnsemble(coeffs, noise.common, noise.idiosyncratic, std::move(states), seed);
}

PicardResult picard_solve(const CoefficientField& coeffs, std::span<const double> y0, std::size_t particles,
                          const Grid& grid, std::uint64_t seed, int max_iter, double tol,
                          const SolveOptions& options) {
    coeffs.validate();
    if (particles == 0) throw std::invalid_argument("particle count must be >= 1");
    return picard_solve(coeffs, y0, sample_ensemble_noise(grid, coeffs.m, particles, seed), seed, max_iter, tol,
                        options);
}

PicardResult picard_solve(const CoefficientField& coeffs, std::span<const double> y0, const EnsembleNoise& noise,
                          std::uint64_t seed, int max_iter, double tol, const SolveOptions& options) {
    coeffs.validate();
    check_y0(coeffs, y0);
    check_noise(coeffs, noise);
    if (max_iter < 1) throw std::invalid_argument("picard_solve needs max_iter >= 1");
    const Grid& grid = noise.common->grid();
    const std::size_t M = noise.idiosyncratic.size();
    std::vector<StateField> current(M, StateField(grid, coeffs.n, y0));
    PicardResult result;
    int rising = 0;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<StateField> next = sweep(coeffs, y0, noise, &current, options.workers);
        double gap = 0.0;
        for (int i = 0; i <= grid.nt(); ++i)
            for (int j = 0; j <= grid.nx(); ++j) {
                double mean = 0.0;
                for (std::size_t p = 0; p < M; ++p) {
                    const auto a = next[p].at(i, j);
                    const auto b = current[p].at(i, j);
                    for (int k = 0; k < coeffs.n; ++k) mean += (a[k] - b[k]) * (a[k] - b[k]);
                }
                gap = std::max(gap, mean / static_cast<double>(M));
            }
        if (!result.gaps.empty() && gap > result.gaps.back())
            ++rising;
        else
            rising = 0;
        result.gaps.push_back(gap);
        current = std::move(next);
        if (rising >= 3) {
            result.diverged = true;
            break;
        }
        if (gap < tol) {
            result.converged = true;
            break;
        }
    }
    result.ensemble.emplace(coeffs, noise.common, noise.idiosyncratic, std::move(current), seed);
    return result;
}

ConvergenceRadiusReport convergence_radius_report(const CoefficientField& coeffs, const Grid& grid) {
    if (!coeffs.lipschitz_hint) throw std::invalid_argument("convergence_radius_report needs a Lipschitz hint");
    ConvergenceRadiusReport r;
    r.area = area(grid.horizon());
    r.r0 = find_r0(kR0Tol);
    r.K = *coeffs.lipschitz_hint;
    if (r.K < 0.0) throw std::invalid_argument("Lipschitz hint must be nonnegative");
    const double inf = std::numeric_limits<double>::infinity();
    r.gronwall_limit = r.K > 0.0 ? r.r0 / r.K : inf;
    r.picard_limit = r.K > 0.0 ? std::sqrt(r.r0) / r.K : inf;
    r.gronwall_ok = r.K * r.area <= r.r0;
    r.picard_ok = r.K * r.area < std::sqrt(r.r0);
    return r;
}

void write_state_slice(const StateField& field, SliceAxis axis, int index, std::ostream& out) {
    const Grid& g = field.grid();
    const bool fixed_t = axis == SliceAxis::fixed_t;
    if (index < 0 || index > (fixed_t ? g.nt() : g.nx())) throw std::out_of_range("slice index out of range");
    out.precision(17);
    out << (fixed_t ? "x" : "t");
    for (int k = 0; k < field.dim(); ++k) out << ",y" << k;
    out << '\n';
    const int count = fixed_t ? g.nx() : g.nt();
    for (int s = 0; s <= count; ++s) {
        const int i = fixed_t ? index : s;
        const int j = fixed_t ? s : index;
        out << (fixed_t ? g.node(i, j).x : g.node(i, j).t);
        for (double v : field.at(i, j)) out << ',' << v;
        out << '\n';
    }
}

}  // namespace sheetlab
