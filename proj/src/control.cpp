#include "sheetlab/control.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

struct ReplicateValue {
    double direct = 0.0;
    double measure = 0.0;
};

PerformanceEstimate summarize(const std::vector<double>& v) {
    const double R = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= R;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = R > 1 ? var / (R - 1.0) : 0.0;
    return {mean, std::sqrt(var / R)};
}

void check_run(const ControlRun& run, const ControlledCoefficientField& coeffs) {
    if (run.particles < 1) throw std::invalid_argument("control run needs at least one particle");
    if (run.replicates < 1) throw std::invalid_argument("control run needs at least one replicate");
    if (static_cast<int>(run.y0.size()) != coeffs.n) throw std::invalid_argument("initial state dimension mismatch");
    if (coeffs.m < 2) throw std::invalid_argument("controlled dynamics need a common and an idiosyncratic channel");
}

// Both estimators on one replicate: solve once, then accumulate the running
// cost per trajectory and per node-measure.
ReplicateValue evaluate_replicate(const ControlPolicy& policy, const ControlledCoefficientField& coeffs,
                                  const CostSpec& cost, const ControlRun& run, std::size_t r, bool want_direct,
                                  bool want_measure) {
    const EnsembleNoise noise =
        sample_ensemble_noise(run.grid, coeffs.m, static_cast<std::size_t>(run.particles), derive_seed(run.seed, {r}));
    const CoefficientField curried = curry_policy(coeffs, policy, noise.common);
    const ParticleEnsemble ens = solve_conditional_mkv(curried, run.y0, noise, run.seed);
    const Grid& g = run.grid;
    const double dA = g.cell_area();
    const std::size_t M = ens.size();
    std::vector<double> u(static_cast<std::size_t>(policy.d));
    std::vector<double> per_particle(want_direct ? M : 0, 0.0);
    ReplicateValue out;
    for (int i = 0; i < g.nt(); ++i)
        for (int j = 0; j < g.nx(); ++j) {
            const EmpiricalMeasure mu = ens.measure_at(i, j);
            const Point z = g.node(i, j);
            policy.rule(z, CommonNoiseView(ens.common(), {i, j}), mu, u);
            if (want_direct)
                for (std::size_t p = 0; p < M; ++p) per_particle[p] += cost.running(z, ens.particle(p).at(i, j), u) * dA;
            if (want_measure) {
                double integral = 0.0;
                for (std::size_t k = 0; k < mu.size(); ++k) integral += mu.weights()[k] * cost.running(z, mu.sample(k), u);
                out.measure += integral * dA;
            }
        }
    if (want_direct) {
        for (std::size_t p = 0; p < M; ++p) {
            per_particle[p] += cost.terminal(ens.particle(p).at(g.nt(), g.nx()));
            out.direct += per_particle[p];
        }
        out.direct /= static_cast<double>(M);
    }
    if (want_measure) {
        const EmpiricalMeasure mu = ens.measure_at(g.nt(), g.nx());
        for (std::size_t k = 0; k < mu.size(); ++k) out.measure += mu.weights()[k] * cost.terminal(mu.sample(k));
    }
    return out;
}

std::vector<ReplicateValue> evaluate(const ControlPolicy& policy, const ControlledCoefficientField& coeffs,
                                     const CostSpec& cost, const ControlRun& run, bool want_direct, bool want_measure) {
    check_run(run, coeffs);
    if (policy.d != coeffs.d) throw std::invalid_argument("policy and dynamics disagree on the control dimension");
    return parallel_map(static_cast<std::size_t>(run.replicates), run.workers, [&](std::size_t r) {
        return evaluate_replicate(policy, coeffs, cost, run, r, want_direct, want_measure);
    });
}

}  // namespace

ControlledCoefficientField ControlledCoefficientField::controlled_ou(double kappa, double a, std::vector<double> sigma) {
    if (sigma.size() < 2) throw std::invalid_argument("controlled OU needs at least two channels");
    ControlledCoefficientField c;
    c.n = 1;
    c.m = static_cast<int>(sigma.size());
    c.d = 1;
    c.drift = [kappa, a](Point, std::span<const double> y, const EmpiricalMeasure& mu, std::span<const double> u,
                         std::span<double> out) { out[0] = kappa * (a * mu.mean(0) - y[0]) + u[0]; };
    c.diffusion = [sigma](Point, std::span<const double>, const EmpiricalMeasure&, std::span<const double>,
                          std::span<double> out) { std::copy(sigma.begin(), sigma.end(), out.begin()); };
    return c;
}

CommonNoiseView::CommonNoiseView(const SheetPath& common, NodeIndex z) : common_(&common), z_(z) {
    if (!common.grid().contains(z)) throw std::out_of_range("observation point outside the grid");
}

double CommonNoiseView::value(int i, int j) const {
    if (i < 0 || j < 0 || i > z_.i || j > z_.j)
        throw std::out_of_range("policy read the common channel outside R_z");
    return common_->value(0, i, j);
}

double CommonNoiseView::value(Point p) const {
    const NodeIndex k = common_->grid().node_index(p);
    return value(k.i, k.j);
}

ControlPolicy ControlPolicy::constant(double theta) {
    return {"constant", theta, 1,
            [theta](Point, const CommonNoiseView&, const EmpiricalMeasure&, std::span<double> u) { u[0] = theta; }};
}

ControlPolicy ControlPolicy::mean_feedback(double theta) {
    return {"mean_feedback", theta, 1,
            [theta](Point, const CommonNoiseView&, const EmpiricalMeasure& mu, std::span<double> u) {
                u[0] = theta * mu.mean(0);
            }};
}

CostSpec CostSpec::lq(double lambda) { return tracking(0.0, lambda); }

CostSpec CostSpec::tracking(double target, double lambda) {
    CostSpec c;
    c.name = target == 0.0 ? "lq" : "tracking";
    c.running = [target, lambda](Point, std::span<const double> y, std::span<const double> u) {
        double s = 0.0;
        for (double v : y) s += (v - target) * (v - target);
        for (double v : u) s += lambda * v * v;
        return -s;
    };
    c.terminal = [target](std::span<const double> y) {
        double s = 0.0;
        for (double v : y) s += (v - target) * (v - target);
        return -s;
    };
    return c;
}

CostSpec CostSpec::constant(double c_running, double c_terminal) {
    CostSpec c;
    c.name = "constant";
    c.running = [c_running](Point, std::span<const double>, std::span<const double>) { return c_running; };
    c.terminal = [c_terminal](std::span<const double>) { return c_terminal; };
    return c;
}

CoefficientField curry_policy(const ControlledCoefficientField& coeffs, const ControlPolicy& policy,
                              std::shared_ptr<const SheetPath> common) {
    if (!coeffs.drift || !coeffs.diffusion) throw std::invalid_argument("controlled coefficients are incomplete");
    if (!policy.rule) throw std::invalid_argument("policy has no rule");
    if (policy.d != coeffs.d) throw std::invalid_argument("policy and dynamics disagree on the control dimension");
    CoefficientField c;
    c.n = coeffs.n;
    c.m = coeffs.m;
    c.depends_on_state = true;
    c.depends_on_measure = true;
    auto bind = [policy, common](const ControlledCoefficientField::Fn& fn) {
        return [fn, policy, common](Point z, std::span<const double> y, const EmpiricalMeasure* mu,
                                    std::span<double> out) {
            std::vector<double> u(static_cast<std::size_t>(policy.d));
            const CommonNoiseView view(*common, common->grid().node_index(z));
            policy.rule(z, view, *mu, u);
            fn(z, y, *mu, u, out);
        };
    };
    c.drift = bind(coeffs.drift);
    c.diffusion = bind(coeffs.diffusion);
    return c;
}

PerformanceEstimate performance_direct(const ControlPolicy& policy, const ControlledCoefficientField& coeffs,
                                       const CostSpec& cost, const ControlRun& run) {
    const auto values = evaluate(policy, coeffs, cost, run, true, false);
    std::vector<double> v;
    for (const auto& x : values) v.push_back(x.direct);
    return summarize(v);
}

PerformanceEstimate performance_measure_based(const ControlPolicy& policy, const ControlledCoefficientField& coeffs,
                                              const CostSpec& cost, const ControlRun& run) {
    const auto values = evaluate(policy, coeffs, cost, run, false, true);
    std::vector<double> v;
    for (const auto& x : values) v.push_back(x.measure);
    return summarize(v);
}

GridSearchResult grid_search(const std::vector<ControlPolicy>& policies, const ControlledCoefficientField& coeffs,
                             const CostSpec& cost, const ControlRun& run) {
    if (policies.empty()) throw std::invalid_argument("grid_search needs at least one policy");
    GridSearchResult result;
    for (const ControlPolicy& policy : policies) {
        const auto values = evaluate(policy, coeffs, cost, run, true, true);
        std::vector<double> d;
        std::vector<double> m;
        for (const auto& x : values) {
            d.push_back(x.direct);
            m.push_back(x.measure);
        }
        result.table.push_back({policy.theta, policy.name, summarize(d), summarize(m)});
    }
    for (std::size_t k = 1; k < result.table.size(); ++k)
        if (result.table[k].measure.mean > result.table[result.best].measure.mean) result.best = k;
    return result;
}

void write_grid_search_csv(const GridSearchResult& result, std::ostream& out) {
    out.precision(12);
    out << "theta,J_direct,J_measure,stderr_direct,stderr_measure,best\n";
    for (std::size_t k = 0; k < result.table.size(); ++k) {
        const auto& row = result.table[k];
        out << row.theta << ',' << row.direct.mean << ',' << row.measure.mean << ',' << row.direct.stderr_mean << ','
            << row.measure.stderr_mean << ',' << (k == result.best ? 1 : 0) << '\n';
    }
}

}  // namespace sheetlab
