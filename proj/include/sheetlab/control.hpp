#pragma once

// Partial-observation control: policies see only the common channel (and the
// empirical conditional law, which is a function of it). The performance
// functional is estimated per trajectory (J) and through the conditional
// measures (J~).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sheetlab/measures.hpp"
#include "sheetlab/noise.hpp"
#include "sheetlab/solver.hpp"

namespace sheetlab {

/// alpha(z, y, mu, u) and beta(z, y, mu, u) with a control u in R^d.
struct ControlledCoefficientField {
    using Fn = std::function<void(Point, std::span<const double>, const EmpiricalMeasure&, std::span<const double>,
                                  std::span<double>)>;
    int n = 1;
    int m = 2;
    int d = 1;
    Fn drift;
    Fn diffusion;

    /// n = 1: alpha = kappa (a mean(mu) - y) + u, beta = sigma.
    static ControlledCoefficientField controlled_ou(double kappa, double a, std::vector<double> sigma);
};

/// The common channel restricted to R_z. Reading outside R_z throws.
class CommonNoiseView {
public:
    CommonNoiseView(const SheetPath& common, NodeIndex z);

    NodeIndex limit() const { return z_; }
    Point point() const { return common_->grid().node(z_); }
    double value(int i, int j) const;
    double value(Point p) const;

private:
    const SheetPath* common_;
    NodeIndex z_;
};

struct ControlPolicy {
    using Rule = std::function<void(Point, const CommonNoiseView&, const EmpiricalMeasure&, std::span<double>)>;

    std::string name;
    double theta = 0.0;
    int d = 1;
    Rule rule;

    /// u = theta.
    static ControlPolicy constant(double theta);
    /// u = theta * mean(mu_z).
    static ControlPolicy mean_feedback(double theta);
};

struct CostSpec {
    std::string name;
    std::function<double(Point, std::span<const double>, std::span<const double>)> running;
    std::function<double(std::span<const double>)> terminal;

    /// l = -(y^2 + lambda u^2), k = -y^2.
    static CostSpec lq(double lambda);
    /// l = -((y - target)^2 + lambda u^2), k = -(y - target)^2.
    static CostSpec tracking(double target, double lambda);
    /// l = c_running, k = c_terminal.
    static CostSpec constant(double c_running, double c_terminal);
};

struct ControlRun {
    int particles = 1;
    Grid grid{{1.0, 1.0}, 16, 16};
    int replicates = 2;
    std::uint64_t seed = 0;
    std::vector<double> y0{1.0};
    int workers = 1;
};

struct PerformanceEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

/// Coefficients with the policy curried in; the policy is evaluated at every
/// node from the restricted common path and the measure handed to the solver.
CoefficientField curry_policy(const ControlledCoefficientField& coeffs, const ControlPolicy& policy,
                              std::shared_ptr<const SheetPath> common);

/// Mean over replicates of the particle average of
/// sum_cells l(z, Y_p, u) dt dx + k(Y_p(T, X)).
PerformanceEstimate performance_direct(const ControlPolicy& policy, const ControlledCoefficientField& coeffs,
                                       const CostSpec& cost, const ControlRun& run);

/// Same replicates, but l and k are integrated against the empirical measure
/// at each node.
PerformanceEstimate performance_measure_based(const ControlPolicy& policy, const ControlledCoefficientField& coeffs,
                                              const CostSpec& cost, const ControlRun& run);

struct PolicyRow {
    double theta = 0.0;
    std::string name;
    PerformanceEstimate direct;
    PerformanceEstimate measure;
};

struct GridSearchResult {
    std::size_t best = 0;  ///< index of the largest J~, first index on ties
    std::vector<PolicyRow> table;
};

/// Every policy sees the same replicate seeds.
GridSearchResult grid_search(const std::vector<ControlPolicy>& policies, const ControlledCoefficientField& coeffs,
                             const CostSpec& cost, const ControlRun& run);

void write_grid_search_csv(const GridSearchResult& result, std::ostream& out);

}  // namespace sheetlab
