#pragma once

// Weighted point clouds on R^n, their Fourier transforms, and the
// Gaussian-weighted L2 distance between transforms (the M-norm).

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace sheetlab {

/// M atoms in R^dim with nonnegative weights summing to 1 (within 1e-12).
class EmpiricalMeasure {
public:
    /// `samples` is row-major M x dim.
    EmpiricalMeasure(int dim, std::vector<double> samples, std::vector<double> weights);

    /// Equal weights 1/M.
    static EmpiricalMeasure uniform(int dim, std::vector<double> samples);
    static EmpiricalMeasure dirac(std::span<const double> point);

    int dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> sample(std::size_t k) const {
        return {samples_.data() + k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<const double> samples() const { return samples_; }
    std::span<const double> weights() const { return weights_; }

    /// Weighted mean of coordinate k (computed once at construction).
    double mean(int k = 0) const { return means_.at(static_cast<std::size_t>(k)); }

private:
    int dim_;
    std::vector<double> samples_;
    std::vector<double> weights_;
    std::vector<double> means_;
};

/// Tensor Gauss-Hermite rule for int g(y) exp(-|y|^2) dy over R^dim.
class MQuadrature {
public:
    explicit MQuadrature(int dim, int order = 40);

    int dim() const { return dim_; }
    int order() const { return order_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> node(std::size_t k) const {
        return {nodes_.data() + k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    double weight(std::size_t k) const { return weights_[k]; }

    template <class G>
    double integrate(G&& g) const {
        double sum = 0.0;
        for (std::size_t k = 0; k < size(); ++k) sum += weights_[k] * g(node(k));
        return sum;
    }

private:
    int dim_;
    int order_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// sum_k weight_k exp(-i <w, sample_k>).
std::complex<double> fourier(const EmpiricalMeasure& mu, std::span<const double> w);

double m_norm_sq(const EmpiricalMeasure& mu, const MQuadrature& quad);
double m_dist_sq(const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2, const MQuadrature& quad);
double m_inner(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta, const MQuadrature& quad);

/// Mean squared gap of sorted samples; 1-D, equal weights, equal sizes.
double wasserstein2_sq_1d(const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2);

/// One replicate of coupled draws: row k of `first` and `second` (M x dim,
/// row-major) are a coupled pair (Y1, Y2).
struct CoupledSample {
    int dim = 1;
    std::vector<double> first;
    std::vector<double> second;
};

struct EstReport {
    double lhs = 0.0;  ///< replicate mean of ||mu1 - mu2||_M^2
    double rhs = 0.0;  ///< pi * E|Y1 - Y2|^2
    double slack = 0.0;
    bool holds = false;  ///< lhs <= rhs * (1 + slack)
};

EstReport est_inequality_check(std::span<const CoupledSample> replicates, const MQuadrature& quad,
                               double slack = 0.02);

/// CSV with one row per atom: dim coordinates then the weight.
void write_measure_csv(const EmpiricalMeasure& mu, std::ostream& out);
EmpiricalMeasure read_measure_csv(std::istream& in);
void save_measure_csv(const EmpiricalMeasure& mu, const std::filesystem::path& file);
EmpiricalMeasure load_measure_csv(const std::filesystem::path& file);

}  // namespace sheetlab
