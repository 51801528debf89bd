#include "sheetlab/measures.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sheetlab {

namespace {

constexpr double kWeightTol = 1e-12;

void require_same_dim(int a, int b) {
    if (a != b) throw std::invalid_argument("measure dimensions differ");
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(int dim, std::vector<double> samples, std::vector<double> weights)
    : dim_(dim), samples_(std::move(samples)), weights_(std::move(weights)) {
    if (dim_ < 1) throw std::invalid_argument("measure dimension must be >= 1");
    if (weights_.empty()) throw std::invalid_argument("empirical measure needs at least one atom");
    if (samples_.size() != weights_.size() * static_cast<std::size_t>(dim_))
        throw std::invalid_argument("sample count does not match weights and dimension");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightTol) throw std::invalid_argument("weights must sum to 1");
    means_.assign(static_cast<std::size_t>(dim_), 0.0);
    for (std::size_t a = 0; a < weights_.size(); ++a)
        for (int k = 0; k < dim_; ++k) means_[k] += weights_[a] * samples_[a * dim_ + k];
}

EmpiricalMeasure EmpiricalMeasure::uniform(int dim, std::vector<double> samples) {
    if (dim < 1 || samples.empty() || samples.size() % static_cast<std::size_t>(dim) != 0)
        throw std::invalid_argument("sample array does not hold whole points");
    const std::size_t m = samples.size() / static_cast<std::size_t>(dim);
    return EmpiricalMeasure(dim, std::move(samples), std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::span<const double> point) {
    return EmpiricalMeasure(static_cast<int>(point.size()), {point.begin(), point.end()}, {1.0});
}

MQuadrature::MQuadrature(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1) throw std::invalid_argument("quadrature dimension must be >= 1");
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    // alpha = 0, a = 0, b = 1: weight exp(-x^2) on the real line.
    std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
        gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, static_cast<std::size_t>(order), 0.0,
                                    1.0, 0.0, 0.0),
        &gsl_integration_fixed_free);
    if (!ws) throw std::runtime_error("Gauss-Hermite rule allocation failed");
    const double* x = gsl_integration_fixed_nodes(ws.get());
    const double* w = gsl_integration_fixed_weights(ws.get());

    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(order);
    nodes_.resize(total * static_cast<std::size_t>(dim));
    weights_.resize(total);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (std::size_t k = 0; k < total; ++k) {
        double weight = 1.0;
        for (int d = 0; d < dim; ++d) {
            nodes_[k * dim + d] = x[idx[d]];
            weight *= w[idx[d]];
        }
        weights_[k] = weight;
        for (int d = dim - 1; d >= 0; --d) {
            if (++idx[d] < order) break;
            idx[d] = 0;
        }
    }
}

std::complex<double> fourier(const EmpiricalMeasure& mu, std::span<const double> w) {
    if (static_cast<int>(w.size()) != mu.dim()) throw std::invalid_argument("frequency dimension mismatch");
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const auto s = mu.sample(k);
        double phase = 0.0;
        for (int d = 0; d < mu.dim(); ++d) phase += w[d] * s[d];
        re += mu.weights()[k] * std::cos(phase);
        im -= mu.weights()[k] * std::sin(phase);
    }
    return {re, im};
}

double m_norm_sq(const EmpiricalMeasure& mu, const MQuadrature& quad) {
    require_same_dim(mu.dim(), quad.dim());
    return quad.integrate([&](std::span<const double> y) { return std::norm(fourier(mu, y)); });
}

double m_dist_sq(const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2, const MQuadrature& quad) {
    require_same_dim(mu1.dim(), mu2.dim());
    require_same_dim(mu1.dim(), quad.dim());
    return quad.integrate(
        [&](std::span<const double> y) { return std::norm(fourier(mu1, y) - fourier(mu2, y)); });
}

double m_inner(const EmpiricalMeasure& mu, const EmpiricalMeasure& eta, const MQuadrature& quad) {
    require_same_dim(mu.dim(), eta.dim());
    require_same_dim(mu.dim(), quad.dim());
    return quad.integrate(
        [&](std::span<const double> y) { return std::real(std::conj(fourier(mu, y)) * fourier(eta, y)); });
}

double wasserstein2_sq_1d(const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
    if (mu1.dim() != 1 || mu2.dim() != 1) throw std::invalid_argument("wasserstein2_sq_1d needs 1-D measures");
    if (mu1.size() != mu2.size()) throw std::invalid_argument("wasserstein2_sq_1d needs equal sample counts");
    const double w0 = 1.0 / static_cast<double>(mu1.size());
    for (const auto* mu : {&mu1, &mu2})
        for (double w : mu->weights())
            if (std::abs(w - w0) > kWeightTol) throw std::invalid_argument("wasserstein2_sq_1d needs equal weights");
    std::vector<double> a(mu1.samples().begin(), mu1.samples().end());
    std::vector<double> b(mu2.samples().begin(), mu2.samples().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s * w0;
}

EstReport est_inequality_check(std::span<const CoupledSample> replicates, const MQuadrature& quad,
                               double slack) {
    if (replicates.empty()) throw std::invalid_argument("est_inequality_check needs at least one replicate");
    EstReport report;
    report.slack = slack;
    double gap = 0.0;
    for (const CoupledSample& rep : replicates) {
        if (rep.first.size() != rep.second.size() || rep.first.empty())
            throw std::invalid_argument("coupled samples must have equal, nonzero size");
        const auto mu1 = EmpiricalMeasure::uniform(rep.dim, rep.first);
        const auto mu2 = EmpiricalMeasure::uniform(rep.dim, rep.second);
        report.lhs += m_dist_sq(mu1, mu2, quad);
        double sq = 0.0;
        for (std::size_t k = 0; k < rep.first.size(); ++k)
            sq += (rep.first[k] - rep.second[k]) * (rep.first[k] - rep.second[k]);
        gap += sq / static_cast<double>(mu1.size());
    }
    const double reps = static_cast<double>(replicates.size());
    report.lhs /= reps;
    report.rhs = std::numbers::pi * gap / reps;
    report.holds = report.lhs <= report.rhs * (1.0 + slack);
    return report;
}

void write_measure_csv(const EmpiricalMeasure& mu, std::ostream& out) {
    out.precision(17);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        for (double v : mu.sample(k)) out << v << ',';
        out << mu.weights()[k] << '\n';
    }
}

EmpiricalMeasure read_measure_csv(std::istream& in) {
    std::vector<double> samples;
    std::vector<double> weights;
    int dim = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            row.push_back(std::stod(cell, &used));
        }
        if (row.size() < 2) throw std::runtime_error("measure CSV row needs coordinates and a weight");
        const int d = static_cast<int>(row.size()) - 1;
        if (dim >= 0 && d != dim) throw std::runtime_error("measure CSV rows have different widths");
        dim = d;
        samples.insert(samples.end(), row.begin(), row.end() - 1);
        weights.push_back(row.back());
    }
    if (dim < 0) throw std::runtime_error("measure CSV has no rows");
    return EmpiricalMeasure(dim, std::move(samples), std::move(weights));
}

void save_measure_csv(const EmpiricalMeasure& mu, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file.string());
    write_measure_csv(mu, out);
}

EmpiricalMeasure load_measure_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    return read_measure_csv(in);
}

}  // namespace sheetlab
