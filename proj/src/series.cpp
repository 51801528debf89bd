#include "sheetlab/series.hpp"

#include <cmath>
#include <stdexcept>

namespace sheetlab {

namespace {

constexpr double kMaxAbsArgument = 700.0;
constexpr double kDivergenceBound = 1e6;

void check(double y, const SeriesConfig& cfg) {
    if (cfg.truncation_terms < 10) throw std::invalid_argument("truncation_terms must be >= 10");
    if (!(cfg.tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be positive");
    if (!(std::abs(y) <= kMaxAbsArgument)) throw std::invalid_argument("f_series argument outside [-700, 700]");
}

// sum_{n>=shift} c_n y^{n-shift} / (n!)^2 with c_n = n!/(n-shift)!, which is
// the shift-th derivative of f.
double derivative_series(double y, int shift, const SeriesConfig& cfg) {
    check(y, cfg);
    // leading term: shift! / (shift!)^2 = 1 / shift!
    double term = 1.0;
    for (int k = 2; k <= shift; ++k) term /= k;
    double sum = term;
    for (int k = 1; k < cfg.truncation_terms; ++k) {
        const int n = shift + k;
        term *= y / (static_cast<double>(n) * k);
        sum += term;
        if (std::abs(term) < cfg.tail_tol * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

double f_series(double y, const SeriesConfig& cfg) { return derivative_series(y, 0, cfg); }

double f_series_derivative(double y, const SeriesConfig& cfg) { return derivative_series(y, 1, cfg); }

double f_series_second_derivative(double y, const SeriesConfig& cfg) {
    return derivative_series(y, 2, cfg);
}

double find_r0(double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("find_r0 tolerance must be positive");
    double lo = 1.0;
    double hi = 2.0;
    const double flo = f_series(-lo);
    if (!(flo > 0.0 && f_series(-hi) < 0.0))
        throw std::runtime_error("find_r0: f(-t) does not change sign on [1, 2]");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (f_series(-mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> x_seq(int n_max) {
    if (n_max < 0) throw std::invalid_argument("x_seq needs n_max >= 0");
    std::vector<double> c(static_cast<std::size_t>(n_max) + 1);
    c[0] = 1.0;
    for (int j = 1; j <= n_max; ++j) c[j] = -c[j - 1] / (static_cast<double>(j) * j);
    std::vector<double> x(c.size());
    x[0] = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        double s = 0.0;
        for (int j = 1; j <= n; ++j) s += c[j] * x[n - j];
        x[n] = -s;
    }
    return x;
}

PicardSeriesReport picard_series_partial_sums(double K, double area, int n_max) {
    if (!(K >= 0.0) || !(area >= 0.0)) throw std::invalid_argument("K and area must be nonnegative");
    const std::vector<double> x = x_seq(n_max);
    const double r = (K * area) * (K * area);
    PicardSeriesReport report;
    report.partial_sums.reserve(x.size());
    double power = 1.0;
    double sum = 0.0;
    double prev_term = 0.0;
    double term = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        prev_term = term;
        term = power * x[n];
        sum += term;
        report.partial_sums.push_back(sum);
        if (std::abs(sum) > kDivergenceBound) report.diverged = true;
        power *= r;
    }
    if (n_max >= 1) {
        report.last_increment = std::abs(term);
        report.term_ratio = prev_term != 0.0 ? term / prev_term : 0.0;
    }
    report.converging = !report.diverged && report.term_ratio < 1.0;
    return report;
}

}  // namespace sheetlab
