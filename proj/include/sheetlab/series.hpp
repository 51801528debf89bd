#pragma once

// The entire function f(y) = sum_n y^n / (n!)^2 (so f(-t) = J0(2 sqrt t)), its
// first zero r0 on the negative axis, and the majorant sequence x_n of the
// two-parameter Picard argument.

#include <vector>

namespace sheetlab {

struct SeriesConfig {
    int truncation_terms = 60;
    double tail_tol = 1e-14;
};

/// f(y) by recursive term update term_n = term_{n-1} * y / n^2. Throws for
/// |y| > 700 or an invalid config.
double f_series(double y, const SeriesConfig& cfg = {});

/// f'(y) = sum_{n>=1} n y^{n-1} / (n!)^2.
double f_series_derivative(double y, const SeriesConfig& cfg = {});

/// f''(y) = sum_{n>=2} n (n-1) y^{n-2} / (n!)^2.
double f_series_second_derivative(double y, const SeriesConfig& cfg = {});

/// Root of t -> f(-t) on [1, 2] by bisection until the bracket is narrower
/// than tol. Throws std::runtime_error if f(-1) > 0 > f(-2) fails.
double find_r0(double tol);

/// x_0 = 1, x_n = -sum_{j=1}^n (-1)^j / (j!)^2 x_{n-j}; returns x_0..x_{n_max}.
std::vector<double> x_seq(int n_max);

struct PicardSeriesReport {
    std::vector<double> partial_sums;  ///< S_0..S_{n_max}
    double last_increment = 0.0;       ///< |S_{n_max} - S_{n_max-1}|
    double term_ratio = 0.0;           ///< term_{n_max} / term_{n_max-1}
    bool converging = false;           ///< term ratio below 1 and sums stay bounded
    bool diverged = false;             ///< some partial sum exceeded 1e6
};

/// Partial sums of sum_n (K * area)^(2n) x_n.
PicardSeriesReport picard_series_partial_sums(double K, double area, int n_max);

}  // namespace sheetlab
