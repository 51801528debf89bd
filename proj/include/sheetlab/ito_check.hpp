#pragma once

// Term-by-term check of the planar Ito formula on a solved Goursat field:
//
//   f(Y(z)) - f(Y(0)) = T1 + ... + T7
//
// T1 drift, T2 single stochastic, T3 (1/2) beta beta^T correction, T4 double
// stochastic, T5/T6 mixed drift-noise, T7 double drift. The double terms run
// over distinct cell pairs in quarter order with f's derivatives taken at
// Y(c v c').

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sheetlab/noise.hpp"
#include "sheetlab/solver.hpp"

namespace sheetlab {

using cplx = std::complex<double>;

/// Value and derivative tensors of f at one point; d_r is the order-r tensor
/// flattened row-major (size n^r).
struct Derivatives {
    cplx value;
    std::vector<cplx> d1, d2, d3, d4;

    explicit Derivatives(int n = 1);
};

/// Smooth test function with analytic derivatives through `max_order`.
struct TestFunction {
    std::string name;
    int dim = 1;
    int max_order = 4;
    std::function<void(std::span<const double>, Derivatives&)> eval;

    static TestFunction constant(int dim, double c);
    static TestFunction linear(std::vector<double> c);
    /// y^p on R.
    static TestFunction power(int p);
    /// sum_k y_k^2.
    static TestFunction sum_of_squares(int dim);
    /// cos(y) on R.
    static TestFunction cosine();
    /// exp(-i <w, y>).
    static TestFunction plane_wave(std::vector<double> w);
};

struct ItoTermReport {
    cplx T1, T2, T3, T4, T5, T6, T7;
    cplx sum;
    cplx lhs;
    double residual = 0.0;  ///< |lhs - sum|
};

/// `field` must solve the Goursat recursion for `coeffs` on `sheet`;
/// `measure_source` is required for measure-dependent coefficients.
ItoTermReport ito_terms(const TestFunction& f, const CoefficientField& coeffs, const StateField& field,
                        const SheetPath& sheet, Point z, const MeasureSource& measure_source = {});

struct RefinementRow {
    int nt = 0;
    int nx = 0;
    double mean_residual = 0.0;
    double stderr_residual = 0.0;
};

struct RefinementStudy {
    std::vector<RefinementRow> rows;
    double max_residual = 0.0;  ///< over every grid and replication
    bool decreasing = false;    ///< mean residual strictly decreasing down the rows
};

/// Replication r samples one sheet from substream (seed, r) on the finest grid
/// and restricts it to every coarser grid (grids whose counts divide the
/// finest ones), so the rows are coupled. Coefficients must not depend on the
/// measure.
RefinementStudy ito_refinement_study(const TestFunction& f, const CoefficientField& coeffs, std::span<const double> y0,
                                     Point z, const std::vector<Grid>& grids, int replications, std::uint64_t seed,
                                     int workers = 1);

void write_refinement_csv(const RefinementStudy& study, std::ostream& out);

}  // namespace sheetlab
