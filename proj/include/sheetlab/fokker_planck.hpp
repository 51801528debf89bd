#pragma once

// Fourier-side check of the conditional-law equation: for psi(y) = exp(-i w.y)
// the characteristic function of the conditional law satisfies an integral
// equation whose integrands are the kernels a1..a5 below times the particle
// average of psi at the relevant node. Also the scalar differentiation
// identity for double integrals over quarter-ordered pairs.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sheetlab/plane.hpp"
#include "sheetlab/solver.hpp"

namespace sheetlab {

using cplx = std::complex<double>;

/// Finite list of test frequencies in R^dim.
class FrequencyGrid {
public:
    FrequencyGrid(int dim, std::vector<std::vector<double>> frequencies);

    /// 1-D frequencies {0, +-v for v in values}.
    static FrequencyGrid symmetric_1d(const std::vector<double>& values);

    int dim() const { return dim_; }
    std::size_t size() const { return w_.size(); }
    std::span<const double> operator[](std::size_t k) const { return w_[k]; }
    bool has_zero() const;

private:
    int dim_;
    std::vector<std::vector<double>> w_;
};

/// Coefficient values at a node zeta and, for the pair kernels, at zeta'.
/// beta is n x m row-major; column 0 is the common channel.
struct KernelSide {
    Point at;
    std::vector<double> alpha;
    std::vector<double> beta;
};

struct KernelContext {
    int n = 1;
    int m = 1;
    KernelSide zeta;
    std::optional<KernelSide> zeta_prime;
};

/// a1 = -i w.alpha - (1/2) w^T beta beta^T w
/// a2 = -i w.beta_{.,1}
/// a3 = a2(zeta) a2(zeta')
/// a4 = a1(zeta) a2(zeta') + a2(zeta) a1(zeta')
/// a5 = I(zeta quarter-order zeta') a1(zeta) a1(zeta')
cplx kernel_a(int idx, std::span<const double> w, const KernelContext& ctx);

struct WeakResidualTerms {
    cplx lhs;     ///< mean_p psi(Y_p(z)) - mean_p psi(Y_p(0))
    cplx drift;   ///< a1 terms
    cplx noise;   ///< a2 against the common channel
    cplx noise2;  ///< a3 over quarter pairs
    cplx mixed;   ///< both a4 halves
    cplx drift2;  ///< a5 over quarter pairs
    cplx rhs;
    cplx residual;  ///< lhs - rhs
};

/// Residual of the integral equation at z. Every integrand is the particle
/// average of kernel * psi(Y_p(c v c')), with lower-corner evaluation and
/// identical-cell pairs excluded from the pair sums.
cplx weak_residual(const ParticleEnsemble& ensemble, std::span<const double> w, Point z);

/// All frequencies at once; coefficients are evaluated a single time.
std::vector<WeakResidualTerms> weak_residual_terms(const ParticleEnsemble& ensemble, const FrequencyGrid& freqs,
                                                   Point z);

struct Lemma61Report {
    double lhs = 0.0;  ///< mixed difference of the quarter-ordered double integral
    double rhs = 0.0;  ///< int_0^t f(s, x) ds * int_0^x g(t, a) da
    double residual = 0.0;
};

/// G(z) = int int_{R_z x R_z} I(zeta quarter-order zeta') f(zeta) g(zeta') by a
/// midpoint rule with grid.nt() x grid.nx() cells scaled to each R_z (pairs in
/// one row or column weighted 1/2 per tied axis), differenced with step h.
Lemma61Report lemma61_scalar_check(const std::function<double(Point)>& fker, const std::function<double(Point)>& gker,
                                   Point z, const Grid& grid, double h);

}  // namespace sheetlab
