#include "sheetlab/ito_check.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

std::size_t ipow(int n, int r) {
    std::size_t v = 1;
    for (int k = 0; k < r; ++k) v *= static_cast<std::size_t>(n);
    return v;
}

// Multi-index of a slot in the stacked [first order | second order] layout.
struct Slot {
    int order;
    int k0;
    int k1;
};

Slot slot(int a, int n) {
    if (a < n) return {1, a, 0};
    return {2, (a - n) / n, (a - n) % n};
}

cplx derivative_at(const Derivatives& d, int n, Slot a, Slot b) {
    int idx[4];
    int r = 0;
    idx[r++] = a.k0;
    if (a.order == 2) idx[r++] = a.k1;
    idx[r++] = b.k0;
    if (b.order == 2) idx[r++] = b.k1;
    std::size_t flat = 0;
    for (int q = 0; q < r; ++q) flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[q]);
    switch (r) {
        case 2: return d.d2[flat];
        case 3: return d.d3[flat];
        default: return d.d4[flat];
    }
}

}  // namespace

Derivatives::Derivatives(int n)
    : d1(ipow(n, 1)), d2(ipow(n, 2)), d3(ipow(n, 3)), d4(ipow(n, 4)) {}

TestFunction TestFunction::constant(int dim, double c) {
    return {"constant", dim, 4, [c](std::span<const double>, Derivatives& d) {
                d.value = c;
                std::fill(d.d1.begin(), d.d1.end(), 0.0);
                std::fill(d.d2.begin(), d.d2.end(), 0.0);
                std::fill(d.d3.begin(), d.d3.end(), 0.0);
                std::fill(d.d4.begin(), d.d4.end(), 0.0);
            }};
}

TestFunction TestFunction::linear(std::vector<double> c) {
    const int n = static_cast<int>(c.size());
    return {"linear", n, 4, [c](std::span<const double> y, Derivatives& d) {
                double v = 0.0;
                for (std::size_t k = 0; k < c.size(); ++k) v += c[k] * y[k];
                d.value = v;
                std::copy(c.begin(), c.end(), d.d1.begin());
                std::fill(d.d2.begin(), d.d2.end(), 0.0);
                std::fill(d.d3.begin(), d.d3.end(), 0.0);
                std::fill(d.d4.begin(), d.d4.end(), 0.0);
            }};
}

TestFunction TestFunction::power(int p) {
    if (p < 0) throw std::invalid_argument("power test function needs p >= 0");
    return {"power" + std::to_string(p), 1, 4, [p](std::span<const double> y, Derivatives& d) {
                // falling factorial p (p-1) ... (p-r+1) y^(p-r)
                auto term = [&](int r) {
                    if (r > p) return 0.0;
                    double c = 1.0;
                    for (int q = 0; q < r; ++q) c *= p - q;
                    return c * std::pow(y[0], p - r);
                };
                d.value = term(0);
                d.d1[0] = term(1);
                d.d2[0] = term(2);
                d.d3[0] = term(3);
                d.d4[0] = term(4);
            }};
}

TestFunction TestFunction::sum_of_squares(int dim) {
    return {"sum_of_squares", dim, 4, [dim](std::span<const double> y, Derivatives& d) {
                double v = 0.0;
                for (int k = 0; k < dim; ++k) {
                    v += y[k] * y[k];
                    d.d1[k] = 2.0 * y[k];
                }
                d.value = v;
                std::fill(d.d2.begin(), d.d2.end(), 0.0);
                for (int k = 0; k < dim; ++k) d.d2[k * dim + k] = 2.0;
                std::fill(d.d3.begin(), d.d3.end(), 0.0);
                std::fill(d.d4.begin(), d.d4.end(), 0.0);
            }};
}

TestFunction TestFunction::cosine() {
    return {"cosine", 1, 4, [](std::span<const double> y, Derivatives& d) {
                const double c = std::cos(y[0]);
                const double s = std::sin(y[0]);
                d.value = c;
                d.d1[0] = -s;
                d.d2[0] = -c;
                d.d3[0] = s;
                d.d4[0] = c;
            }};
}

TestFunction TestFunction::plane_wave(std::vector<double> w) {
    const int n = static_cast<int>(w.size());
    return {"plane_wave", n, 4, [w, n](std::span<const double> y, Derivatives& d) {
                double phase = 0.0;
                for (int k = 0; k < n; ++k) phase += w[k] * y[k];
                const cplx e = std::polar(1.0, -phase);
                const cplx mi{0.0, -1.0};
                d.value = e;
                std::size_t q = 0;
                for (int a = 0; a < n; ++a) d.d1[a] = mi * w[a] * e;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) d.d2[q++] = mi * mi * w[a] * w[b] * e;
                q = 0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int c = 0; c < n; ++c) d.d3[q++] = mi * mi * mi * w[a] * w[b] * w[c] * e;
                q = 0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int c = 0; c < n; ++c)
                            for (int g = 0; g < n; ++g) d.d4[q++] = w[a] * w[b] * w[c] * w[g] * e;
            }};
}

ItoTermReport ito_terms(const TestFunction& f, const CoefficientField& coeffs, const StateField& field,
                        const SheetPath& sheet, Point z, const MeasureSource& measure_source) {
    coeffs.validate();
    if (!f.eval) throw std::invalid_argument("test function has no evaluator");
    if (f.max_order < 4) throw std::invalid_argument("test function " + f.name + " supplies derivatives only up to order " +
                                                     std::to_string(f.max_order) + "; the check needs 4");
    if (f.dim != coeffs.n || field.dim() != coeffs.n) throw std::invalid_argument("test function dimension mismatch");
    if (sheet.channels() != coeffs.m) throw std::invalid_argument("sheet channel count mismatch");
    if (!(field.grid() == sheet.grid())) throw std::invalid_argument("field and sheet grids differ");
    if (coeffs.depends_on_measure && !measure_source)
        throw std::invalid_argument("coefficients depend on the measure but no measure source was given");

    const Grid& grid = sheet.grid();
    const NodeIndex zi = grid.node_index(z);
    const int n = coeffs.n;
    const int m = coeffs.m;
    const int n1 = n + n * n;
    const double dA = grid.cell_area();
    const std::size_t cells = static_cast<std::size_t>(grid.nt()) * grid.nx();

    std::vector<cplx> D(cells * n);
    std::vector<cplx> U(cells * n1);
    std::vector<cplx> H(grid.node_count() * n1 * n1);
    std::vector<cplx> H4(grid.node_count() * n * n);
    std::vector<cplx> H5(grid.node_count() * n1 * n);
    std::vector<cplx> H6(grid.node_count() * n * n1);

    std::vector<double> alpha(n), beta(static_cast<std::size_t>(n * m)), Q(static_cast<std::size_t>(n * n));
    Derivatives d(n);
    ItoTermReport r;
    for (int i = 0; i < zi.i; ++i)
        for (int j = 0; j < zi.j; ++j) {
            const Point p = grid.node(i, j);
            const auto y = field.at(i, j);
            const EmpiricalMeasure* mu = coeffs.depends_on_measure ? measure_source(i, j) : nullptr;
            coeffs.drift(p, y, mu, alpha);
            coeffs.diffusion(p, y, mu, beta);
            f.eval(y, d);
            const std::size_t c = static_cast<std::size_t>(i) * grid.nx() + j;
            for (int k = 0; k < n; ++k) {
                double dk = 0.0;
                for (int l = 0; l < m; ++l) dk += beta[k * m + l] * sheet.cell_increment(l, i, j);
                D[c * n + k] = dk;
                for (int l = 0; l < n; ++l) {
                    double q = 0.0;
                    for (int s = 0; s < m; ++s) q += beta[k * m + s] * beta[l * m + s];
                    Q[k * n + l] = q;
                }
            }
            for (int k = 0; k < n; ++k) {
                r.T1 += d.d1[k] * alpha[k] * dA;
                r.T2 += d.d1[k] * D[c * n + k];
                for (int l = 0; l < n; ++l) r.T3 += 0.5 * d.d2[k * n + l] * Q[k * n + l] * dA;
            }
            for (int k = 0; k < n; ++k) U[c * n1 + k] = alpha[k] * dA;
            for (int kl = 0; kl < n * n; ++kl) U[c * n1 + n + kl] = 0.5 * Q[kl] * dA;

            const std::size_t node = grid.flat(i, j);
            for (int a = 0; a < n1; ++a)
                for (int b = 0; b < n1; ++b) {
                    const cplx v = derivative_at(d, n, slot(a, n), slot(b, n));
                    H[node * n1 * n1 + a * n1 + b] = v;
                    if (b < n) H5[node * n1 * n + a * n + b] = v;
                    if (a < n) H6[node * n * n1 + a * n1 + b] = v;
                    if (a < n && b < n) H4[node * n * n + a * n + b] = v;
                }
        }

    using S = std::span<const cplx>;
    r.T4 = quarter_pair_contract<cplx>(grid, zi, S(H4), S(D), n, S(D), n);
    r.T5 = quarter_pair_contract<cplx>(grid, zi, S(H5), S(U), n1, S(D), n);
    r.T6 = quarter_pair_contract<cplx>(grid, zi, S(H6), S(D), n, S(U), n1);
    r.T7 = quarter_pair_contract<cplx>(grid, zi, S(H), S(U), n1, S(U), n1);
    r.sum = r.T1 + r.T2 + r.T3 + r.T4 + r.T5 + r.T6 + r.T7;

    Derivatives end(n);
    f.eval(field.at(zi.i, zi.j), end);
    f.eval(field.at(0, 0), d);
    r.lhs = end.value - d.value;
    r.residual = std::abs(r.lhs - r.sum);
    return r;
}

RefinementStudy ito_refinement_study(const TestFunction& f, const CoefficientField& coeffs, std::span<const double> y0,
                                     Point z, const std::vector<Grid>& grids, int replications, std::uint64_t seed,
                                     int workers) {
    if (grids.size() < 2) throw std::invalid_argument("refinement study needs at least two grids");
    if (replications < 2) throw std::invalid_argument("refinement study needs at least two replications");
    if (coeffs.depends_on_measure) throw std::invalid_argument("refinement study needs measure-free coefficients");
    const Grid& finest = grids.back();
    for (const Grid& g : grids)
        if (!(g.horizon() == finest.horizon())) throw std::invalid_argument("refinement grids need one horizon");

    const std::vector<std::vector<double>> residuals =
        parallel_map(static_cast<std::size_t>(replications), workers, [&](std::size_t rep) {
            const std::uint64_t key = derive_seed(seed, {rep});
            const SheetPath fine = sample_sheet(finest, coeffs.m, key);
            std::vector<double> out;
            out.reserve(grids.size());
            for (const Grid& g : grids) {
                const bool nested = finest.nt() % g.nt() == 0 && finest.nx() % g.nx() == 0 &&
                                    finest.nt() / g.nt() == finest.nx() / g.nx();
                const SheetPath sheet = nested ? fine.coarsened(finest.nt() / g.nt()) : sample_sheet(g, coeffs.m, key);
                const StateField field = solve_goursat(coeffs, y0, sheet);
                out.push_back(ito_terms(f, coeffs, field, sheet, z).residual);
            }
            return out;
        });

    RefinementStudy study;
    const double R = static_cast<double>(replications);
    for (std::size_t g = 0; g < grids.size(); ++g) {
        double s = 0.0;
        double s2 = 0.0;
        for (const auto& row : residuals) {
            s += row[g];
            s2 += row[g] * row[g];
            study.max_residual = std::max(study.max_residual, row[g]);
        }
        const double mean = s / R;
        const double var = std::max(0.0, (s2 - R * mean * mean) / (R - 1.0));
        study.rows.push_back({grids[g].nt(), grids[g].nx(), mean, std::sqrt(var / R)});
    }
    study.decreasing = true;
    for (std::size_t g = 1; g < study.rows.size(); ++g)
        if (!(study.rows[g].mean_residual < study.rows[g - 1].mean_residual)) study.decreasing = false;
    return study;
}

void write_refinement_csv(const RefinementStudy& study, std::ostream& out) {
    out.precision(10);
    out << "nt,nx,mean_residual,stderr\n";
    for (const auto& row : study.rows)
        out << row.nt << ',' << row.nx << ',' << row.mean_residual << ',' << row.stderr_residual << '\n';
}

}  // namespace sheetlab
