#include "sheetlab/fokker_planck.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sheetlab {

namespace {

const cplx kMinusI{0.0, -1.0};

cplx a1_of(std::span<const double> w, int n, int m, std::span<const double> alpha, std::span<const double> beta) {
    double drift = 0.0;
    double quad = 0.0;
    for (int k = 0; k < n; ++k) drift += w[k] * alpha[k];
    for (int l = 0; l < m; ++l) {
        double wb = 0.0;
        for (int k = 0; k < n; ++k) wb += w[k] * beta[k * m + l];
        quad += wb * wb;
    }
    return kMinusI * drift - 0.5 * quad;
}

cplx a2_of(std::span<const double> w, int n, int m, std::span<const double> beta) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += w[k] * beta[k * m];
    return kMinusI * s;
}

void check_side(const KernelSide& s, int n, int m) {
    if (static_cast<int>(s.alpha.size()) != n || static_cast<int>(s.beta.size()) != n * m)
        throw std::invalid_argument("kernel context shapes do not match n and m");
}

}  // namespace

FrequencyGrid::FrequencyGrid(int dim, std::vector<std::vector<double>> frequencies)
    : dim_(dim), w_(std::move(frequencies)) {
    if (dim_ < 1) throw std::invalid_argument("frequency dimension must be >= 1");
    if (w_.empty()) throw std::invalid_argument("frequency grid must be nonempty");
    for (const auto& w : w_)
        if (static_cast<int>(w.size()) != dim_) throw std::invalid_argument("frequency has wrong dimension");
}

FrequencyGrid FrequencyGrid::symmetric_1d(const std::vector<double>& values) {
    std::vector<std::vector<double>> w{{0.0}};
    for (double v : values) {
        w.push_back({v});
        w.push_back({-v});
    }
    return FrequencyGrid(1, std::move(w));
}

bool FrequencyGrid::has_zero() const {
    for (const auto& w : w_) {
        bool zero = true;
        for (double v : w) zero = zero && v == 0.0;
        if (zero) return true;
    }
    return false;
}

cplx kernel_a(int idx, std::span<const double> w, const KernelContext& ctx) {
    if (idx < 1 || idx > 5) throw std::invalid_argument("kernel index must be in 1..5");
    if (static_cast<int>(w.size()) != ctx.n) throw std::invalid_argument("frequency dimension mismatch");
    check_side(ctx.zeta, ctx.n, ctx.m);
    const auto& s = ctx.zeta;
    if (idx == 1) return a1_of(w, ctx.n, ctx.m, s.alpha, s.beta);
    if (idx == 2) return a2_of(w, ctx.n, ctx.m, s.beta);
    if (!ctx.zeta_prime) throw std::invalid_argument("kernel a" + std::to_string(idx) + " needs zeta' data");
    const auto& sp = *ctx.zeta_prime;
    check_side(sp, ctx.n, ctx.m);
    switch (idx) {
        case 3: return a2_of(w, ctx.n, ctx.m, s.beta) * a2_of(w, ctx.n, ctx.m, sp.beta);
        case 4:
            return a1_of(w, ctx.n, ctx.m, s.alpha, s.beta) * a2_of(w, ctx.n, ctx.m, sp.beta) +
                   a2_of(w, ctx.n, ctx.m, s.beta) * a1_of(w, ctx.n, ctx.m, sp.alpha, sp.beta);
        default:
            return static_cast<double>(quarter_indicator(s.at, sp.at)) * a1_of(w, ctx.n, ctx.m, s.alpha, s.beta) *
                   a1_of(w, ctx.n, ctx.m, sp.alpha, sp.beta);
    }
}

cplx weak_residual(const ParticleEnsemble& ensemble, std::span<const double> w, Point z) {
    const FrequencyGrid freqs(static_cast<int>(w.size()), {{w.begin(), w.end()}});
    return weak_residual_terms(ensemble, freqs, z).front().residual;
}

std::vector<WeakResidualTerms> weak_residual_terms(const ParticleEnsemble& ensemble, const FrequencyGrid& freqs,
                                                   Point z) {
    const CoefficientField& coeffs = ensemble.coefficients();
    const int n = coeffs.n;
    const int m = coeffs.m;
    if (freqs.dim() != n) throw std::invalid_argument("frequency dimension does not match state dimension");
    const Grid& grid = ensemble.grid();
    const NodeIndex zi = grid.node_index(z);
    const std::size_t M = ensemble.size();
    const std::size_t cells = static_cast<std::size_t>(grid.nt()) * grid.nx();
    const double dA = grid.cell_area();
    const auto cell = [&](int i, int j) { return static_cast<std::size_t>(i) * grid.nx() + j; };

    // Coefficients for every particle and cell of R_z.
    const std::size_t per_cell = static_cast<std::size_t>(n + n * m);
    std::vector<double> coef(M * cells * per_cell);
    {
        std::vector<std::optional<EmpiricalMeasure>> mu(cells);
        if (coeffs.depends_on_measure)
            for (int i = 0; i < zi.i; ++i)
                for (int j = 0; j < zi.j; ++j) mu[cell(i, j)] = ensemble.measure_at(i, j);
        for (std::size_t p = 0; p < M; ++p)
            for (int i = 0; i < zi.i; ++i)
                for (int j = 0; j < zi.j; ++j) {
                    double* base = &coef[(p * cells + cell(i, j)) * per_cell];
                    const auto y = ensemble.particle(p).at(i, j);
                    const EmpiricalMeasure* m_ij = coeffs.depends_on_measure ? &*mu[cell(i, j)] : nullptr;
                    coeffs.drift(grid.node(i, j), y, m_ij, {base, static_cast<std::size_t>(n)});
                    coeffs.diffusion(grid.node(i, j), y, m_ij, {base + n, static_cast<std::size_t>(n * m)});
                }
    }

    std::vector<WeakResidualTerms> out(freqs.size());
    std::vector<cplx> E(grid.node_count());
    std::vector<cplx> A1(cells);
    std::vector<cplx> A2(cells);
    using S = std::span<const cplx>;
    for (std::size_t q = 0; q < freqs.size(); ++q) {
        const auto w = freqs[q];
        WeakResidualTerms acc;
        for (std::size_t p = 0; p < M; ++p) {
            const StateField& y = ensemble.particle(p);
            auto psi = [&](int i, int j) {
                double phase = 0.0;
                const auto v = y.at(i, j);
                for (int k = 0; k < n; ++k) phase += w[k] * v[k];
                return std::polar(1.0, -phase);
            };
            for (int i = 0; i < zi.i; ++i)
                for (int j = 0; j < zi.j; ++j) {
                    const std::size_t c = cell(i, j);
                    const double* base = &coef[(p * cells + c) * per_cell];
                    const std::span<const double> alpha(base, static_cast<std::size_t>(n));
                    const std::span<const double> beta(base + n, static_cast<std::size_t>(n * m));
                    const cplx e = psi(i, j);
                    E[grid.flat(i, j)] = e;
                    const cplx a1 = a1_of(w, n, m, alpha, beta);
                    const cplx a2 = a2_of(w, n, m, beta);
                    const double dB = ensemble.cell_increment(p, 0, i, j);
                    A1[c] = a1 * dA;
                    A2[c] = a2 * dB;
                    acc.drift += A1[c] * e;
                    acc.noise += A2[c] * e;
                }
            acc.noise2 += quarter_pair_contract<cplx>(grid, zi, S(E), S(A2), 1, S(A2), 1);
            acc.mixed += quarter_pair_contract<cplx>(grid, zi, S(E), S(A1), 1, S(A2), 1) +
                         quarter_pair_contract<cplx>(grid, zi, S(E), S(A2), 1, S(A1), 1);
            acc.drift2 += quarter_pair_contract<cplx>(grid, zi, S(E), S(A1), 1, S(A1), 1);
            acc.lhs += psi(zi.i, zi.j) - psi(0, 0);
        }
        const double inv = 1.0 / static_cast<double>(M);
        acc.lhs *= inv;
        acc.drift *= inv;
        acc.noise *= inv;
        acc.noise2 *= inv;
        acc.mixed *= inv;
        acc.drift2 *= inv;
        acc.rhs = acc.drift + acc.noise + acc.noise2 + acc.mixed + acc.drift2;
        acc.residual = acc.lhs - acc.rhs;
        out[q] = acc;
    }
    return out;
}

Lemma61Report lemma61_scalar_check(const std::function<double(Point)>& fker, const std::function<double(Point)>& gker,
                                   Point z, const Grid& grid, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    const int nt = grid.nt();
    const int nx = grid.nx();

    // Quarter-ordered double midpoint sum over R_zp x R_zp.
    auto G = [&](Point zp) {
        const double dt = zp.t / nt;
        const double dx = zp.x / nx;
        std::vector<double> f(static_cast<std::size_t>(nt) * nx);
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < nx; ++j) f[i * nx + j] = fker({(i + 0.5) * dt, (j + 0.5) * dx});
        std::vector<double> colpre(static_cast<std::size_t>(nx), 0.0);  // sum over rows i < i'
        double total = 0.0;
        for (int ip = 0; ip < nt; ++ip) {
            double suffix = 0.0;  // sum over j > j' of colpre[j] + f(ip, j) / 2
            for (int jp = nx - 1; jp >= 0; --jp) {
                const double weight = suffix + 0.5 * colpre[jp] + 0.25 * f[ip * nx + jp];
                total += weight * gker({(ip + 0.5) * dt, (jp + 0.5) * dx});
                suffix += colpre[jp] + 0.5 * f[ip * nx + jp];
            }
            for (int j = 0; j < nx; ++j) colpre[j] += f[ip * nx + j];
        }
        return total * (dt * dx) * (dt * dx);
    };

    Lemma61Report r;
    r.lhs = mixed_partial(G, z, h);
    double fs = 0.0;
    for (int i = 0; i < nt; ++i) fs += fker({(i + 0.5) * z.t / nt, z.x});
    double gs = 0.0;
    for (int j = 0; j < nx; ++j) gs += gker({z.t, (j + 0.5) * z.x / nx});
    r.rhs = fs * (z.t / nt) * gs * (z.x / nx);
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

}  // namespace sheetlab
