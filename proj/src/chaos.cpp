#include "sheetlab/chaos.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/series.hpp"

namespace sheetlab {

namespace {

double total(std::span<const double> a) { return std::accumulate(a.begin(), a.end(), 0.0); }

// K(p, q) = f(scale * p * q * dt * dx) for lags p in [0, nt], q in [0, nx].
std::vector<double> kernel_table(const Grid& g, double scale) {
    std::vector<double> k(g.node_count());
    for (int p = 0; p <= g.nt(); ++p)
        for (int q = 0; q <= g.nx(); ++q) k[g.flat(p, q)] = f_series(scale * p * q * g.cell_area());
    return k;
}

// sum_{k<i, l<j} K(i-k, j-l) dB(k, l) at node (i, j).
double convolve_at(const Grid& g, const std::vector<double>& K, const std::vector<double>& dB, int i, int j) {
    double s = 0.0;
    for (int k = 0; k < i; ++k)
        for (int l = 0; l < j; ++l) s += K[g.flat(i - k, j - l)] * dB[static_cast<std::size_t>(k) * g.nx() + l];
    return s;
}

std::vector<double> cell_increments(const SheetPath& sheet, int channel) {
    const Grid& g = sheet.grid();
    std::vector<double> dB(static_cast<std::size_t>(g.nt()) * g.nx());
    for (int i = 0; i < g.nt(); ++i)
        for (int j = 0; j < g.nx(); ++j) dB[static_cast<std::size_t>(i) * g.nx() + j] = sheet.cell_increment(channel, i, j);
    return dB;
}

std::vector<double> resolved_a(const ChaosConfig& cfg, std::uint64_t key) {
    return cfg.a_distribution ? cfg.a_distribution->sample(cfg.N, key) : cfg.a_values;
}

}  // namespace

std::vector<double> ADistribution::sample(int N, std::uint64_t key) const {
    if (N < 1) throw std::invalid_argument("need N >= 1 coefficients");
    if (kind == Kind::constant) return std::vector<double>(static_cast<std::size_t>(N), lo);
    if (!(hi > lo)) throw std::invalid_argument("uniform a-distribution needs lo < hi");
    UniformStream u(key, lo, hi);
    std::vector<double> a(static_cast<std::size_t>(N));
    for (double& v : a) v = u();
    return a;
}

void ChaosConfig::validate() const {
    if (N < 1) throw std::invalid_argument("chaos config needs N >= 1");
    if (a_distribution) {
        const double lo = a_distribution->lo;
        const double hi = a_distribution->kind == ADistribution::Kind::constant ? lo : a_distribution->hi;
        if (std::max(std::abs(lo), std::abs(hi)) > a_bound) throw std::invalid_argument("a-distribution is unbounded");
        if (lo < q) throw std::invalid_argument("a-distribution allows (1/N) sum a_j < q");
        return;
    }
    if (static_cast<int>(a_values.size()) != N)
        throw std::invalid_argument("chaos config needs N = " + std::to_string(N) + " coefficients a_j");
    for (double a : a_values)
        if (!std::isfinite(a) || std::abs(a) > a_bound) throw std::invalid_argument("a_j must be bounded");
    if (total(a_values) / N < q) throw std::invalid_argument("(1/N) sum a_j must be at least q");
}

CoefficientField particle_system_coefficients(std::vector<double> a_values) {
    const int N = static_cast<int>(a_values.size());
    if (N < 1) throw std::invalid_argument("particle system needs N >= 1");
    CoefficientField c;
    c.n = N;
    c.m = N;
    c.drift = [a = std::move(a_values), N](Point, std::span<const double> y, const EmpiricalMeasure*,
                                            std::span<double> out) {
        double s = 0.0;
        for (int j = 0; j < N; ++j) s += a[j] * y[j];
        s /= N;
        for (int i = 0; i < N; ++i) out[i] = s - y[i];
    };
    c.diffusion = [N](Point, std::span<const double>, const EmpiricalMeasure*, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 0; i < N; ++i) out[static_cast<std::size_t>(i) * N + i] = 1.0;
    };
    c.depends_on_state = true;
    c.depends_on_measure = false;
    return c;
}

StateField simulate_particle_system(const ChaosConfig& cfg, const SheetPath& sheet) {
    cfg.validate();
    if (cfg.a_distribution) throw std::invalid_argument("simulate_particle_system needs fixed a_values");
    if (sheet.channels() != cfg.N)
        throw std::invalid_argument("sheet has " + std::to_string(sheet.channels()) + " channels, expected N = " +
                                    std::to_string(cfg.N));
    const std::vector<double> y0(static_cast<std::size_t>(cfg.N), cfg.y0);
    return solve_goursat(particle_system_coefficients(cfg.a_values), y0, sheet);
}

std::vector<double> matrix_power_decomposition(std::span<const double> a_values, int n) {
    if (n < 0) throw std::invalid_argument("matrix power needs n >= 0");
    const int N = static_cast<int>(a_values.size());
    if (N < 1) throw std::invalid_argument("matrix power needs N >= 1");
    const double norm = total(a_values);
    if (norm == 0.0) throw std::invalid_argument("|A| = sum a_j must be nonzero");
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double lambda = std::pow(norm / N - 1.0, n);
    std::vector<double> out(static_cast<std::size_t>(N) * N);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
            const double q = a_values[c] / norm;
            out[static_cast<std::size_t>(r) * N + c] = sign * ((r == c ? 1.0 : 0.0) - q) + lambda * q;
        }
    return out;
}

StateField closed_form_solution(const ChaosConfig& cfg, const SheetPath& sheet) {
    cfg.validate();
    if (cfg.a_distribution) throw std::invalid_argument("closed_form_solution needs fixed a_values");
    if (sheet.channels() != cfg.N) throw std::invalid_argument("sheet channel count must equal N");
    const Grid& g = sheet.grid();
    const int N = cfg.N;
    const double norm = total(cfg.a_values);
    const double lambda = norm / N - 1.0;
    const std::vector<double> K1 = kernel_table(g, -1.0);
    const std::vector<double> K2 = kernel_table(g, lambda);

    std::vector<std::vector<double>> dB(static_cast<std::size_t>(N));
    for (int c = 0; c < N; ++c) dB[c] = cell_increments(sheet, c);
    std::vector<double> weighted(dB[0].size(), 0.0);  // sum_j a_j dB_j / |A|
    for (int c = 0; c < N; ++c)
        for (std::size_t k = 0; k < weighted.size(); ++k) weighted[k] += cfg.a_values[c] / norm * dB[c][k];

    const std::vector<double> y0(static_cast<std::size_t>(N), cfg.y0);
    StateField out(g, N, y0);
    for (int i = 0; i <= g.nt(); ++i)
        for (int j = 0; j <= g.nx(); ++j) {
            const Point z = g.node(i, j);
            const double det = f_series(area(z) * lambda) * cfg.y0;
            const double w1 = convolve_at(g, K1, weighted, i, j);
            const double w2 = convolve_at(g, K2, weighted, i, j);
            auto y = out.at(i, j);
            for (int c = 0; c < N; ++c) y[c] = det + convolve_at(g, K1, dB[c], i, j) - w1 + w2;
        }
    return out;
}

double remainder(const ChaosConfig& cfg, const SheetPath& sheet, Point z) {
    cfg.validate();
    if (cfg.a_distribution) throw std::invalid_argument("remainder needs fixed a_values");
    if (sheet.channels() != cfg.N) throw std::invalid_argument("sheet channel count must equal N");
    const Grid& g = sheet.grid();
    const NodeIndex zi = g.node_index(z);
    const double norm = total(cfg.a_values);
    const double factor = norm / cfg.N - 2.0;  // -1 + ((1/N)|A| - 1)
    const std::vector<double> K = kernel_table(g, -1.0);
    double s = 0.0;
    for (int k = 0; k < zi.i; ++k)
        for (int l = 0; l < zi.j; ++l) {
            double db = 0.0;
            for (int c = 0; c < cfg.N; ++c) db += cfg.a_values[c] * sheet.cell_increment(c, k, l);
            s += K[g.flat(zi.i - k, zi.j - l)] * db;
        }
    return factor * s / norm;
}

MonteCarloEstimate remainder_variance(const ChaosConfig& cfg, Point z, int replicates, std::uint64_t seed,
                                      int workers) {
    cfg.validate();
    if (replicates < 2) throw std::invalid_argument("remainder_variance needs at least two replicates");
    const std::vector<double> sq = parallel_map(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        ChaosConfig rep = cfg;
        rep.a_values = resolved_a(cfg, derive_seed(seed, {r, 1}));
        rep.a_distribution.reset();
        const SheetPath sheet = sample_sheet(cfg.grid, cfg.N, derive_seed(seed, {r}));
        const double I = remainder(rep, sheet, z);
        return I * I;
    });
    const double R = static_cast<double>(replicates);
    const double mean = std::accumulate(sq.begin(), sq.end(), 0.0) / R;
    double var = 0.0;
    for (double v : sq) var += (v - mean) * (v - mean);
    var /= R - 1.0;
    return {mean, std::sqrt(var / R)};
}

StateField limit_solution(double a, double y0, const SheetPath& sheet_star) {
    if (sheet_star.channels() != 1) throw std::invalid_argument("limit_solution needs a one-channel sheet");
    const Grid& g = sheet_star.grid();
    const std::vector<double> K = kernel_table(g, -1.0);
    const std::vector<double> dB = cell_increments(sheet_star, 0);
    const std::vector<double> fill{y0};
    StateField out(g, 1, fill);
    for (int i = 0; i <= g.nt(); ++i)
        for (int j = 0; j <= g.nx(); ++j)
            out.at(i, j)[0] = f_series(area(g.node(i, j)) * (a - 1.0)) * y0 + convolve_at(g, K, dB, i, j);
    return out;
}

LimitSpdeReport verify_limit_spde(double a, double y0, const Grid& grid, int replicates, std::uint64_t seed,
                                  int workers) {
    if (replicates < 2) throw std::invalid_argument("verify_limit_spde needs at least two replicates");
    auto drawn = parallel_map(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        return std::optional<SheetPath>(sample_sheet(grid, 1, derive_seed(seed, {r})));
    });
    std::vector<SheetPath> sheets;
    sheets.reserve(drawn.size());
    for (auto& s : drawn) sheets.push_back(std::move(*s));
    return verify_limit_spde(a, y0, sheets);
}

LimitSpdeReport verify_limit_spde(double a, double y0, const std::vector<SheetPath>& sheets) {
    if (sheets.size() < 2) throw std::invalid_argument("verify_limit_spde needs at least two replicates");
    const Grid& g = sheets.front().grid();
    const double lambda = a - 1.0;
    LimitSpdeReport report;

    for (int i = 0; i <= g.nt(); ++i)
        for (int j = 0; j <= g.nx(); ++j) {
            const double s = lambda * area(g.node(i, j));
            const double mixed = y0 * lambda * (f_series_derivative(s) + s * f_series_second_derivative(s));
            report.deterministic_residual =
                std::max(report.deterministic_residual, std::abs(mixed - lambda * y0 * f_series(s)));
        }

    std::vector<StateField> Y;
    Y.reserve(sheets.size());
    for (const SheetPath& sh : sheets) {
        if (!(sh.grid() == g)) throw std::invalid_argument("replicate sheets on different grids");
        Y.push_back(limit_solution(a, y0, sh));
    }
    const double R = static_cast<double>(sheets.size());
    NodeField<double> mean(g, 0.0);
    for (const StateField& y : Y)
        for (int i = 0; i <= g.nt(); ++i)
            for (int j = 0; j <= g.nx(); ++j) mean(i, j) += y(i, j) / R;
    for (int i = 0; i <= g.nt(); ++i)
        for (int j = 0; j <= g.nx(); ++j)
            report.mean_field_sup =
                std::max(report.mean_field_sup, std::abs(mean(i, j) - f_series(lambda * area(g.node(i, j))) * y0));

    NodeField<double> sq(g, 0.0);
    const double dA = g.cell_area();
    for (std::size_t r = 0; r < Y.size(); ++r) {
        // prefix(i, j) = sum over cells of R_(i,j) of (a E[Y] - Y) dA
        NodeField<double> prefix(g, 0.0);
        for (int i = 0; i < g.nt(); ++i)
            for (int j = 0; j < g.nx(); ++j)
                prefix(i + 1, j + 1) = prefix(i + 1, j) + prefix(i, j + 1) - prefix(i, j) +
                                       (a * mean(i, j) - Y[r](i, j)) * dA;
        for (int i = 0; i <= g.nt(); ++i)
            for (int j = 0; j <= g.nx(); ++j) {
                const double res = Y[r](i, j) - y0 - prefix(i, j) - sheets[r].value(0, i, j);
                sq(i, j) += res * res / R;
            }
    }
    for (double v : sq.values()) report.stochastic_residual = std::max(report.stochastic_residual, std::sqrt(v));
    return report;
}

}  // namespace sheetlab
