// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "sheetlab/chaos.hpp"
#include "sheetlab/control.hpp"
#include "sheetlab/fokker_planck.hpp"
#include "sheetlab/ito_check.hpp"
#include "sheetlab/measures.hpp"
#include "sheetlab/noise.hpp"
#include "sheetlab/parallel.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/series.hpp"
#include "sheetlab/solver.hpp"

using namespace sheetlab;

namespace {

constexpr std::uint64_t kSeed = 20261017;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    for (double x : v) r.mean += x;
    r.mean /= v.size();
    double s = 0.0;
    for (double x : v) s += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(s / (v.size() - 1.0) / v.size());
    return r;
}

std::vector<double> centered_products(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_se(a).mean, mb = mean_se(b).mean, n = static_cast<double>(a.size());
    std::vector<double> out;
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back((a[k] - ma) * (b[k] - mb) * n / (n - 1.0));
    return out;
}

Outcome r0_recovery() {
    Outcome o;
    const double r0 = find_r0(1e-6);
    o.require(r0 >= 1.4453 && r0 <= 1.4463, "r0=" + num(r0));
    return o;
}

Outcome sheet_statistics() {
    Outcome o;
    const Grid g({1, 1}, 32, 32);
    std::vector<double> b11, ba, bb;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        const SheetPath s = sample_sheet(g, 1, derive_seed(kSeed, {2, r}));
        b11.push_back(s.value(0, {1, 1}));
        ba.push_back(s.value(0, {0.5, 1}));
        bb.push_back(s.value(0, {1, 0.5}));
    }
    const MeanSe var = mean_se(centered_products(b11, b11));
    const MeanSe cov = mean_se(centered_products(ba, bb));
    o.require(var.mean >= 0.95 && var.mean <= 1.05, "Var B(1,1)=" + num(var.mean));
    o.require(std::abs(cov.mean - 0.25) <= 3.0 * cov.se, "Cov=" + num(cov.mean) + " se=" + num(cov.se));
    return o;
}

Outcome ito_isometry() {
    Outcome o;
    const Grid g({1, 1}, 32, 32);
    // Deterministic integrand: cell midpoints give the Wiener integral without
    // the left-corner bias of the quadrature.
    const double h = 0.5 / 32;
    const NodeField<double> phi = tabulate(g, [h](Point p) { return (p.t + h) * (p.x + h); });
    std::vector<double> sq;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        const double v = ito_integral(phi, sample_sheet(g, 1, derive_seed(kSeed, {3, r})), 0, {1, 1});
        sq.push_back(v * v);
    }
    const MeanSe m = mean_se(sq);
    o.require(std::abs(m.mean - 1.0 / 9.0) <= 3.0 * m.se, "E[I^2]=" + num(m.mean) + " se=" + num(m.se));
    return o;
}

Outcome discrete_ito_formula() {
    Outcome o;
    const CoefficientField c = CoefficientField::constant({0.0}, {1.0}, 1);
    const std::vector<double> y0{0.0};
    std::vector<Grid> grids;
    for (int n : {16, 32, 64}) grids.emplace_back(Point{1, 1}, n, n);
    const auto lin = ito_refinement_study(TestFunction::linear({1.0}), c, y0, {1, 1}, grids, 200, derive_seed(kSeed, {4, 0}));
    o.require(lin.max_residual < 1e-10, "linear max=" + num(lin.max_residual));
    const auto sq = ito_refinement_study(TestFunction::power(2), c, y0, {1, 1}, grids, 200, derive_seed(kSeed, {4, 1}));
    for (std::size_t k = 1; k < sq.rows.size(); ++k) {
        const double factor = sq.rows[k - 1].mean_residual / sq.rows[k].mean_residual;
        o.require(factor >= 1.5, "y^2 factor " + std::to_string(sq.rows[k - 1].nt) + "->" + std::to_string(sq.rows[k].nt) +
                                     "=" + num(factor));
    }
    return o;
}

Outcome est_estimate() {
    Outcome o;
    const MQuadrature quad(1, 40);
    int held = 0;
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        UniformStream u(derive_seed(kSeed, {5, k, 0}), 0.0, 1.0);
        const double rho = 2.0 * u() - 1.0, s1 = 0.2 + 1.8 * u(), s2 = 0.2 + 1.8 * u(), shift = 2.0 * u() - 1.0;
        NormalStream z(derive_seed(kSeed, {5, k, 1}));
        CoupledSample cs{1, {}, {}};
        for (int a = 0; a < 200; ++a) {
            const double z1 = z(), z2 = z();
            cs.first.push_back(s1 * z1);
            cs.second.push_back(shift + s2 * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2));
        }
        const EstReport r = est_inequality_check(std::span(&cs, 1), quad, 0.02);
        held += r.holds;
        worst = std::max(worst, r.lhs / r.rhs);
    }
    o.require(held == 100, std::to_string(held) + "/100 pairs, max lhs/rhs=" + num(worst));
    for (double c : {0.1, 1.0, 10.0}) {
        const CoupledSample d{1, {0.0}, {c}};
        const EstReport r = est_inequality_check(std::span(&d, 1), quad, 0.02);
        const double err = std::abs(r.lhs - 2.0 * std::sqrt(std::numbers::pi) * (1.0 - std::exp(-c * c / 4.0)));
        o.require(r.holds && err <= 1e-6, "delta c=" + num(c) + " err=" + num(err));
    }
    return o;
}

Outcome propagation_of_chaos() {
    Outcome o;
    const Point z{0.5, 0.5};
    std::vector<double> est;
    for (int N : {8, 16, 32, 64}) {
        ChaosConfig c;
        c.N = N;
        c.a_values.assign(static_cast<std::size_t>(N), 1.0);
        c.y0 = 1.0;
        c.grid = Grid(z, 16, 16);
        est.push_back(remainder_variance(c, z, 100, derive_seed(kSeed, {6, 0})).mean);
    }
    for (std::size_t k = 0; k + 1 < est.size(); ++k) {
        const double ratio = est[k] / est[k + 1];
        o.require(ratio >= 1.4 && ratio <= 2.8, "ratio N=" + std::to_string(8 << k) + ":" + num(ratio));
    }

    ChaosConfig c;
    c.N = 4;
    c.a_values.assign(4, 1.0);
    c.y0 = 1.0;
    const SheetPath fine = sample_sheet(Grid({1, 1}, 64, 64), 4, derive_seed(kSeed, {6, 1}));
    double prev = INFINITY;
    for (int factor : {4, 2, 1}) {
        const SheetPath s = fine.coarsened(factor);
        c.grid = s.grid();
        const StateField a = closed_form_solution(c, s), b = simulate_particle_system(c, s);
        double sup = 0.0;
        for (int i = 0; i <= s.grid().nt(); ++i)
            for (int j = 0; j <= s.grid().nx(); ++j) {
                double ms = 0.0;
                for (int k = 0; k < 4; ++k) ms += std::pow(a(i, j, k) - b(i, j, k), 2);
                sup = std::max(sup, std::sqrt(ms / 4.0));
            }
        o.require(sup < prev, "gap " + std::to_string(s.grid().nt()) + "^2=" + num(sup));
        prev = sup;
    }
    return o;
}

Outcome rank_one_decomposition() {
    Outcome o;
    std::mt19937_64 gen(derive_seed(kSeed, {7}));
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int N = 1 + trial % 6;
        std::vector<double> a(N);
        do {
            for (double& v : a) v = u(gen);
        } while (std::abs(std::accumulate(a.begin(), a.end(), 0.0)) < 0.1);
        std::vector<double> dense(N * N, 0.0), base(N * N);
        for (int k = 0; k < N; ++k) dense[k * N + k] = 1.0;
        for (int r = 0; r < N; ++r)
            for (int q = 0; q < N; ++q) base[r * N + q] = a[q] / N - (r == q ? 1.0 : 0.0);
        for (int n = 0; n <= 12; ++n) {
            const auto fast = matrix_power_decomposition(a, n);
            for (int k = 0; k < N * N; ++k) worst = std::max(worst, std::abs(fast[k] - dense[k]));
            std::vector<double> next(N * N, 0.0);
            for (int r = 0; r < N; ++r)
                for (int k = 0; k < N; ++k)
                    for (int q = 0; q < N; ++q) next[r * N + q] += dense[r * N + k] * base[k * N + q];
            dense = next;
        }
    }
    o.require(worst <= 1e-9, "max abs diff=" + num(worst));
    return o;
}

Outcome picard_regime() {
    Outcome o;
    const double r0 = find_r0(1e-12);
    const Grid g({1, 1}, 16, 16);
    const double a = 0.5;
    const double kappa = 0.5 * std::sqrt(r0) / (1.0 + a);  // K |z| = 0.5 sqrt(r0)
    const CoefficientField c = CoefficientField::conditional_ou(kappa, a, {0.5, 0.5});
    const PicardResult res = picard_solve(c, std::vector<double>{1.0}, 100, g, derive_seed(kSeed, {8}), 60, 1e-28);
    double worst = 0.0;
    for (std::size_t k = 2; k < res.gaps.size(); ++k) worst = std::max(worst, res.gaps[k] / res.gaps[k - 1]);
    o.require(res.gaps.size() >= 4 && worst < 1.0, std::to_string(res.gaps.size()) + " gaps, max ratio=" + num(worst));
    const auto in = picard_series_partial_sums(0.9 * std::sqrt(r0), 1.0, 60);
    o.require(in.converging && !in.diverged, "0.9: S60=" + num(in.partial_sums.back()) + " ratio=" + num(in.term_ratio));
    const auto out = picard_series_partial_sums(1.2 * std::sqrt(r0), 1.0, 60);
    const double top = *std::max_element(out.partial_sums.begin(), out.partial_sums.end());
    o.require(top > 1e6, "1.2: max |S|=" + num(top));
    return o;
}

Outcome weak_fokker_planck() {
    Outcome o;
    const CoefficientField c = CoefficientField::conditional_ou(1.0, 0.5, {0.5, 0.5});
    const std::vector<double> y0{0.5};
    const FrequencyGrid freqs(1, {{1.0}, {-1.0}, {2.0}, {-2.0}});
    const Point z{1, 1};
    struct Rep {
        double m100 = 0, m1000 = 0, fine = 0, anchor = 0, conj = 0;
    };
    const auto reps = parallel_map(20, 1, [&](std::size_t r) {
        const EnsembleNoise fine = sample_ensemble_noise(Grid(z, 32, 32), 2, 1000, derive_seed(kSeed, {9, r}));
        const EnsembleNoise coarse = coarsen_noise(fine, 2);
        EnsembleNoise few = coarse;
        few.idiosyncratic.erase(few.idiosyncratic.begin() + 100, few.idiosyncratic.end());
        Rep out;
        const auto mean_abs = [&](const ParticleEnsemble& ens) {
            double s = 0.0;
            const auto terms = weak_residual_terms(ens, freqs, z);
            for (const auto& t : terms) s += std::abs(t.residual) / terms.size();
            for (std::size_t q = 0; q < freqs.size(); ++q) {
                const std::vector<double> neg{-freqs[q][0]};
                out.conj = std::max(out.conj, std::abs(weak_residual(ens, neg, z) - std::conj(terms[q].residual)));
            }
            out.anchor = std::max(out.anchor, std::abs(weak_residual(ens, std::vector<double>{0.0}, z)));
            return s;
        };
        out.m100 = mean_abs(solve_conditional_mkv(c, y0, few, r));
        out.m1000 = mean_abs(solve_conditional_mkv(c, y0, coarse, r));
        out.fine = mean_abs(solve_conditional_mkv(c, y0, fine, r));
        return out;
    });
    Rep avg;
    for (const Rep& r : reps) {
        avg.m100 += r.m100 / reps.size();
        avg.m1000 += r.m1000 / reps.size();
        avg.fine += r.fine / reps.size();
        avg.anchor = std::max(avg.anchor, r.anchor);
        avg.conj = std::max(avg.conj, r.conj);
    }
    o.require(avg.anchor == 0.0, "residual(0)=" + num(avg.anchor));
    o.require(avg.conj <= 1e-12, "conj gap=" + num(avg.conj));
    o.require(avg.m1000 < avg.m100, "M100=" + num(avg.m100) + " M1000=" + num(avg.m1000));
    o.require(avg.fine < avg.m1000, "32^2=" + num(avg.fine));
    return o;
}

Outcome lemma61() {
    Outcome o;
    const Grid g({1, 1}, 128, 128);
    const auto one = [](Point) { return 1.0; };
    const double c = lemma61_scalar_check(one, one, {1, 1}, g, 1e-3).residual;
    o.require(c < 5e-3, "constants=" + num(c));
    const double p = lemma61_scalar_check([](Point s) { return s.t; }, [](Point s) { return s.x; }, {1, 1}, g, 1e-3).residual;
    o.require(p < 1e-3, "polynomial=" + num(p));
    return o;
}

Outcome control_equivalence() {
    Outcome o;
    const auto dyn = ControlledCoefficientField::controlled_ou(1.0, 0.5, {0.5, 0.5});
    const CostSpec cost = CostSpec::lq(1.0);
    ControlRun run;
    run.particles = 50;
    run.grid = Grid({1, 1}, 16, 16);
    run.replicates = 100;
    run.seed = derive_seed(kSeed, {11, 0});
    for (double u : {0.0, 0.5, -0.5}) {
        const auto p = ControlPolicy::constant(u);
        const auto a = performance_direct(p, dyn, cost, run), b = performance_measure_based(p, dyn, cost, run);
        const double gap = std::abs(a.mean - b.mean), bound = 3.0 * std::hypot(a.stderr_mean, b.stderr_mean);
        o.require(gap <= bound, "u=" + num(u) + " |J-J~|=" + num(gap));
    }
    std::vector<ControlPolicy> family;
    for (double th : {-1.0, -0.5, 0.0, 0.5, 1.0}) family.push_back(ControlPolicy::mean_feedback(th));
    std::vector<std::size_t> best;
    for (std::uint64_t s : {1, 2}) {
        run.seed = derive_seed(kSeed, {11, s});
        best.push_back(grid_search(family, dyn, cost, run).best);
    }
    o.require(best[0] == best[1], "argmax theta=" + num(family[best[0]].theta) + "," + num(family[best[1]].theta));
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"r0 recovery", 1, r0_recovery},
        {"Brownian sheet statistics", 30, sheet_statistics},
        {"Ito isometry", 30, ito_isometry},
        {"discrete Ito formula", 120, discrete_ito_formula},
        {"M-norm estimate", 60, est_estimate},
        {"propagation of chaos", 180, propagation_of_chaos},
        {"rank-1 decomposition", 5, rank_one_decomposition},
        {"Picard regime", 60, picard_regime},
        {"weak-form Fokker-Planck", 300, weak_fokker_planck},
        {"quarter-order scalar identities", 30, lemma61},
        {"control equivalence", 120, control_equivalence},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o = criteria[k].run();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.require(secs < criteria[k].budget_s, "time=" + num(secs) + "s");
        failed += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
