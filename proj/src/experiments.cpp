#include "sheetlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

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

namespace sheetlab {

const char* const kVersion = "0.1.0";

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(12);
    s << v;
    return s.str();
}

std::string fmt(bool v) { return v ? "1" : "0"; }
std::string fmt(int v) { return std::to_string(v); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Stats {
    double mean = 0.0;
    double se = 0.0;
};

Stats stats(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return {m, n > 1 ? std::sqrt(s2 / (n - 1.0) / n) : 0.0};
}

Grid square_grid(const Params& p, int n) { return Grid({p.real("T"), p.real("X")}, n, n); }

// ---------------------------------------------------------------------------

Table sheet_stats(const Params& p) {
    const int reps = p.integer("reps");
    const Grid grid({1.0, 1.0}, p.integer("nt"), p.integer("nx"));
    const std::uint64_t seed = p.u64("seed");
    if (reps < 2) throw ConfigError("sheet-stats needs reps >= 2");
    // phi is deterministic, so tabulating it at cell midpoints keeps the sum a
    // Wiener integral while removing the left-corner quadrature bias.
    const double ht = 0.5 * grid.dt(), hx = 0.5 * grid.dx();
    const NodeField<double> phi = tabulate(grid, [=](Point z) { return (z.t + ht) * (z.x + hx); });
    struct Draw {
        double b11 = 0.0, ba = 0.0, bb = 0.0, ito = 0.0;
    };
    const auto draws = parallel_map(static_cast<std::size_t>(reps), p.integer("workers"), [&](std::size_t r) {
        const SheetPath s = sample_sheet(grid, 1, derive_seed(seed, {r}));
        return Draw{s.value(0, {1.0, 1.0}), s.value(0, {0.5, 1.0}), s.value(0, {1.0, 0.5}),
                    ito_integral(phi, s, 0, {1.0, 1.0})};
    });
    std::vector<double> sq, prod, ito_sq;
    double mean_b = 0.0, mean_a = 0.0, mean_bb = 0.0;
    for (const Draw& d : draws) {
        mean_b += d.b11 / reps;
        mean_a += d.ba / reps;
        mean_bb += d.bb / reps;
    }
    for (const Draw& d : draws) {
        sq.push_back((d.b11 - mean_b) * (d.b11 - mean_b) * reps / (reps - 1.0));
        prod.push_back((d.ba - mean_a) * (d.bb - mean_bb) * reps / (reps - 1.0));
        ito_sq.push_back(d.ito * d.ito);
    }
    const Stats var = stats(sq), cov = stats(prod), iso = stats(ito_sq);
    Table t;
    t.columns = {"statistic", "value", "stderr", "target", "pass"};
    const bool var_ok = var.mean >= 0.95 && var.mean <= 1.05;
    const bool cov_ok = std::abs(cov.mean - 0.25) <= 3.0 * cov.se;
    const bool iso_ok = std::abs(iso.mean - 1.0 / 9.0) <= 3.0 * iso.se;
    t.rows.push_back({"var_B11", fmt(var.mean), fmt(var.se), "1", fmt(var_ok)});
    t.rows.push_back({"cov_B(0.5;1)_B(1;0.5)", fmt(cov.mean), fmt(cov.se), "0.25", fmt(cov_ok)});
    t.rows.push_back({"ito_isometry_ta", fmt(iso.mean), fmt(iso.se), fmt(1.0 / 9.0), fmt(iso_ok)});
    t.passed = var_ok && cov_ok && iso_ok;
    return t;
}

TestFunction named_function(const std::string& name) {
    if (name == "linear") return TestFunction::linear({1.0});
    if (name == "square") return TestFunction::power(2);
    if (name == "cube") return TestFunction::power(3);
    if (name == "quartic") return TestFunction::power(4);
    if (name == "cos") return TestFunction::cosine();
    throw ConfigError("unknown test function '" + name + "' (linear|square|cube|quartic|cos)");
}

Table ito_check(const Params& p) {
    const TestFunction f = named_function(p.str("f"));
    CoefficientField c;
    const double alpha = p.real("alpha"), beta = p.real("beta"), kappa = p.real("kappa");
    if (kappa == 0.0) {
        c = CoefficientField::constant({alpha}, {beta}, 1);
    } else {
        c.n = 1;
        c.m = 1;
        c.drift = [=](Point, std::span<const double> y, const EmpiricalMeasure*, std::span<double> out) {
            out[0] = alpha - kappa * y[0];
        };
        c.diffusion = [=](Point, std::span<const double>, const EmpiricalMeasure*, std::span<double> out) {
            out[0] = beta;
        };
    }
    std::vector<Grid> grids;
    for (int n : p.integers("grids")) grids.push_back(square_grid(p, n));
    const std::vector<double> y0{p.real("y0")};
    const RefinementStudy st = ito_refinement_study(f, c, y0, {p.real("T"), p.real("X")}, grids, p.integer("reps"),
                                                    p.u64("seed"), p.integer("workers"));
    const double min_factor = p.real("min_factor");
    const bool linear = p.str("f") == "linear";
    Table t;
    t.columns = {"nt", "nx", "mean_residual", "stderr", "factor", "pass"};
    for (std::size_t k = 0; k < st.rows.size(); ++k) {
        const auto& r = st.rows[k];
        double factor = 0.0;
        bool ok;
        if (linear) {
            ok = st.max_residual < 1e-10;
        } else if (k == 0) {
            ok = true;
        } else {
            factor = st.rows[k - 1].mean_residual / r.mean_residual;
            ok = factor >= min_factor;
        }
        t.rows.push_back({fmt(r.nt), fmt(r.nx), fmt(r.mean_residual), fmt(r.stderr_residual), fmt(factor), fmt(ok)});
        t.passed = t.passed && ok;
    }
    return t;
}

Table est_check(const Params& p) {
    const MQuadrature quad(1, p.integer("order"));
    const double slack = p.real("slack");
    Table t;
    t.columns = {"case", "lhs", "rhs", "analytic", "pass"};
    for (double c : p.reals("cs")) {
        const std::vector<double> zero{0.0}, shifted{c};
        const CoupledSample pair{1, zero, shifted};
        const EstReport r = est_inequality_check(std::span(&pair, 1), quad, slack);
        const double analytic = 2.0 * std::sqrt(std::numbers::pi) * (1.0 - std::exp(-c * c / 4.0));
        const bool ok = r.holds && std::abs(r.lhs - analytic) <= 1e-6;
        t.rows.push_back({"delta_c=" + fmt(c), fmt(r.lhs), fmt(r.rhs), fmt(analytic), fmt(ok)});
        t.passed = t.passed && ok;
    }
    const int pairs = p.integer("pairs");
    const int M = p.integer("M");
    const std::uint64_t seed = p.u64("seed");
    std::vector<CoupledSample> all;
    for (int k = 0; k < pairs; ++k) {
        // random correlation, scales and shift per pair
        UniformStream u(derive_seed(seed, {static_cast<std::uint64_t>(k), 0}), 0.0, 1.0);
        const double rho = 2.0 * u() - 1.0;
        const double s1 = 0.2 + 1.8 * u(), s2 = 0.2 + 1.8 * u(), shift = 2.0 * u() - 1.0;
        NormalStream z(derive_seed(seed, {static_cast<std::uint64_t>(k), 1}));
        CoupledSample cs{1, {}, {}};
        for (int a = 0; a < M; ++a) {
            const double z1 = z(), z2 = z();
            cs.first.push_back(s1 * z1);
            cs.second.push_back(shift + s2 * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2));
        }
        const EstReport r = est_inequality_check(std::span(&cs, 1), quad, slack);
        t.rows.push_back({"gaussian_pair_" + fmt(k), fmt(r.lhs), fmt(r.rhs), "", fmt(r.holds)});
        t.passed = t.passed && r.holds;
        all.push_back(std::move(cs));
    }
    if (!all.empty()) {
        const EstReport r = est_inequality_check(all, quad, slack);
        t.rows.push_back({"gaussian_pairs_mean", fmt(r.lhs), fmt(r.rhs), "", fmt(r.holds)});
        t.passed = t.passed && r.holds;
    }
    return t;
}

ChaosConfig chaos_config(const Params& p, int N) {
    ChaosConfig c;
    c.N = N;
    c.y0 = p.real("y0");
    const std::string dist = p.str("a_dist");
    if (dist == "constant") {
        c.a_values.assign(static_cast<std::size_t>(N), p.real("a_lo"));
    } else if (dist == "uniform") {
        c.a_distribution = ADistribution{ADistribution::Kind::uniform, p.real("a_lo"), p.real("a_hi")};
    } else {
        throw ConfigError("a_dist must be constant or uniform");
    }
    c.q = p.real("q");
    return c;
}

Table chaos_rate(const Params& p) {
    const Point z{p.real("t"), p.real("x")};
    const Grid grid(z, p.integer("nt"), p.integer("nx"));
    const double lo = p.real("band_lo"), hi = p.real("band_hi");
    Table t;
    t.columns = {"N", "estimate", "stderr", "ratio_to_next", "pass"};
    std::vector<std::pair<int, MonteCarloEstimate>> est;
    for (int N : p.integers("Ns")) {
        ChaosConfig c = chaos_config(p, N);
        c.grid = grid;
        est.emplace_back(N, remainder_variance(c, z, p.integer("reps"), p.u64("seed"), p.integer("workers")));
    }
    for (std::size_t k = 0; k < est.size(); ++k) {
        double ratio = 0.0;
        bool ok = true;
        if (k + 1 < est.size()) {
            ratio = est[k].second.mean / est[k + 1].second.mean;
            ok = ratio >= lo && ratio <= hi;
        }
        t.rows.push_back({fmt(est[k].first), fmt(est[k].second.mean), fmt(est[k].second.stderr_mean), fmt(ratio), fmt(ok)});
        t.passed = t.passed && ok;
    }
    return t;
}

double sup_rms_gap(const StateField& a, const StateField& b) {
    double sup = 0.0;
    const Grid& g = a.grid();
    for (int i = 0; i <= g.nt(); ++i)
        for (int j = 0; j <= g.nx(); ++j) {
            double s = 0.0;
            for (int k = 0; k < a.dim(); ++k) s += (a(i, j, k) - b(i, j, k)) * (a(i, j, k) - b(i, j, k));
            sup = std::max(sup, std::sqrt(s / a.dim()));
        }
    return sup;
}

Table chaos_closed_form(const Params& p) {
    const std::vector<double> a = p.reals("a_values");
    const std::vector<int> sizes = p.integers("grids");
    if (sizes.empty()) throw ConfigError("grids must list at least one size");
    const int finest = *std::max_element(sizes.begin(), sizes.end());
    for (int n : sizes)
        if (finest % n != 0) throw ConfigError("every grid size must divide the finest");
    ChaosConfig c;
    c.N = static_cast<int>(a.size());
    c.a_values = a;
    c.y0 = p.real("y0");
    const SheetPath fine = sample_sheet(square_grid(p, finest), c.N, p.u64("seed"));
    Table t;
    t.columns = {"nt", "nx", "sup_rms_gap", "pass"};
    double prev = 0.0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const SheetPath sheet = fine.coarsened(finest / sizes[k]);
        c.grid = sheet.grid();
        const double gap = sup_rms_gap(closed_form_solution(c, sheet), simulate_particle_system(c, sheet));
        const bool ok = k == 0 || gap < prev;
        prev = gap;
        t.rows.push_back({fmt(sizes[k]), fmt(sizes[k]), fmt(gap), fmt(ok)});
        t.passed = t.passed && ok;
    }
    return t;
}

Table picard(const Params& p) {
    const double r0 = find_r0(1e-12);
    const Grid grid({p.real("T"), p.real("X")}, p.integer("nt"), p.integer("nx"));
    const double a = p.real("a");
    const double K = p.real("k_ratio") * std::sqrt(r0) / area(grid.horizon());
    const double kappa = K / (1.0 + std::abs(a));
    const CoefficientField c = CoefficientField::conditional_ou(kappa, a, {p.real("sigma1"), p.real("sigma2")});
    const std::vector<double> y0{p.real("y0")};
    const PicardResult res = picard_solve(c, y0, static_cast<std::size_t>(p.integer("M")), grid, p.u64("seed"),
                                          p.integer("max_iter"), p.real("tol"), {p.integer("workers")});
    Table t;
    t.columns = {"kind", "index", "value", "ratio", "pass"};
    for (std::size_t k = 0; k < res.gaps.size(); ++k) {
        double ratio = 0.0;
        bool ok = true;
        if (k >= 1 && res.gaps[k - 1] > 0.0) {
            ratio = res.gaps[k] / res.gaps[k - 1];
            if (k >= 2) ok = ratio < 1.0;
        }
        t.rows.push_back({"gap", fmt(static_cast<int>(k + 1)), fmt(res.gaps[k]), fmt(ratio), fmt(ok)});
        t.passed = t.passed && ok;
    }
    t.rows.push_back({"converged", "", fmt(res.converged), "", fmt(res.converged && !res.diverged)});
    t.passed = t.passed && res.converged && !res.diverged;
    const ConvergenceRadiusReport rr = convergence_radius_report(c, grid);
    t.rows.push_back({"K|z|", "", fmt(rr.K * rr.area), fmt(rr.K * rr.area / std::sqrt(r0)), fmt(rr.picard_ok)});
    const int n_max = p.integer("series_terms");
    for (double frac : p.reals("series_ratios")) {
        const PicardSeriesReport s = picard_series_partial_sums(frac * std::sqrt(r0), 1.0, n_max);
        const bool expect_converge = frac < 1.0;
        const bool ok = expect_converge ? s.converging : s.diverged;
        t.rows.push_back({"series_" + fmt(frac), fmt(n_max), fmt(s.partial_sums.back()), fmt(s.term_ratio), fmt(ok)});
        t.passed = t.passed && ok;
    }
    return t;
}

Table fokker_planck(const Params& p) {
    std::vector<std::vector<double>> ws;
    for (double w : p.reals("w")) ws.push_back({w});
    const FrequencyGrid freqs(1, ws);
    const std::vector<int> Ms = p.integers("Ms");
    const std::vector<int> sizes = p.integers("grids");
    if (Ms.empty() || sizes.empty()) throw ConfigError("Ms and grids must be nonempty");
    const int Mmax = *std::max_element(Ms.begin(), Ms.end());
    const int finest = *std::max_element(sizes.begin(), sizes.end());
    for (int n : sizes)
        if (finest % n != 0) throw ConfigError("every grid size must divide the finest");
    const CoefficientField c =
        CoefficientField::conditional_ou(p.real("kappa"), p.real("a"), {p.real("sigma1"), p.real("sigma2")});
    const std::vector<double> y0{p.real("y0")};
    const Point z{p.real("T"), p.real("X")};
    const int reps = p.integer("reps");

    // Every (M, grid) cell of the study; rows for M at the coarsest grid and
    // for grids at the largest M.
    struct Cell {
        int M;
        int n;
    };
    std::vector<Cell> cells;
    const int coarsest = *std::min_element(sizes.begin(), sizes.end());
    for (int M : Ms) cells.push_back({M, coarsest});
    for (int n : sizes)
        if (n != coarsest) cells.push_back({Mmax, n});

    const std::size_t nw = freqs.size();

    // Per replicate: complex residual for every (cell, w), then anchor and conjugation gaps.
    struct RepOut {
        std::vector<cplx> res;
        double anchor = 0.0;
        double conj = 0.0;
    };
    const auto per_rep = parallel_map(static_cast<std::size_t>(reps), p.integer("workers"), [&](std::size_t r) {
        const EnsembleNoise fine = sample_ensemble_noise(square_grid(p, finest), 2, static_cast<std::size_t>(Mmax),
                                                         derive_seed(p.u64("seed"), {r}));
        RepOut out;
        for (const Cell& cell : cells) {
            EnsembleNoise noise = coarsen_noise(fine, finest / cell.n);
            noise.idiosyncratic.erase(noise.idiosyncratic.begin() + cell.M, noise.idiosyncratic.end());
            const ParticleEnsemble ens = solve_conditional_mkv(c, y0, noise, r);
            const auto terms = weak_residual_terms(ens, freqs, z);
            for (const auto& t : terms) out.res.push_back(t.residual);
            const std::vector<double> w0{0.0};
            out.anchor = std::max(out.anchor, std::abs(weak_residual(ens, w0, z)));
            for (std::size_t q = 0; q < nw; ++q) {
                const std::vector<double> neg{-freqs[q][0]};
                out.conj = std::max(out.conj, std::abs(weak_residual(ens, neg, z) - std::conj(terms[q].residual)));
            }
        }
        return out;
    });

    Table t;
    t.columns = {"w", "re_residual", "im_residual", "stderr", "M", "grid", "mean_abs_residual", "pass"};
    std::vector<double> cell_mean(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        std::vector<double> all_abs;
        for (std::size_t q = 0; q < nw; ++q) {
            std::vector<double> re, im, ab;
            for (const auto& o : per_rep) {
                const cplx v = o.res[k * nw + q];
                re.push_back(v.real());
                im.push_back(v.imag());
                ab.push_back(std::abs(v));
                all_abs.push_back(std::abs(v));
            }
            const Stats a = stats(ab);
            t.rows.push_back({fmt(freqs[q][0]), fmt(stats(re).mean), fmt(stats(im).mean), fmt(a.se), fmt(cells[k].M),
                              fmt(cells[k].n), fmt(a.mean), "1"});
        }
        cell_mean[k] = stats(all_abs).mean;
    }
    // Trend rows: M refinement at the coarsest grid, then grid refinement at the largest M.
    std::size_t ref = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const Stats s{cell_mean[k], 0.0};
        bool ok = true;
        if (k > 0 && k < Ms.size()) ok = s.mean < cell_mean[k - 1];
        if (k >= Ms.size()) ok = s.mean < cell_mean[k == Ms.size() ? ref : k - 1];
        if (k < Ms.size() && cells[k].M == Mmax) ref = k;
        t.rows.push_back({"all", "", "", "", fmt(cells[k].M), fmt(cells[k].n), fmt(s.mean), fmt(ok)});
        t.passed = t.passed && ok;
    }
    double anchor = 0.0, conj_gap = 0.0;
    for (const auto& o : per_rep) {
        anchor = std::max(anchor, o.anchor);
        conj_gap = std::max(conj_gap, o.conj);
    }
    t.rows.push_back({"0", fmt(anchor), "", "", "", "", fmt(anchor), fmt(anchor == 0.0)});
    t.rows.push_back({"conjugate_gap", "", "", "", "", "", fmt(conj_gap), fmt(conj_gap <= 1e-12)});
    t.passed = t.passed && anchor == 0.0 && conj_gap <= 1e-12;
    return t;
}

Table lemma61(const Params& p) {
    const Point z{p.real("t"), p.real("x")};
    const Grid grid(z, p.integer("n"), p.integer("n"));
    const double h = p.real("h");
    Table t;
    t.columns = {"case", "lhs", "rhs", "residual", "tolerance", "pass"};
    auto row = [&](const std::string& name, double lhs, double rhs, double res, double tol) {
        const bool ok = res < tol;
        t.rows.push_back({name, fmt(lhs), fmt(rhs), fmt(res), fmt(tol), fmt(ok)});
        t.passed = t.passed && ok;
    };
    const auto one = [](Point) { return 1.0; };
    const Lemma61Report c = lemma61_scalar_check(one, one, z, grid, h);
    row("constants", c.lhs, c.rhs, c.residual, p.real("tol_const"));
    const Lemma61Report q =
        lemma61_scalar_check([](Point s) { return s.t; }, [](Point s) { return s.x; }, z, grid, h);
    row("polynomial", q.lhs, q.rhs, q.residual, p.real("tol_poly"));
    const Lemma61Report zero = lemma61_scalar_check([](Point) { return 0.0; }, one, z, grid, h);
    row("zero", zero.lhs, zero.rhs, zero.residual, 1e-15);

    const Grid pg(z, p.integer("plane_n"), p.integer("plane_n"));
    const DoubleIntegralIdentityReport d =
        diff_double_integral_identity_check([](Point, Point) { return 1.0; }, z, pg, p.real("plane_h"));
    row("plane_identity_four_terms", d.lhs, d.rhs, d.residual, p.real("plane_tol"));
    t.rows.push_back({"plane_identity_point_terms_only", fmt(d.lhs), fmt(d.point_terms), fmt(d.point_only_gap), "", "1"});
    return t;
}

ControlledCoefficientField control_dynamics(const Params& p) {
    return ControlledCoefficientField::controlled_ou(p.real("kappa"), p.real("a"), {p.real("sigma1"), p.real("sigma2")});
}

CostSpec control_cost(const Params& p) {
    const std::string name = p.str("cost");
    if (name == "lq") return CostSpec::lq(p.real("lambda"));
    if (name == "tracking") return CostSpec::tracking(p.real("target"), p.real("lambda"));
    throw ConfigError("cost must be lq or tracking");
}

ControlRun control_run(const Params& p, std::uint64_t seed) {
    ControlRun run;
    run.particles = p.integer("M");
    run.grid = Grid({p.real("T"), p.real("X")}, p.integer("nt"), p.integer("nx"));
    run.replicates = p.integer("reps");
    run.seed = seed;
    run.y0 = {p.real("y0")};
    run.workers = p.integer("workers");
    return run;
}

std::vector<ControlPolicy> control_policies(const Params& p, const std::string& key) {
    std::vector<ControlPolicy> out;
    const std::string family = p.str("family");
    for (double th : p.reals(key)) {
        if (family == "constant")
            out.push_back(ControlPolicy::constant(th));
        else if (family == "mean_feedback")
            out.push_back(ControlPolicy::mean_feedback(th));
        else
            throw ConfigError("family must be constant or mean_feedback");
    }
    if (out.empty()) throw ConfigError("policy list is empty");
    return out;
}

Table control_equiv(const Params& p) {
    const GridSearchResult r =
        grid_search(control_policies(p, "thetas"), control_dynamics(p), control_cost(p), control_run(p, p.u64("seed")));
    Table t;
    t.columns = {"theta", "J_direct", "J_measure", "stderr_direct", "stderr_measure", "pass"};
    for (const auto& row : r.table) {
        const double combined = std::hypot(row.direct.stderr_mean, row.measure.stderr_mean);
        const bool ok = std::abs(row.direct.mean - row.measure.mean) <= 3.0 * combined;
        t.rows.push_back({fmt(row.theta), fmt(row.direct.mean), fmt(row.measure.mean), fmt(row.direct.stderr_mean),
                          fmt(row.measure.stderr_mean), fmt(ok)});
        t.passed = t.passed && ok;
    }
    return t;
}

Table control_search(const Params& p) {
    const auto policies = control_policies(p, "thetas");
    Table t;
    t.columns = {"seed", "theta", "J_direct", "J_measure", "stderr_measure", "best", "pass"};
    std::vector<std::size_t> bests;
    const std::vector<int> seeds = p.integers("seeds");
    if (seeds.empty()) throw ConfigError("seeds must be nonempty");
    std::vector<GridSearchResult> results;
    for (int s : seeds) {
        results.push_back(grid_search(policies, control_dynamics(p), control_cost(p), control_run(p, static_cast<std::uint64_t>(s))));
        bests.push_back(results.back().best);
    }
    const bool stable = std::all_of(bests.begin(), bests.end(), [&](std::size_t b) { return b == bests.front(); });
    for (std::size_t k = 0; k < seeds.size(); ++k)
        for (std::size_t q = 0; q < results[k].table.size(); ++q) {
            const auto& row = results[k].table[q];
            t.rows.push_back({fmt(seeds[k]), fmt(row.theta), fmt(row.direct.mean), fmt(row.measure.mean),
                              fmt(row.measure.stderr_mean), fmt(q == results[k].best), fmt(stable)});
        }
    t.passed = stable;
    return t;
}

using Runner = Table (*)(const Params&);

struct Entry {
    ExperimentInfo info;
    Runner run;
};

const std::map<std::string, std::string> kCommon{{"seed", "1"}, {"workers", "1"}, {"out", ""}};

std::map<std::string, std::string> with_common(std::map<std::string, std::string> m) {
    for (const auto& [k, v] : kCommon) m.emplace(k, v);
    return m;
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> list{
        {{"sheet-stats", "Brownian sheet variance, covariance and Ito isometry over many seeds",
          with_common({{"reps", "10000"}, {"nt", "32"}, {"nx", "32"}})},
         sheet_stats},
        {{"ito-check", "Planar Ito formula residuals under grid refinement",
          with_common({{"f", "square"}, {"alpha", "0"}, {"beta", "1"}, {"kappa", "0"}, {"y0", "0"}, {"T", "1"},
                       {"X", "1"}, {"grids", "16,32,64"}, {"reps", "200"}, {"min_factor", "1.5"}})},
         ito_check},
        {{"est-check", "M-norm distance against pi times the mean squared coupling gap",
          with_common({{"pairs", "100"}, {"M", "200"}, {"cs", "0.1,1,10"}, {"slack", "0.02"}, {"order", "40"}})},
         est_check},
        {{"chaos-rate", "Mean-square remainder of the N-particle system against N",
          with_common({{"Ns", "8,16,32,64"}, {"reps", "100"}, {"t", "0.5"}, {"x", "0.5"}, {"nt", "16"}, {"nx", "16"},
                       {"y0", "1"}, {"a_dist", "constant"}, {"a_lo", "1"}, {"a_hi", "1"}, {"q", "0.001"},
                       {"band_lo", "1.4"}, {"band_hi", "2.8"}})},
         chaos_rate},
        {{"chaos-closed-form", "Closed form against the Goursat scheme on one sheet",
          with_common({{"a_values", "1,1,1,1"}, {"y0", "1"}, {"T", "1"}, {"X", "1"}, {"grids", "16,32,64"}})},
         chaos_closed_form},
        {{"picard", "Picard iterate gaps for the conditional OU model and the majorant series",
          with_common({{"k_ratio", "0.5"}, {"a", "0.5"}, {"sigma1", "0.5"}, {"sigma2", "0.5"}, {"y0", "1"},
                       {"M", "100"}, {"T", "1"}, {"X", "1"}, {"nt", "16"}, {"nx", "16"}, {"max_iter", "60"},
                       {"tol", "1e-28"}, {"series_terms", "60"}, {"series_ratios", "0.9,1.2"}})},
         picard},
        {{"fokker-planck", "Weak-form residual of the conditional law under particle and grid refinement",
          with_common({{"w", "1,-1,2,-2"}, {"Ms", "100,1000"}, {"grids", "16,32"}, {"reps", "20"}, {"kappa", "1"},
                       {"a", "0.5"}, {"sigma1", "0.5"}, {"sigma2", "0.5"}, {"y0", "0.5"}, {"T", "1"}, {"X", "1"}})},
         fokker_planck},
        {{"lemma61", "Mixed derivative of quarter-ordered double integrals",
          with_common({{"t", "1"}, {"x", "1"}, {"n", "128"}, {"h", "0.001"}, {"tol_const", "0.005"},
                       {"tol_poly", "0.001"}, {"plane_n", "16"}, {"plane_h", "0.001"}, {"plane_tol", "0.01"}})},
         lemma61},
        {{"control-equiv", "Per-trajectory and measure-based performance estimates",
          with_common({{"family", "constant"}, {"thetas", "0,0.5,-0.5"}, {"kappa", "1"}, {"a", "0.5"},
                       {"sigma1", "0.5"}, {"sigma2", "0.5"}, {"y0", "1"}, {"M", "50"}, {"reps", "100"}, {"T", "1"},
                       {"X", "1"}, {"nt", "16"}, {"nx", "16"}, {"cost", "lq"}, {"lambda", "1"}, {"target", "0"}})},
         control_equiv},
        {{"control-search", "Grid search over a policy family on several seed sets",
          with_common({{"family", "mean_feedback"}, {"thetas", "-1,-0.5,0,0.5,1"}, {"seeds", "11,12"},
                       {"kappa", "1"}, {"a", "0.5"}, {"sigma1", "0.5"}, {"sigma2", "0.5"}, {"y0", "1"}, {"M", "50"},
                       {"reps", "100"}, {"T", "1"}, {"X", "1"}, {"nt", "16"}, {"nx", "16"}, {"cost", "lq"},
                       {"lambda", "1"}, {"target", "0"}})},
         control_search},
    };
    return list;
}

}  // namespace

Params::Params(std::map<std::string, std::string> defaults, const std::map<std::string, std::string>& given)
    : values_(std::move(defaults)) {
    for (const auto& [k, v] : given) {
        auto it = values_.find(k);
        if (it == values_.end()) throw ConfigError("unknown key '" + k + "'");
        it->second = v;
    }
}

const std::string& Params::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
}

double Params::real(const std::string& key) const {
    const std::string& s = str(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' needs a real number, got '" + s + "'");
    }
}

int Params::integer(const std::string& key) const {
    const std::string& s = str(key);
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' needs an integer, got '" + s + "'");
    }
}

std::uint64_t Params::u64(const std::string& key) const {
    const std::string& s = str(key);
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
        const std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' needs a nonnegative integer, got '" + s + "'");
    }
}

std::vector<double> Params::reals(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& item : split(str(key), ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' needs a comma-separated list of reals");
        }
    }
    return out;
}

std::vector<int> Params::integers(const std::string& key) const {
    std::vector<int> out;
    for (const std::string& item : split(str(key), ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' needs a comma-separated list of integers");
        }
    }
    return out;
}

const std::vector<ExperimentInfo>& experiment_catalog() {
    static const std::vector<ExperimentInfo> catalog = [] {
        std::vector<ExperimentInfo> out;
        for (const Entry& e : entries()) out.push_back(e.info);
        return out;
    }();
    return catalog;
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& tokens) {
    std::map<std::string, std::string> out;
    for (const std::string& tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + tok + "'");
        const std::string key = trim(tok.substr(0, eq));
        if (!out.emplace(key, trim(tok.substr(eq + 1))).second) throw ConfigError("key '" + key + "' given twice");
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (!line.empty()) tokens.push_back(line);
    }
    return parse_overrides(tokens);
}

Table run_experiment(const std::string& name, const Params& params) {
    for (const Entry& e : entries())
        if (e.info.name == name) {
            if (params.integer("workers") < 1) throw ConfigError("workers must be >= 1");
            try {
                return e.run(params);
            } catch (const std::invalid_argument& err) {
                throw ConfigError(err.what());
            }
        }
    throw ConfigError("unknown experiment '" + name + "'");
}

void write_table(std::ostream& out, const std::string& name, const Params& params, const Table& table,
                 double wall_seconds) {
    out << "# experiment=" << name << '\n';
    out << "# version=" << kVersion << '\n';
    for (const auto& [k, v] : params.resolved()) out << "# " << k << '=' << v << '\n';
    out << "# wall_time_s=" << fmt(wall_seconds) << '\n';
    out << "# passed=" << (table.passed ? 1 : 0) << '\n';
    for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
        out << '\n';
    }
}

}  // namespace sheetlab
