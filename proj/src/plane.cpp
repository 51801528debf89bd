#include "sheetlab/plane.hpp"

#include <cmath>
#include <string>

namespace sheetlab {

namespace {

constexpr double kNodeTolerance = 1e-9;

int snap(double value, double step, int max_index, const char* axis) {
    const double scaled = value / step;
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > kNodeTolerance * std::max(1.0, std::abs(scaled)) ||
        rounded < 0 || rounded > max_index) {
        throw std::invalid_argument(std::string("point is not a grid node along ") + axis + ": " +
                                    std::to_string(value));
    }
    return static_cast<int>(rounded);
}

}  // namespace

Point make_point(double t, double x) {
    if (!std::isfinite(t) || !std::isfinite(x) || t < 0.0 || x < 0.0)
        throw std::invalid_argument("plane points need finite nonnegative coordinates");
    return {t, x};
}

Point sup_join(Point a, Point b) { return {std::max(a.t, b.t), std::max(a.x, b.x)}; }

int quarter_indicator(Point a, Point b) { return (a.t <= b.t && a.x >= b.x) ? 1 : 0; }

Grid::Grid(Point horizon, int nt, int nx) : horizon_(horizon), nt_(nt), nx_(nx) {
    if (nt < 1 || nx < 1) throw std::invalid_argument("grid needs at least one cell per axis");
    if (!(horizon.t > 0.0) || !(horizon.x > 0.0) || !std::isfinite(horizon.t) ||
        !std::isfinite(horizon.x))
        throw std::invalid_argument("grid horizon must be positive and finite");
}

NodeIndex Grid::node_index(Point z) const {
    return {snap(z.t, dt(), nt_, "t"), snap(z.x, dx(), nx_, "x")};
}

Grid Grid::coarsened(int factor) const {
    if (factor < 1 || nt_ % factor != 0 || nx_ % factor != 0)
        throw std::invalid_argument("coarsening factor must divide both cell counts");
    return Grid(horizon_, nt_ / factor, nx_ / factor);
}

NodeField<double> tabulate(const Grid& grid, const std::function<double(Point)>& h) {
    NodeField<double> out(grid);
    for (int i = 0; i <= grid.nt(); ++i)
        for (int j = 0; j <= grid.nx(); ++j) out(i, j) = h(grid.node(i, j));
    return out;
}

double rect_integral(const NodeField<double>& h, Point z) {
    const Grid& grid = h.grid();
    const NodeIndex k = grid.node_index(z);
    double sum = 0.0;
    for (int i = 0; i < k.i; ++i)
        for (int j = 0; j < k.j; ++j) sum += h(i, j);
    return sum * grid.cell_area();
}

double double_rect_integral(const std::function<double(NodeIndex, NodeIndex)>& h, Point z,
                            const Grid& grid) {
    const NodeIndex k = grid.node_index(z);
    double sum = 0.0;
    for (int i = 0; i < k.i; ++i)
        for (int j = 0; j < k.j; ++j)
            for (int ip = 0; ip < k.i; ++ip)
                for (int jp = 0; jp < k.j; ++jp) sum += h({i, j}, {ip, jp});
    const double da = grid.cell_area();
    return sum * da * da;
}

double mixed_partial(const std::function<double(Point)>& f, Point z, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("mixed_partial step must be positive");
    return (f({z.t + h, z.x + h}) - f({z.t + h, z.x}) - f({z.t, z.x + h}) + f(z)) / (h * h);
}

DoubleIntegralIdentityReport diff_double_integral_identity_check(
    const std::function<double(Point, Point)>& f, Point z, const Grid& grid, double h) {
    const int nt = grid.nt();
    const int nx = grid.nx();

    // Midpoint rule on R_w scaled to nt x nx cells; smooth in w, so the
    // finite difference below sees the integral and not the cell layout.
    const auto double_integral = [&](Point w) {
        const double dt = w.t / nt;
        const double dx = w.x / nx;
        double sum = 0.0;
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < nx; ++j) {
                const Point a{(i + 0.5) * dt, (j + 0.5) * dx};
                for (int ip = 0; ip < nt; ++ip)
                    for (int jp = 0; jp < nx; ++jp) sum += f(a, {(ip + 0.5) * dt, (jp + 0.5) * dx});
            }
        return sum * (dt * dx) * (dt * dx);
    };

    DoubleIntegralIdentityReport report;
    report.lhs = mixed_partial(double_integral, z, h);

    const double dt = z.t / nt;
    const double dx = z.x / nx;
    double points = 0.0;
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j) {
            const Point m{(i + 0.5) * dt, (j + 0.5) * dx};
            points += f(z, m) + f(m, z);
        }
    report.point_terms = points * dt * dx;

    double edges = 0.0;
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j) {
            const double s = (i + 0.5) * dt;
            const double a = (j + 0.5) * dx;
            edges += f({z.t, a}, {s, z.x}) + f({s, z.x}, {z.t, a});
        }
    report.edge_terms = edges * dt * dx;

    report.rhs = report.point_terms + report.edge_terms;
    report.residual = std::abs(report.lhs - report.rhs);
    report.point_only_gap = std::abs(report.lhs - report.point_terms);
    return report;
}

}  // namespace sheetlab
