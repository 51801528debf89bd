#pragma once

// Geometry of the parameter quarter-plane: points z = (t, x), uniform grids,
// Riemann sums over rectangles R_z = [0,t] x [0,x] and their products, and the
// mixed finite difference d^2/dtdx.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sheetlab {

struct Point {
    double t = 0.0;
    double x = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Throws std::invalid_argument unless both coordinates are finite and >= 0.
Point make_point(double t, double x);

/// |z| = t * x, the area of R_z.
inline double area(Point z) { return z.t * z.x; }

/// Componentwise maximum a v b.
Point sup_join(Point a, Point b);

/// I(a quarter-order b): 1 iff a.t <= b.t and a.x >= b.x.
int quarter_indicator(Point a, Point b);

struct NodeIndex {
    int i = 0;
    int j = 0;

    friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

/// Uniform grid on [0,T] x [0,X] with nt x nx cells. Nodes include both ends.
class Grid {
public:
    Grid(Point horizon, int nt, int nx);

    Point horizon() const { return horizon_; }
    int nt() const { return nt_; }
    int nx() const { return nx_; }
    double dt() const { return horizon_.t / nt_; }
    double dx() const { return horizon_.x / nx_; }
    double cell_area() const { return dt() * dx(); }
    std::size_t node_count() const {
        return static_cast<std::size_t>(nt_ + 1) * static_cast<std::size_t>(nx_ + 1);
    }
    std::size_t flat(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(nx_ + 1) +
               static_cast<std::size_t>(j);
    }
    Point node(int i, int j) const { return {i * dt(), j * dx()}; }
    Point node(NodeIndex k) const { return node(k.i, k.j); }
    bool contains(NodeIndex k) const { return k.i >= 0 && k.j >= 0 && k.i <= nt_ && k.j <= nx_; }

    /// Index of the node at z; throws std::invalid_argument when z is not a node.
    NodeIndex node_index(Point z) const;

    /// Same grid with every cell count divided by `factor` (which must divide both).
    Grid coarsened(int factor) const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Point horizon_;
    int nt_;
    int nx_;
};

/// Values of type T stored on every node of a grid, row-major in (i, j).
template <class T>
class NodeField {
public:
    NodeField(const Grid& grid, T fill = T{}) : grid_(grid), values_(grid.node_count(), fill) {}

    const Grid& grid() const { return grid_; }
    T& operator()(int i, int j) { return values_[grid_.flat(i, j)]; }
    const T& operator()(int i, int j) const { return values_[grid_.flat(i, j)]; }
    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }

private:
    Grid grid_;
    std::vector<T> values_;
};

/// Tabulates h at every node.
NodeField<double> tabulate(const Grid& grid, const std::function<double(Point)>& h);

/// Lower-left-corner Riemann sum of h over the cells of R_z.
double rect_integral(const NodeField<double>& h, Point z);

/// Double lower-left-corner Riemann sum over all ordered pairs of cells of
/// R_z x R_z (identical-cell pairs included). O(cells^2).
double double_rect_integral(const std::function<double(NodeIndex, NodeIndex)>& h, Point z,
                            const Grid& grid);

/// (F(t+h,x+h) - F(t+h,x) - F(t,x+h) + F(t,x)) / h^2.
double mixed_partial(const std::function<double(Point)>& f, Point z, double h);

/// Sum over ordered pairs of distinct cells c = (i,j), c' = (i',j') of R_z
/// with I(c quarter-order c'), i.e. i <= i' and j >= j', of
///
///     sum_{a,b} node(c v c')[a*nb + b] * g(c)[a] * h(c')[b],
///
/// where c v c' is the node (i', j). `g` and `h` hold `na` and `nb` values per
/// cell of the full grid (cell (i,j) at offset (i*nx + j)*na); `node` holds
/// na*nb values per grid node. Runs in O(cells * na * nb) using running column
/// and row sums.
template <class T>
T quarter_pair_contract(const Grid& grid, NodeIndex z, std::span<const T> node, std::span<const T> g,
                        int na, std::span<const T> h, int nb);

/// Brute-force reference for quarter_pair_contract; O(cells^2). Test use.
template <class T>
T quarter_pair_contract_bruteforce(const Grid& grid, NodeIndex z, std::span<const T> node,
                                   std::span<const T> g, int na, std::span<const T> h, int nb);

/// Result of checking d^2/dtdx of a double integral over R_z x R_z against
/// its boundary terms.
struct DoubleIntegralIdentityReport {
    double lhs = 0.0;            ///< mixed finite difference of the double integral
    double point_terms = 0.0;    ///< int f(z,.) + int f(.,z)
    double edge_terms = 0.0;     ///< int int f((t,a),(s,x)) + int int f((s,x),(t,a))
    double rhs = 0.0;            ///< point_terms + edge_terms
    double residual = 0.0;       ///< |lhs - rhs|
    double point_only_gap = 0.0; ///< |lhs - point_terms|
};

/// Mixed partial of G(z) = int int_{R_z x R_z} f, by finite differences of a
/// midpoint quadrature with grid.nt() x grid.nx() cells on each R_z', compared
/// to the exact derivative. All four boundary contributions are needed in
/// general; point_only_gap records how far the two point terms alone are off.
DoubleIntegralIdentityReport diff_double_integral_identity_check(
    const std::function<double(Point, Point)>& f, Point z, const Grid& grid, double h);

// ---------------------------------------------------------------------------

template <class T>
T quarter_pair_contract(const Grid& grid, NodeIndex z, std::span<const T> node, std::span<const T> g,
                        int na, std::span<const T> h, int nb) {
    const int nx = grid.nx();
    const auto cell = [nx](int i, int j) { return static_cast<std::size_t>(i) * nx + j; };
    std::vector<T> colsum(static_cast<std::size_t>(z.j) * na, T{});
    std::vector<T> rowsum(static_cast<std::size_t>(nb));
    T total{};
    for (int ip = 0; ip < z.i; ++ip) {
        std::fill(rowsum.begin(), rowsum.end(), T{});
        for (int j = 0; j < z.j; ++j) {
            const T* gc = &g[cell(ip, j) * na];
            const T* hc = &h[cell(ip, j) * nb];
            T* cs = &colsum[static_cast<std::size_t>(j) * na];
            for (int a = 0; a < na; ++a) cs[a] += gc[a];
            for (int b = 0; b < nb; ++b) rowsum[b] += hc[b];
            const T* f = &node[grid.flat(ip, j) * na * nb];
            for (int a = 0; a < na; ++a) {
                T acc{};
                for (int b = 0; b < nb; ++b) acc += f[a * nb + b] * (rowsum[b] * cs[a] - hc[b] * gc[a]);
                total += acc;
            }
        }
    }
    return total;
}

template <class T>
T quarter_pair_contract_bruteforce(const Grid& grid, NodeIndex z, std::span<const T> node,
                                   std::span<const T> g, int na, std::span<const T> h, int nb) {
    const int nx = grid.nx();
    const auto cell = [nx](int i, int j) { return static_cast<std::size_t>(i) * nx + j; };
    T total{};
    for (int i = 0; i < z.i; ++i)
        for (int j = 0; j < z.j; ++j)
            for (int ip = 0; ip < z.i; ++ip)
                for (int jp = 0; jp < z.j; ++jp) {
                    if (i == ip && j == jp) continue;
                    if (!quarter_indicator(grid.node(i, j), grid.node(ip, jp))) continue;
                    const int vi = std::max(i, ip);
                    const int vj = std::max(j, jp);
                    const T* f = &node[grid.flat(vi, vj) * na * nb];
                    for (int a = 0; a < na; ++a)
                        for (int b = 0; b < nb; ++b)
                            total += f[a * nb + b] * g[cell(i, j) * na + a] * h[cell(ip, jp) * nb + b];
                }
    return total;
}

}  // namespace sheetlab
