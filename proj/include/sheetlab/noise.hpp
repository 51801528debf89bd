#pragma once

// Sampled m-channel Brownian sheets and the two kinds of planar stochastic
// integrals against them. Channel 0 is the common noise B_1; channels 1..m-1
// are idiosyncratic.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sheetlab/plane.hpp"

namespace sheetlab {

/// Node values of an m-channel Brownian sheet on a grid. Immutable.
class SheetPath {
public:
    /// `values` is indexed [channel][i][j] row-major; the sheet must vanish on
    /// both axes (std::invalid_argument otherwise).
    SheetPath(const Grid& grid, int channels, std::uint64_t seed, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    int channels() const { return channels_; }
    std::uint64_t seed() const { return seed_; }

    double value(int channel, int i, int j) const {
        return values_[offset(channel) + grid_.flat(i, j)];
    }
    double value(int channel, Point z) const;

    /// Increment over cell (i,j) = [t_i, t_{i+1}] x [x_j, x_{j+1}].
    double cell_increment(int channel, int i, int j) const {
        const std::size_t o = offset(channel);
        return values_[o + grid_.flat(i + 1, j + 1)] - values_[o + grid_.flat(i, j + 1)] -
               values_[o + grid_.flat(i + 1, j)] + values_[o + grid_.flat(i, j)];
    }

    std::span<const double> raw() const { return values_; }

    /// Restriction to the subgrid with every cell count divided by `factor`.
    SheetPath coarsened(int factor) const;

    /// Channels [first, first + count) as a new path.
    SheetPath channel_slice(int first, int count) const;

    /// Channels of `a` followed by channels of `b` (same grid required).
    static SheetPath concatenate(const SheetPath& a, const SheetPath& b);

private:
    std::size_t offset(int channel) const { return static_cast<std::size_t>(channel) * grid_.node_count(); }
    void check_channel(int channel) const;

    Grid grid_;
    int channels_;
    std::uint64_t seed_;
    std::vector<double> values_;
};

struct Rect {
    Point lo;
    Point hi;
};

/// Independent N(0, dt*dx) cell increments, cumulated over both axes. Channel
/// c draws from substream derive_seed(seed, {c}), so adding channels never
/// changes existing ones.
SheetPath sample_sheet(const Grid& grid, int channels, std::uint64_t seed);

/// B(hi) - B(lo.t, hi.x) - B(hi.t, lo.x) + B(lo); corners must be nodes.
double rect_increment(const SheetPath& path, int channel, Rect rect);

/// sum over cells of R_z of phi(lower-left corner) * dB(cell).
double ito_integral(const NodeField<double>& phi, const SheetPath& path, int channel, Point z);

/// sum over ordered pairs of distinct cells of R_z of
/// psi(corner, corner') * dB_ch1(cell) * dB_ch2(cell'). O(cells^2).
double double_ito_integral(const std::function<double(NodeIndex, NodeIndex)>& psi,
                           const SheetPath& path, int ch1, int ch2, Point z);

/// Binary dump: magic "BSHEET01", int32 nt, int32 nx, float64 T, float64 X,
/// int32 channels, uint64 seed, then channels*(nt+1)*(nx+1) float64 values in
/// [channel][i][j] order. Little-endian host byte order.
void write_sheet(const SheetPath& path, std::ostream& out);
SheetPath read_sheet(std::istream& in);
void save_sheet(const SheetPath& path, const std::filesystem::path& file);
SheetPath load_sheet(const std::filesystem::path& file);

}  // namespace sheetlab
