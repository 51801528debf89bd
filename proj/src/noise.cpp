#include "sheetlab/noise.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

constexpr std::array<char, 8> kMagic{'B', 'S', 'H', 'E', 'E', 'T', '0', '1'};

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated sheet file");
    return v;
}

}  // namespace

SheetPath::SheetPath(const Grid& grid, int channels, std::uint64_t seed, std::vector<double> values)
    : grid_(grid), channels_(channels), seed_(seed), values_(std::move(values)) {
    if (channels < 1) throw std::invalid_argument("a sheet needs at least one channel");
    if (values_.size() != static_cast<std::size_t>(channels) * grid_.node_count())
        throw std::invalid_argument("sheet value count does not match grid and channels");
    for (int c = 0; c < channels_; ++c) {
        for (int i = 0; i <= grid_.nt(); ++i)
            if (value(c, i, 0) != 0.0) throw std::invalid_argument("sheet must vanish on x = 0");
        for (int j = 0; j <= grid_.nx(); ++j)
            if (value(c, 0, j) != 0.0) throw std::invalid_argument("sheet must vanish on t = 0");
    }
}

void SheetPath::check_channel(int channel) const {
    if (channel < 0 || channel >= channels_)
        throw std::out_of_range("sheet channel " + std::to_string(channel) + " out of range");
}

double SheetPath::value(int channel, Point z) const {
    check_channel(channel);
    const NodeIndex k = grid_.node_index(z);
    return value(channel, k.i, k.j);
}

SheetPath SheetPath::coarsened(int factor) const {
    const Grid coarse = grid_.coarsened(factor);
    std::vector<double> out(static_cast<std::size_t>(channels_) * coarse.node_count());
    for (int c = 0; c < channels_; ++c)
        for (int i = 0; i <= coarse.nt(); ++i)
            for (int j = 0; j <= coarse.nx(); ++j)
                out[static_cast<std::size_t>(c) * coarse.node_count() + coarse.flat(i, j)] =
                    value(c, i * factor, j * factor);
    return SheetPath(coarse, channels_, seed_, std::move(out));
}

SheetPath SheetPath::channel_slice(int first, int count) const {
    if (count < 1 || first < 0 || first + count > channels_)
        throw std::out_of_range("channel slice out of range");
    const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(offset(first));
    const auto end = begin + static_cast<std::ptrdiff_t>(count * grid_.node_count());
    return SheetPath(grid_, count, seed_, std::vector<double>(begin, end));
}

SheetPath SheetPath::concatenate(const SheetPath& a, const SheetPath& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("cannot join sheets on different grids");
    std::vector<double> values(a.values_);
    values.insert(values.end(), b.values_.begin(), b.values_.end());
    return SheetPath(a.grid(), a.channels() + b.channels(), a.seed(), std::move(values));
}

SheetPath sample_sheet(const Grid& grid, int channels, std::uint64_t seed) {
    if (channels < 1) throw std::invalid_argument("sample_sheet needs m >= 1 channels");
    const double sd = std::sqrt(grid.cell_area());
    const std::size_t nodes = grid.node_count();
    std::vector<double> values(static_cast<std::size_t>(channels) * nodes, 0.0);
    for (int c = 0; c < channels; ++c) {
        NormalStream normal(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
        double* v = values.data() + static_cast<std::size_t>(c) * nodes;
        for (int i = 0; i < grid.nt(); ++i)
            for (int j = 0; j < grid.nx(); ++j)
                v[grid.flat(i + 1, j + 1)] =
                    v[grid.flat(i + 1, j)] + v[grid.flat(i, j + 1)] - v[grid.flat(i, j)] + sd * normal();
    }
    return SheetPath(grid, channels, seed, std::move(values));
}

double rect_increment(const SheetPath& path, int channel, Rect rect) {
    if (rect.hi.t < rect.lo.t || rect.hi.x < rect.lo.x)
        throw std::invalid_argument("rectangle corners are not ordered");
    const Grid& g = path.grid();
    const NodeIndex lo = g.node_index(rect.lo);
    const NodeIndex hi = g.node_index(rect.hi);
    return path.value(channel, hi.i, hi.j) - path.value(channel, lo.i, hi.j) -
           path.value(channel, hi.i, lo.j) + path.value(channel, lo.i, lo.j);
}

double ito_integral(const NodeField<double>& phi, const SheetPath& path, int channel, Point z) {
    if (!(phi.grid() == path.grid())) throw std::invalid_argument("integrand and sheet grids differ");
    if (channel < 0 || channel >= path.channels()) throw std::out_of_range("sheet channel out of range");
    const NodeIndex k = path.grid().node_index(z);
    double sum = 0.0;
    for (int i = 0; i < k.i; ++i)
        for (int j = 0; j < k.j; ++j) sum += phi(i, j) * path.cell_increment(channel, i, j);
    return sum;
}

double double_ito_integral(const std::function<double(NodeIndex, NodeIndex)>& psi,
                           const SheetPath& path, int ch1, int ch2, Point z) {
    if (ch1 < 0 || ch2 < 0 || ch1 >= path.channels() || ch2 >= path.channels())
        throw std::out_of_range("sheet channel out of range");
    const NodeIndex k = path.grid().node_index(z);
    double sum = 0.0;
    for (int i = 0; i < k.i; ++i)
        for (int j = 0; j < k.j; ++j) {
            const double db = path.cell_increment(ch1, i, j);
            for (int ip = 0; ip < k.i; ++ip)
                for (int jp = 0; jp < k.j; ++jp) {
                    if (i == ip && j == jp) continue;
                    sum += psi({i, j}, {ip, jp}) * db * path.cell_increment(ch2, ip, jp);
                }
        }
    return sum;
}

void write_sheet(const SheetPath& path, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    const Grid& g = path.grid();
    put<std::int32_t>(out, g.nt());
    put<std::int32_t>(out, g.nx());
    put<double>(out, g.horizon().t);
    put<double>(out, g.horizon().x);
    put<std::int32_t>(out, path.channels());
    put<std::uint64_t>(out, path.seed());
    const auto raw = path.raw();
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed to write sheet");
}

SheetPath read_sheet(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw std::runtime_error("not a sheet file (bad magic)");
    const auto nt = get<std::int32_t>(in);
    const auto nx = get<std::int32_t>(in);
    const auto T = get<double>(in);
    const auto X = get<double>(in);
    const auto channels = get<std::int32_t>(in);
    const auto seed = get<std::uint64_t>(in);
    const Grid grid({T, X}, nt, nx);
    if (channels < 1) throw std::runtime_error("sheet file has no channels");
    std::vector<double> values(static_cast<std::size_t>(channels) * grid.node_count());
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated sheet file");
    return SheetPath(grid, channels, seed, std::move(values));
}

void save_sheet(const SheetPath& path, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + file.string());
    write_sheet(path, out);
}

SheetPath load_sheet(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    return read_sheet(in);
}

}  // namespace sheetlab
