#pragma once

// Scan orders over 2D patch grids: recursive Hilbert curves in four
// directions, the linear baselines (raster, boustrophedon, Morton), the
// vertical shift, and adaptation to grids that are not 2^k squares.
//
// Coordinates are (row, col) with the origin at the top-left cell.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fractal/error.hpp"

namespace fractal {

inline constexpr int kMaxHilbertDepth = 12;

struct GridShape {
  std::size_t rows = 1;
  std::size_t cols = 1;

  constexpr std::size_t cells() const noexcept { return rows * cols; }
  constexpr GridShape transposed() const noexcept { return {cols, rows}; }
  friend constexpr bool operator==(const GridShape&, const GridShape&) = default;
};

struct CellCoord {
  std::int64_t row = 0;
  std::int64_t col = 0;

  friend constexpr auto operator<=>(const CellCoord&, const CellCoord&) = default;
};

constexpr std::int64_t manhattan(CellCoord a, CellCoord b) noexcept {
  const auto dr = a.row - b.row;
  const auto dc = a.col - b.col;
  return (dr < 0 ? -dr : dr) + (dc < 0 ? -dc : dc);
}

constexpr std::int64_t squared_distance(CellCoord a, CellCoord b) noexcept {
  const auto dr = a.row - b.row;
  const auto dc = a.col - b.col;
  return dr * dr + dc * dc;
}

constexpr bool in_bounds(CellCoord c, GridShape shape) noexcept {
  return c.row >= 0 && c.col >= 0 && static_cast<std::size_t>(c.row) < shape.rows &&
         static_cast<std::size_t>(c.col) < shape.cols;
}

enum class CurveKind { hilbert, raster, boustrophedon, morton };

constexpr std::string_view to_string(CurveKind kind) noexcept {
  switch (kind) {
    case CurveKind::hilbert: return "hilbert";
    case CurveKind::raster: return "raster";
    case CurveKind::boustrophedon: return "boustrophedon";
    case CurveKind::morton: return "morton";
  }
  return "unknown";
}

inline CurveKind parse_curve_kind(std::string_view name) {
  for (auto kind : {CurveKind::hilbert, CurveKind::raster, CurveKind::boustrophedon,
                    CurveKind::morton}) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "zigzag") return CurveKind::boustrophedon;
  if (name == "zorder" || name == "z-order") return CurveKind::morton;
  throw Error(ErrorCode::ParseError, "unknown curve kind '" + std::string(name) + "'");
}

struct CurveSpec {
  CurveKind kind = CurveKind::hilbert;
  GridShape shape{};
  int direction = 1;
  int shift = 0;

  void validate() const {
    if (shape.rows < 1 || shape.cols < 1) {
      throw Error(ErrorCode::InvalidSpec, "grid must have at least one row and one column");
    }
    if (direction < 1 || direction > 4) {
      throw Error(ErrorCode::InvalidDirection,
                  "direction must be in 1..4, got " + std::to_string(direction));
    }
    if (kind != CurveKind::hilbert && direction != 1) {
      throw Error(ErrorCode::InvalidDirection,
                  std::string(to_string(kind)) + " orders only support direction 1");
    }
    if (static_cast<std::size_t>(shift < 0 ? -static_cast<std::int64_t>(shift) : shift) >=
        shape.rows) {
      throw Error(ErrorCode::OffsetTooLarge, "|shift| must be smaller than the row count");
    }
  }

  friend bool operator==(const CurveSpec&, const CurveSpec&) = default;
};

// A bijection between the cells of a grid and sequence positions.
// Immutable once built; the constructor rejects anything that is not a
// permutation of the grid.
class ScanOrder {
 public:
  ScanOrder(CurveSpec spec, std::vector<CellCoord> forward)
      : spec_(spec), forward_(std::move(forward)) {
    const auto shape = spec_.shape;
    if (forward_.size() != shape.cells()) {
      throw Error(ErrorCode::NotBijection, "forward sequence has " +
                                               std::to_string(forward_.size()) +
                                               " entries for " + std::to_string(shape.cells()) +
                                               " cells");
    }
    inverse_.assign(shape.cells(), kUnvisited);
    for (std::size_t i = 0; i < forward_.size(); ++i) {
      const auto cell = forward_[i];
      if (!in_bounds(cell, shape)) {
        throw Error(ErrorCode::NotBijection, "cell (" + std::to_string(cell.row) + "," +
                                                 std::to_string(cell.col) + ") is out of bounds");
      }
      auto& slot = inverse_[flat(cell)];
      if (slot != kUnvisited) {
        throw Error(ErrorCode::NotBijection, "cell (" + std::to_string(cell.row) + "," +
                                                 std::to_string(cell.col) + ") visited twice");
      }
      slot = static_cast<std::uint32_t>(i);
    }
  }

  const CurveSpec& spec() const noexcept { return spec_; }
  GridShape shape() const noexcept { return spec_.shape; }
  std::size_t size() const noexcept { return forward_.size(); }
  std::span<const CellCoord> forward() const noexcept { return forward_; }
  CellCoord operator[](std::size_t i) const { return forward_[i]; }

  std::size_t index_of(CellCoord cell) const {
    if (!in_bounds(cell, spec_.shape)) {
      throw Error(ErrorCode::DimensionMismatch, "cell outside the order's grid");
    }
    return inverse_[flat(cell)];
  }

  // Row-major view of the inverse permutation.
  std::span<const std::uint32_t> inverse() const noexcept { return inverse_; }

  friend bool operator==(const ScanOrder& a, const ScanOrder& b) {
    return a.spec_ == b.spec_ && a.forward_ == b.forward_;
  }

 private:
  static constexpr std::uint32_t kUnvisited = 0xffffffffu;

  std::size_t flat(CellCoord c) const noexcept {
    return static_cast<std::size_t>(c.row) * spec_.shape.cols + static_cast<std::size_t>(c.col);
  }

  CurveSpec spec_;
  std::vector<CellCoord> forward_;
  std::vector<std::uint32_t> inverse_;
};

// Recursion state of the Hilbert generator: the frame spans the square
// origin + s*x_vec + t*y_vec for s, t in [0, 1].
struct HilbertFrame {
  std::array<double, 2> origin{0.0, 0.0};
  std::array<double, 2> x_vec{0.0, 0.0};
  std::array<double, 2> y_vec{0.0, 0.0};
  int depth = 0;
};

namespace detail {

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

inline int ceil_log2(std::size_t n) noexcept {
  int k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

inline void hilbert_recurse(const HilbertFrame& f, std::vector<CellCoord>& out) {
  const auto& x = f.x_vec;
  const auto& y = f.y_vec;
  if (f.depth == 0) {
    // Plot the frame's midpoint and snap to the integer cell containing it.
    const double r = f.origin[0] + (x[0] + y[0]) / 2.0;
    const double c = f.origin[1] + (x[1] + y[1]) / 2.0;
    out.push_back({static_cast<std::int64_t>(std::floor(r)),
                   static_cast<std::int64_t>(std::floor(c))});
    return;
  }
  const std::array<double, 2> hx{x[0] / 2.0, x[1] / 2.0};
  const std::array<double, 2> hy{y[0] / 2.0, y[1] / 2.0};
  const auto& o = f.origin;
  const int d = f.depth - 1;
  hilbert_recurse({o, hy, hx, d}, out);
  hilbert_recurse({{o[0] + hx[0], o[1] + hx[1]}, hx, hy, d}, out);
  hilbert_recurse({{o[0] + hx[0] + hy[0], o[1] + hx[1] + hy[1]}, hx, hy, d}, out);
  // Last quadrant runs with halved, swapped and negated vectors so that the
  // sub-curve ends on the frame's y_vec corner.
  hilbert_recurse({{o[0] + hx[0] + y[0], o[1] + hx[1] + y[1]}, {-hy[0], -hy[1]},
                   {-hx[0], -hx[1]}, d},
                  out);
}

}  // namespace detail

// Top-level frame for each direction on an n x n grid. Direction 1 runs
// (0,0) -> (n-1,0); 2 is its transpose; 3 and 4 are the 180 degree
// rotations of 2 and 1.
inline HilbertFrame hilbert_frame(int depth, int direction) {
  if (direction < 1 || direction > 4) {
    throw Error(ErrorCode::InvalidDirection,
                "direction must be in 1..4, got " + std::to_string(direction));
  }
  const double n = std::ldexp(1.0, depth);
  switch (direction) {
    case 1: return {{0.0, 0.0}, {0.0, n}, {n, 0.0}, depth};
    case 2: return {{0.0, 0.0}, {n, 0.0}, {0.0, n}, depth};
    case 3: return {{n, n}, {-n, 0.0}, {0.0, -n}, depth};
    default: return {{n, n}, {0.0, -n}, {-n, 0.0}, depth};
  }
}

inline ScanOrder generate_hilbert(int depth, int direction) {
  if (direction < 1 || direction > 4) {
    throw Error(ErrorCode::InvalidDirection,
                "direction must be in 1..4, got " + std::to_string(direction));
  }
  if (depth < 0 || depth > kMaxHilbertDepth) {
    throw Error(ErrorCode::DepthTooLarge, "depth must be in 0.." +
                                              std::to_string(kMaxHilbertDepth) + ", got " +
                                              std::to_string(depth));
  }
  const std::size_t side = std::size_t{1} << depth;
  std::vector<CellCoord> forward;
  forward.reserve(side * side);
  detail::hilbert_recurse(hilbert_frame(depth, direction), forward);
  return ScanOrder({CurveKind::hilbert, {side, side}, direction, 0}, std::move(forward));
}

inline ScanOrder generate_linear(CurveKind kind, GridShape shape) {
  if (kind == CurveKind::hilbert) {
    throw Error(ErrorCode::InvalidSpec, "generate_linear does not produce hilbert orders");
  }
  CurveSpec spec{kind, shape, 1, 0};
  spec.validate();
  std::vector<CellCoord> forward;
  forward.reserve(shape.cells());
  const auto rows = static_cast<std::int64_t>(shape.rows);
  const auto cols = static_cast<std::int64_t>(shape.cols);
  switch (kind) {
    case CurveKind::raster:
      for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t c = 0; c < cols; ++c) forward.push_back({r, c});
      break;
    case CurveKind::boustrophedon:
      for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t k = 0; k < cols; ++k) forward.push_back({r, r % 2 == 0 ? k : cols - 1 - k});
      break;
    case CurveKind::morton: {
      if (shape.rows != shape.cols || !detail::is_power_of_two(shape.rows)) {
        throw Error(ErrorCode::ShapeNotSupported,
                    "morton order needs equal power-of-two sides, got " +
                        std::to_string(shape.rows) + "x" + std::to_string(shape.cols));
      }
      // Column bits occupy the even positions of the code, row bits the odd.
      for (std::uint64_t z = 0; z < shape.cells(); ++z) {
        std::int64_t r = 0, c = 0;
        for (int b = 0; b < 32; ++b) {
          c |= static_cast<std::int64_t>((z >> (2 * b)) & 1u) << b;
          r |= static_cast<std::int64_t>((z >> (2 * b + 1)) & 1u) << b;
        }
        forward.push_back({r, c});
      }
      break;
    }
    case CurveKind::hilbert: break;
  }
  return ScanOrder(spec, std::move(forward));
}

inline ScanOrder shift_order(const ScanOrder& order, std::int64_t offset) {
  const auto rows = static_cast<std::int64_t>(order.shape().rows);
  if (offset <= -rows || offset >= rows) {
    throw Error(ErrorCode::OffsetTooLarge, "|offset| must be smaller than " +
                                               std::to_string(rows) + ", got " +
                                               std::to_string(offset));
  }
  std::vector<CellCoord> forward;
  forward.reserve(order.size());
  for (const auto cell : order.forward()) {
    forward.push_back({((cell.row + offset) % rows + rows) % rows, cell.col});
  }
  auto spec = order.spec();
  spec.shift = static_cast<int>((spec.shift + offset) % rows);
  return ScanOrder(spec, std::move(forward));
}

// Restricts an order on the smallest enclosing 2^k square to `shape`,
// keeping the relative order of the surviving cells.
inline ScanOrder adapt_to_shape(const ScanOrder& order, GridShape shape) {
  if (shape.rows < 1 || shape.cols < 1) {
    throw Error(ErrorCode::InvalidSpec, "target grid must be non-empty");
  }
  const std::size_t side = std::size_t{1} << detail::ceil_log2(std::max(shape.rows, shape.cols));
  if (order.shape() != GridShape{side, side}) {
    throw Error(ErrorCode::EnclosingGridMismatch,
                "a " + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) +
                    " grid needs an order on the " + std::to_string(side) + "x" +
                    std::to_string(side) + " grid");
  }
  std::vector<CellCoord> forward;
  forward.reserve(shape.cells());
  for (const auto cell : order.forward()) {
    if (in_bounds(cell, shape)) forward.push_back(cell);
  }
  auto spec = order.spec();
  spec.shape = shape;
  return ScanOrder(spec, std::move(forward));
}

// Collapses every aligned 2x2 block to one cell. Each block must occupy
// four consecutive sequence positions; the blocks are then ordered by the
// position at which the curve enters them.
inline ScanOrder self_similarity_reduce(const ScanOrder& order) {
  const auto shape = order.shape();
  if (shape.rows != shape.cols || !detail::is_power_of_two(shape.rows) || shape.rows < 2) {
    throw Error(ErrorCode::ShapeNotSupported,
                "self-similarity reduction needs a 2^d x 2^d grid with d >= 1");
  }
  const std::size_t half = shape.rows / 2;
  std::vector<std::pair<std::size_t, CellCoord>> blocks;
  blocks.reserve(half * half);
  for (std::size_t br = 0; br < half; ++br) {
    for (std::size_t bc = 0; bc < half; ++bc) {
      std::array<std::size_t, 4> pos{};
      std::size_t k = 0;
      for (std::size_t dr = 0; dr < 2; ++dr)
        for (std::size_t dc = 0; dc < 2; ++dc)
          pos[k++] = order.index_of({static_cast<std::int64_t>(2 * br + dr),
                                     static_cast<std::int64_t>(2 * bc + dc)});
      const auto [lo, hi] = std::minmax_element(pos.begin(), pos.end());
      if (*hi - *lo != 3) {
        throw Error(ErrorCode::NotBlockContiguous,
                    "block (" + std::to_string(br) + "," + std::to_string(bc) +
                        ") spans sequence positions " + std::to_string(*lo) + ".." +
                        std::to_string(*hi));
      }
      blocks.push_back({*lo, {static_cast<std::int64_t>(br), static_cast<std::int64_t>(bc)}});
    }
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<CellCoord> forward;
  forward.reserve(blocks.size());
  for (const auto& [pos, cell] : blocks) forward.push_back(cell);
  auto spec = order.spec();
  spec.shape = {half, half};
  spec.shift = 0;
  return ScanOrder(spec, std::move(forward));
}

inline CellCoord transpose(CellCoord c) noexcept { return {c.col, c.row}; }

inline CellCoord rot180(CellCoord c, GridShape shape) noexcept {
  return {static_cast<std::int64_t>(shape.rows) - 1 - c.row,
          static_cast<std::int64_t>(shape.cols) - 1 - c.col};
}

// Transposed order on the transposed grid. Hilbert direction labels follow
// the family relations (1 <-> 2, 3 <-> 4); other kinds keep direction 1.
inline ScanOrder transpose(const ScanOrder& order) {
  std::vector<CellCoord> forward;
  forward.reserve(order.size());
  for (const auto cell : order.forward()) forward.push_back(transpose(cell));
  auto spec = order.spec();
  spec.shape = spec.shape.transposed();
  if (spec.kind == CurveKind::hilbert) {
    static constexpr std::array<int, 5> kTransposed{0, 2, 1, 4, 3};
    spec.direction = kTransposed[static_cast<std::size_t>(spec.direction)];
  }
  spec.shift = 0;
  return ScanOrder(spec, std::move(forward));
}

inline ScanOrder rot180(const ScanOrder& order) {
  std::vector<CellCoord> forward;
  forward.reserve(order.size());
  for (const auto cell : order.forward()) forward.push_back(rot180(cell, order.shape()));
  auto spec = order.spec();
  if (spec.kind == CurveKind::hilbert) {
    static constexpr std::array<int, 5> kRotated{0, 4, 3, 2, 1};
    spec.direction = kRotated[static_cast<std::size_t>(spec.direction)];
  }
  spec.shift = -spec.shift;
  return ScanOrder(spec, std::move(forward));
}

// Builds the order a spec describes. Hilbert orders on grids that are not
// 2^k squares are generated on the enclosing square and then adapted; the
// shift is applied last.
inline ScanOrder make_order(const CurveSpec& spec) {
  spec.validate();
  auto order = [&] {
    if (spec.kind != CurveKind::hilbert) return generate_linear(spec.kind, spec.shape);
    const int depth = detail::ceil_log2(std::max(spec.shape.rows, spec.shape.cols));
    auto full = generate_hilbert(depth, spec.direction);
    if (full.shape() == spec.shape) return full;
    return adapt_to_shape(full, spec.shape);
  }();
  if (spec.shift == 0) return order;
  return shift_order(order, spec.shift);
}

}  // namespace fractal
