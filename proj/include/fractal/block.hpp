#pragma once

// The scan-and-merge block: a patch grid is serialized along four
// directional curves, each sequence goes through a selective scan, the
// outputs are put back on the grid and the four grids are merged.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fractal/curves.hpp"
#include "fractal/error.hpp"
#include "fractal/random.hpp"
#include "fractal/ssm.hpp"

namespace fractal {

// rows x cols x channels feature map, stored row-major with channels
// innermost.
class PatchGrid {
 public:
  PatchGrid(GridShape shape, std::size_t channels)
      : shape_(shape), channels_(channels), data_(shape.cells() * channels, 0.0) {
    check_dims();
  }

  PatchGrid(GridShape shape, std::size_t channels, std::vector<double> data)
      : shape_(shape), channels_(channels), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_.cells() * channels_) {
      throw Error(ErrorCode::ShapeMismatch, "grid data has " + std::to_string(data_.size()) +
                                                " values, expected " +
                                                std::to_string(shape_.cells() * channels_));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidSpec, "grid values must be finite");
    }
  }

  GridShape shape() const noexcept { return shape_; }
  std::size_t channels() const noexcept { return channels_; }
  std::span<const double> data() const noexcept { return data_; }

  double& at(CellCoord cell, std::size_t channel) { return data_[offset(cell, channel)]; }
  double at(CellCoord cell, std::size_t channel) const { return data_[offset(cell, channel)]; }

  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;

 private:
  void check_dims() const {
    if (shape_.rows < 1 || shape_.cols < 1 || channels_ < 1) {
      throw Error(ErrorCode::InvalidSpec, "grid needs rows, cols and channels >= 1");
    }
  }

  std::size_t offset(CellCoord cell, std::size_t channel) const {
    return (static_cast<std::size_t>(cell.row) * shape_.cols + static_cast<std::size_t>(cell.col)) *
               channels_ +
           channel;
  }

  GridShape shape_;
  std::size_t channels_;
  std::vector<double> data_;
};

inline PatchGrid transpose(const PatchGrid& grid) {
  PatchGrid out(grid.shape().transposed(), grid.channels());
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(grid.shape().rows); ++r)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(grid.shape().cols); ++c)
      for (std::size_t ch = 0; ch < grid.channels(); ++ch) out.at({c, r}, ch) = grid.at({r, c}, ch);
  return out;
}

inline PatchGrid rot180(const PatchGrid& grid) {
  PatchGrid out(grid.shape(), grid.channels());
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(grid.shape().rows); ++r)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(grid.shape().cols); ++c)
      for (std::size_t ch = 0; ch < grid.channels(); ++ch)
        out.at(rot180(CellCoord{r, c}, grid.shape()), ch) = grid.at({r, c}, ch);
  return out;
}

inline PatchGrid random_grid(GridShape shape, std::size_t channels, std::uint64_t seed) {
  SeededStream rng(seed);
  std::vector<double> data(shape.cells() * channels);
  for (auto& v : data) v = rng.uniform(-1.0, 1.0);
  return PatchGrid(shape, channels, std::move(data));
}

// One sequence per channel, in scan order.
inline std::vector<Sequence> serialize(const PatchGrid& grid, const ScanOrder& order) {
  if (order.shape() != grid.shape()) {
    throw Error(ErrorCode::ShapeMismatch, "order and grid shapes differ");
  }
  std::vector<Sequence> seqs(grid.channels(), Sequence(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto cell = order[i];
    for (std::size_t ch = 0; ch < grid.channels(); ++ch) seqs[ch][i] = grid.at(cell, ch);
  }
  return seqs;
}

inline PatchGrid deserialize(const std::vector<Sequence>& seqs, const ScanOrder& order) {
  if (seqs.empty()) throw Error(ErrorCode::LengthMismatch, "need at least one channel");
  for (const auto& s : seqs) {
    if (s.size() != order.size()) {
      throw Error(ErrorCode::LengthMismatch, "sequence length " + std::to_string(s.size()) +
                                                 " != order length " +
                                                 std::to_string(order.size()));
    }
  }
  PatchGrid grid(order.shape(), seqs.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto cell = order[i];
    for (std::size_t ch = 0; ch < seqs.size(); ++ch) grid.at(cell, ch) = seqs[ch][i];
  }
  return grid;
}

enum class MergeRule { sum, mean };

enum class ParamMode {
  // Seeded input-dependent projections for Delta_t, B_t and C_t.
  seeded,
  // N = 1, a = -inf, Delta = B = C = 1: each scan returns its input.
  identity,
};

inline MergeRule parse_merge_rule(std::string_view name) {
  if (name == "sum") return MergeRule::sum;
  if (name == "mean") return MergeRule::mean;
  throw Error(ErrorCode::ParseError, "unknown merge rule '" + std::string(name) + "'");
}

struct BlockConfig {
  CurveKind curve_kind = CurveKind::hilbert;
  std::size_t state_size = 4;
  MergeRule merge = MergeRule::sum;
  int shift = 0;
  std::uint64_t param_seed = 0;
  ParamMode mode = ParamMode::seeded;
  // Use the same parameters for all four directions.
  bool share_directions = false;
};

// Seeded projection weights for one (direction, channel) scan.
struct SelectiveProjection {
  std::vector<double> a_diag;
  double delta_weight = 0.0;
  double delta_bias = 0.0;
  std::vector<double> b_weight, b_bias;
  std::vector<double> c_weight, c_bias;
};

inline SelectiveProjection make_projection(const BlockConfig& config, int direction,
                                           std::size_t channel) {
  const std::uint64_t stream =
      (config.share_directions ? 0u : static_cast<std::uint64_t>(direction)) * 0x10000u + channel;
  SeededStream rng(mix_seed(config.param_seed, stream));
  const std::size_t n = config.state_size;
  SelectiveProjection p;
  p.a_diag.resize(n);
  for (auto& a : p.a_diag) a = -std::exp(rng.uniform(std::log(0.5), std::log(4.0)));
  p.delta_weight = rng.uniform(-0.5, 0.5);
  // softplus(bias) lands in [0.05, 0.5].
  p.delta_bias = std::log(std::expm1(rng.uniform(0.05, 0.5)));
  auto fill = [&](std::vector<double>& v) {
    v.resize(n);
    for (auto& w : v) w = rng.uniform(-1.0, 1.0);
  };
  fill(p.b_weight);
  fill(p.b_bias);
  fill(p.c_weight);
  fill(p.c_bias);
  return p;
}

inline double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

// Operations charged per step for the projections: Delta (fma + softplus),
// then one fma per B and C entry.
inline constexpr std::uint64_t kProjectionOpsPerStep = 2;
inline constexpr std::uint64_t kProjectionOpsPerState = 2;

inline SelectiveInputs project_inputs(const SelectiveProjection& p, std::span<const double> x,
                                      OpCounter* counter = nullptr) {
  const std::size_t n = p.a_diag.size();
  SelectiveInputs in{std::vector<double>(x.size()), Matrix(x.size(), n), Matrix(x.size(), n)};
  for (std::size_t t = 0; t < x.size(); ++t) {
    in.delta[t] = softplus(p.delta_weight * x[t] + p.delta_bias);
    for (std::size_t i = 0; i < n; ++i) {
      in.b(t, i) = p.b_weight[i] * x[t] + p.b_bias[i];
      in.c(t, i) = p.c_weight[i] * x[t] + p.c_bias[i];
    }
    if (counter) counter->ops += kProjectionOpsPerStep + kProjectionOpsPerState * n;
  }
  return in;
}

// The four scan orders of the block. Hilbert directions come straight from
// the generator; linear kinds use {base, transpose, rot180 of transpose,
// rot180 of base}. The shift is applied to each member.
inline std::array<ScanOrder, 4> direction_family(CurveKind kind, GridShape shape, int shift) {
  auto shifted = [&](ScanOrder o) { return shift == 0 ? o : shift_order(o, shift); };
  if (kind == CurveKind::hilbert) {
    auto at = [&](int d) { return make_order({kind, shape, d, shift}); };
    return {at(1), at(2), at(3), at(4)};
  }
  auto base = make_order({kind, shape, 1, 0});
  auto cross = transpose(make_order({kind, shape.transposed(), 1, 0}));
  auto cross_rot = rot180(cross);
  auto base_rot = rot180(base);
  return {shifted(base), shifted(cross), shifted(cross_rot), shifted(base_rot)};
}

namespace detail {

inline Sequence run_direction(const BlockConfig& config, int direction, std::size_t channel,
                              std::span<const double> x, OpCounter* counter) {
  if (config.mode == ParamMode::identity) {
    const std::vector<double> a_diag{-std::numeric_limits<double>::infinity()};
    SelectiveInputs in{std::vector<double>(x.size(), 1.0), Matrix(x.size(), 1, 1.0),
                       Matrix(x.size(), 1, 1.0)};
    return scan_selective(a_diag, in, x, {}, counter);
  }
  const auto proj = make_projection(config, direction, channel);
  const auto in = project_inputs(proj, x, counter);
  return scan_selective(proj.a_diag, in, x, {}, counter);
}

}  // namespace detail

// Operations charged per cell and channel by the merge: three additions,
// plus the scaling for the mean.
inline std::uint64_t merge_ops(MergeRule rule) { return rule == MergeRule::mean ? 4 : 3; }

inline PatchGrid block_forward(const PatchGrid& grid, const BlockConfig& config,
                               OpCounter* counter = nullptr) {
  if (config.state_size < 1) throw Error(ErrorCode::InvalidSpec, "state size must be >= 1");
  const auto family = direction_family(config.curve_kind, grid.shape(), config.shift);
  std::array<std::vector<double>, 4> outputs;
  for (int d = 0; d < 4; ++d) {
    const auto& order = family[static_cast<std::size_t>(d)];
    const auto seqs = serialize(grid, order);
    std::vector<Sequence> ys;
    ys.reserve(seqs.size());
    for (std::size_t ch = 0; ch < seqs.size(); ++ch) {
      ys.push_back(detail::run_direction(config, d + 1, ch, seqs[ch], counter));
    }
    const auto back = deserialize(ys, order);
    outputs[static_cast<std::size_t>(d)].assign(back.data().begin(), back.data().end());
  }
  // Pairwise in fixed direction order so the reduction is reproducible.
  std::vector<double> merged(grid.data().size());
  for (std::size_t k = 0; k < merged.size(); ++k) {
    double v = (outputs[0][k] + outputs[1][k]) + (outputs[2][k] + outputs[3][k]);
    if (config.merge == MergeRule::mean) v *= 0.25;
    merged[k] = v;
  }
  if (counter) counter->ops += merge_ops(config.merge) * merged.size();
  return PatchGrid(grid.shape(), grid.channels(), std::move(merged));
}

// Exact operation count of block_forward, from the shapes alone.
inline std::uint64_t block_opcount(GridShape shape, const BlockConfig& config,
                                   std::size_t channels = 1) {
  const std::uint64_t cells = shape.cells();
  const std::uint64_t n = config.mode == ParamMode::identity ? 1 : config.state_size;
  std::uint64_t per_step = kSelectiveOpsPerState * n;
  if (config.mode == ParamMode::seeded) {
    per_step += kProjectionOpsPerStep + kProjectionOpsPerState * n;
  }
  return 4 * channels * cells * per_step + merge_ops(config.merge) * channels * cells;
}

inline nlohmann::ordered_json grid_to_json(const PatchGrid& grid) {
  nlohmann::ordered_json j;
  j["rows"] = grid.shape().rows;
  j["cols"] = grid.shape().cols;
  j["channels"] = grid.channels();
  j["data"] = std::vector<double>(grid.data().begin(), grid.data().end());
  return j;
}

inline PatchGrid grid_from_json(const nlohmann::json& j) {
  try {
    return PatchGrid({j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>()},
                     j.at("channels").get<std::size_t>(),
                     j.at("data").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace fractal
