#pragma once

// Locality measures for scan orders. Everything here is a pure function of
// the order; the sampled branch of locality_measure uses a fixed seed.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fractal/curves.hpp"
#include "fractal/error.hpp"
#include "fractal/export.hpp"
#include "fractal/random.hpp"

namespace fractal {

// Orders up to this size get the exact O(L^2) locality ratio.
inline constexpr std::size_t kExactLocalityLimit = 4096;
inline constexpr std::size_t kLocalitySamples = std::size_t{1} << 22;
inline constexpr std::uint64_t kLocalitySeed = 0x5eed'10ca'1175ULL;

struct AdjacencyGaps {
  std::int64_t max_gap = 0;
  double mean_gap = 0.0;
  std::size_t pairs = 0;
};

struct LocalityReport {
  CurveSpec spec;
  double continuity_fraction = 0.0;
  std::int64_t max_adj_gap = 0;
  double mean_adj_gap = 0.0;
  double gl_measure = 0.0;
};

namespace detail {

inline void require_two_cells(const ScanOrder& order, const char* what) {
  if (order.size() < 2) {
    throw Error(ErrorCode::ShapeNotSupported, std::string(what) + " needs at least two cells");
  }
}

}  // namespace detail

inline double continuity_fraction(const ScanOrder& order) {
  detail::require_two_cells(order, "continuity_fraction");
  const auto fwd = order.forward();
  std::size_t adjacent = 0;
  for (std::size_t i = 0; i + 1 < fwd.size(); ++i) {
    if (manhattan(fwd[i], fwd[i + 1]) == 1) ++adjacent;
  }
  return static_cast<double>(adjacent) / static_cast<double>(fwd.size() - 1);
}

// Statistics of |index(p) - index(q)| over unordered 4-neighbour pairs.
inline AdjacencyGaps adjacent_index_gaps(const ScanOrder& order) {
  detail::require_two_cells(order, "adjacent_index_gaps");
  const auto shape = order.shape();
  const auto inv = order.inverse();
  AdjacencyGaps out;
  std::uint64_t total = 0;
  auto visit = [&](std::size_t a, std::size_t b) {
    const auto ia = static_cast<std::int64_t>(inv[a]);
    const auto ib = static_cast<std::int64_t>(inv[b]);
    const auto gap = ia > ib ? ia - ib : ib - ia;
    out.max_gap = std::max(out.max_gap, gap);
    total += static_cast<std::uint64_t>(gap);
    ++out.pairs;
  };
  for (std::size_t r = 0; r < shape.rows; ++r) {
    for (std::size_t c = 0; c < shape.cols; ++c) {
      const std::size_t here = r * shape.cols + c;
      if (c + 1 < shape.cols) visit(here, here + 1);
      if (r + 1 < shape.rows) visit(here, here + shape.cols);
    }
  }
  out.mean_gap = static_cast<double>(total) / static_cast<double>(out.pairs);
  return out;
}

// Worst-case ratio of squared Euclidean distance to index distance over
// pairs of sequence positions. Exact up to kExactLocalityLimit cells, a
// fixed-seed uniform sample of pairs above that. Single-cell orders give 0.
inline double locality_measure(const ScanOrder& order) {
  const auto fwd = order.forward();
  const std::size_t n = fwd.size();
  if (n < 2) return 0.0;
  double best = 0.0;
  if (n <= kExactLocalityLimit) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double ratio = static_cast<double>(squared_distance(fwd[i], fwd[j])) /
                             static_cast<double>(j - i);
        best = std::max(best, ratio);
      }
    }
    return best;
  }
  SeededStream rng(kLocalitySeed);
  for (std::size_t s = 0; s < kLocalitySamples; ++s) {
    auto i = static_cast<std::size_t>(rng.below(n));
    auto j = static_cast<std::size_t>(rng.below(n));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    best = std::max(best, static_cast<double>(squared_distance(fwd[i], fwd[j])) /
                              static_cast<double>(j - i));
  }
  return best;
}

inline LocalityReport locality_report(const ScanOrder& order) {
  const auto gaps = adjacent_index_gaps(order);
  return {order.spec(), continuity_fraction(order), gaps.max_gap, gaps.mean_gap,
          locality_measure(order)};
}

// One report per spec, in input order. All specs must describe one grid.
inline std::vector<LocalityReport> compare_orders(std::span<const CurveSpec> specs) {
  std::vector<LocalityReport> table;
  table.reserve(specs.size());
  for (const auto& spec : specs) {
    if (spec.shape != specs.front().shape) {
      throw Error(ErrorCode::ShapeMismatch,
                  "all specs must share one grid shape; got " +
                      std::to_string(specs.front().shape.rows) + "x" +
                      std::to_string(specs.front().shape.cols) + " and " +
                      std::to_string(spec.shape.rows) + "x" + std::to_string(spec.shape.cols));
    }
  }
  for (const auto& spec : specs) table.push_back(locality_report(make_order(spec)));
  return table;
}

inline std::string reports_to_csv(std::span<const LocalityReport> table) {
  std::string out = "kind,direction,shift,continuity,max_adj_gap,mean_adj_gap,gl_measure\n";
  for (const auto& row : table) {
    out += std::string(to_string(row.spec.kind)) + ',' + std::to_string(row.spec.direction) +
           ',' + std::to_string(row.spec.shift) + ',' + format_number(row.continuity_fraction) +
           ',' + std::to_string(row.max_adj_gap) + ',' + format_number(row.mean_adj_gap) + ',' +
           format_number(row.gl_measure) + '\n';
  }
  return out;
}

inline nlohmann::ordered_json reports_to_json(std::span<const LocalityReport> table) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& row : table) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(row.spec.kind));
    j["rows"] = row.spec.shape.rows;
    j["cols"] = row.spec.shape.cols;
    j["direction"] = row.spec.direction;
    j["shift"] = row.spec.shift;
    j["continuityFraction"] = row.continuity_fraction;
    j["maxAdjGap"] = row.max_adj_gap;
    j["meanAdjGap"] = row.mean_adj_gap;
    j["glMeasure"] = row.gl_measure;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace fractal
