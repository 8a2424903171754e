#pragma once

// Self-checks run by `fractal verify`. Each suite re-derives the library's
// structural properties (bijection, continuity, symmetry, discretization
// limits, gradient agreement, ...) and reports one line per check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fractal/block.hpp"
#include "fractal/curves.hpp"
#include "fractal/export.hpp"
#include "fractal/metrics.hpp"
#include "fractal/random.hpp"
#include "fractal/ssm.hpp"

namespace fractal::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

// Relative error with a floor on the denominator so that coordinates whose
// gradient is zero are compared absolutely.
inline double relative_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

namespace detail {

inline void record(SuiteResult& out, std::string name, const std::function<std::string()>& body) {
  Check check{std::move(name), true, {}};
  try {
    check.detail = body();
  } catch (const std::exception& e) {
    check.passed = false;
    check.detail = e.what();
  }
  if (check.detail.rfind("FAIL", 0) == 0) check.passed = false;
  out.checks.push_back(std::move(check));
}

inline std::string fail(const std::string& what) { return "FAIL: " + what; }

}  // namespace detail

inline SuiteResult run_curves() {
  SuiteResult out{"curves", {}};
  detail::record(out, "bijection", [] {
    std::size_t orders = 0;
    for (int depth = 1; depth <= 6; ++depth)
      for (int dir = 1; dir <= 4; ++dir)
        for (int shift : {-1, 0, 1}) {
          const std::size_t side = std::size_t{1} << depth;
          if (static_cast<std::size_t>(std::abs(shift)) >= side) continue;
          // The ScanOrder constructor rejects anything but a permutation.
          (void)make_order({CurveKind::hilbert, {side, side}, dir, shift});
          ++orders;
        }
    return std::to_string(orders) + " orders are permutations";
  });
  detail::record(out, "continuity", [] {
    for (int depth = 1; depth <= 6; ++depth)
      for (int dir = 1; dir <= 4; ++dir)
        if (continuity_fraction(generate_hilbert(depth, dir)) != 1.0)
          return detail::fail("depth " + std::to_string(depth) + " direction " +
                              std::to_string(dir));
    return std::string("every unshifted step is a unit move");
  });
  detail::record(out, "endpoints", [] {
    for (int depth = 1; depth <= 6; ++depth) {
      const std::int64_t m = (std::int64_t{1} << depth) - 1;
      const std::array<std::pair<CellCoord, CellCoord>, 4> expected{
          {{{0, 0}, {m, 0}}, {{0, 0}, {0, m}}, {{m, m}, {m, 0}}, {{m, m}, {0, m}}}};
      for (int dir = 1; dir <= 4; ++dir) {
        const auto o = generate_hilbert(depth, dir);
        const auto& [first, last] = expected[static_cast<std::size_t>(dir - 1)];
        if (o[0] != first || o[o.size() - 1] != last)
          return detail::fail("depth " + std::to_string(depth) + " direction " +
                              std::to_string(dir));
      }
    }
    return std::string("corner pattern holds for depths 1-6");
  });
  detail::record(out, "direction_symmetry", [] {
    for (int depth = 0; depth <= 6; ++depth) {
      const auto h1 = generate_hilbert(depth, 1);
      if (generate_hilbert(depth, 2) != transpose(h1)) return detail::fail("transpose");
      if (generate_hilbert(depth, 4) != rot180(h1)) return detail::fail("rot180 of 1");
      if (generate_hilbert(depth, 3) != rot180(transpose(h1))) return detail::fail("rot180 of 2");
    }
    return std::string("family closed under transpose and rot180");
  });
  detail::record(out, "self_similarity", [] {
    for (int depth = 2; depth <= 6; ++depth)
      for (int dir = 1; dir <= 4; ++dir)
        if (self_similarity_reduce(generate_hilbert(depth, dir)) != generate_hilbert(depth - 1, dir))
          return detail::fail("depth " + std::to_string(depth));
    return std::string("2x2 reduction reproduces the coarser curve");
  });
  detail::record(out, "shift_seam", [] {
    for (int depth = 1; depth <= 6; ++depth)
      for (int dir = 1; dir <= 4; ++dir)
        for (int shift : {-1, 1}) {
          const auto base = generate_hilbert(depth, dir);
          const auto moved = shift_order(base, shift);
          std::size_t changed = 0;
          for (std::size_t i = 0; i + 1 < base.size(); ++i) {
            const auto d0 = std::pair{base[i + 1].row - base[i].row, base[i + 1].col - base[i].col};
            const auto d1 =
                std::pair{moved[i + 1].row - moved[i].row, moved[i + 1].col - moved[i].col};
            if (d0 != d1) ++changed;
          }
          if (changed > base.shape().cols) return detail::fail("too many seam changes");
        }
    return std::string("shift alters at most `cols` steps");
  });
  detail::record(out, "adapt_order_stable", [] {
    for (const GridShape shape : {GridShape{3, 3}, GridShape{14, 14}, GridShape{5, 7}}) {
      const auto o = make_order({CurveKind::hilbert, shape, 1, 0});
      const int depth = static_cast<int>(std::ceil(std::log2(std::max(shape.rows, shape.cols))));
      const auto full = generate_hilbert(depth, 1);
      for (std::size_t i = 0; i + 1 < o.size(); ++i)
        if (full.index_of(o[i]) >= full.index_of(o[i + 1])) return detail::fail("order changed");
    }
    return std::string("relative order preserved");
  });
  return out;
}

// Central finite differences of sum_t upstream_t y_t against grad_selective
// on a random N = 4, L = 16 instance. Returns the worst relative error.
inline double gradient_check(std::uint64_t seed, double step = 1e-5) {
  constexpr std::size_t n = 4, len = 16;
  SeededStream rng(seed);
  std::vector<double> a(n);
  for (auto& v : a) v = rng.uniform(-1.5, -0.1);
  SelectiveInputs in{std::vector<double>(len), Matrix(len, n), Matrix(len, n)};
  for (auto& v : in.delta) v = rng.uniform(0.05, 0.8);
  for (auto& v : in.b.data()) v = rng.uniform(-1.0, 1.0);
  for (auto& v : in.c.data()) v = rng.uniform(-1.0, 1.0);
  Sequence x(len), up(len);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto& v : up) v = rng.uniform(-1.0, 1.0);

  const auto loss = [&] {
    const auto y = scan_selective(a, in, x);
    double s = 0.0;
    for (std::size_t t = 0; t < len; ++t) s += up[t] * y[t];
    return s;
  };
  const auto g = grad_selective(a, in, x, {}, up);
  double worst = 0.0;
  const auto probe = [&](double& slot, double analytic) {
    const double saved = slot;
    slot = saved + step;
    const double plus = loss();
    slot = saved - step;
    const double minus = loss();
    slot = saved;
    worst = std::max(worst, relative_error(analytic, (plus - minus) / (2.0 * step)));
  };
  for (std::size_t i = 0; i < n; ++i) probe(a[i], g.a_diag[i]);
  for (std::size_t t = 0; t < len; ++t) probe(in.delta[t], g.delta[t]);
  for (std::size_t k = 0; k < len * n; ++k) probe(in.b.data()[k], g.b.data()[k]);
  for (std::size_t k = 0; k < len * n; ++k) probe(in.c.data()[k], g.c.data()[k]);
  for (std::size_t t = 0; t < len; ++t) probe(x[t], g.x[t]);
  return worst;
}

// Least-squares fit y = alpha * x + beta; returns the worst |residual| / y.
inline double affine_fit_residual(std::span<const double> xs, std::span<const double> ys) {
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double alpha = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double beta = (sy - alpha * sx) / m;
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    worst = std::max(worst, std::fabs(alpha * xs[i] + beta - ys[i]) / std::fabs(ys[i]));
  return worst;
}

inline SuiteResult run_ssm(std::uint64_t seed) {
  SuiteResult out{"ssm", {}};
  detail::record(out, "zoh_fixtures", [] {
    const auto zero = discretize_zoh({{0.0}, {2.0}, {1.0}, 0.3});
    if (zero.a_bar[0] != 1.0 || zero.b_bar[0] != 0.6) return detail::fail("a = 0 limit");
    const auto half = discretize_zoh({{-1.0}, {1.0}, {1.0}, std::log(2.0)});
    if (std::fabs(half.a_bar[0] - 0.5) > 1e-12 || std::fabs(half.b_bar[0] - 0.5) > 1e-12)
      return detail::fail("a = -1, delta = ln 2");
    return std::string("closed-form values reproduced");
  });
  detail::record(out, "zoh_branch_continuity", [] {
    double worst = 0.0;
    for (double z : {kZohSeriesThreshold, -kZohSeriesThreshold}) {
      const double below = std::nextafter(z, 0.0);
      worst = std::max(worst, std::fabs(zoh_gain(below) - std::expm1(z) / z));
    }
    if (worst > 1e-12) return detail::fail(format_number(worst));
    return "max branch gap " + format_number(worst);
  });
  detail::record(out, "recurrence_equals_kernel", [seed] {
    SeededStream rng(mix_seed(seed, 1));
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + rng.below(8), len = 1 + rng.below(128);
      SsmParams p{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                  rng.uniform(0.01, 1.0)};
      for (std::size_t i = 0; i < n; ++i) {
        p.a_diag[i] = rng.uniform(-2.0, -0.1);
        p.b[i] = rng.uniform(-1.0, 1.0);
        p.c[i] = rng.uniform(-1.0, 1.0);
      }
      Sequence x(len);
      for (auto& v : x) v = rng.uniform(-1.0, 1.0);
      const auto disc = discretize_zoh(p);
      const auto y1 = scan_lti(disc, x);
      const auto y2 = conv_apply(build_kernel(disc, len), x);
      for (std::size_t t = 0; t < len; ++t) worst = std::max(worst, std::fabs(y1[t] - y2[t]));
    }
    if (worst > 1e-10) return detail::fail(format_number(worst));
    return "max deviation " + format_number(worst);
  });
  detail::record(out, "gradient_check", [seed] {
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) worst = std::max(worst, gradient_check(mix_seed(seed, 100 + k)));
    if (worst > 1e-4) return detail::fail("max relative error " + format_number(worst));
    return "max relative error " + format_number(worst);
  });
  detail::record(out, "linear_complexity", [] {
    std::vector<double> ls, ops;
    for (std::size_t len : {64u, 256u, 1024u, 4096u}) {
      SelectiveInputs in{std::vector<double>(len, 0.1), Matrix(len, 4, 0.5), Matrix(len, 4, 0.5)};
      OpCounter counter;
      (void)scan_selective(std::vector<double>(4, -1.0), in, Sequence(len, 1.0), {}, &counter);
      ls.push_back(static_cast<double>(len));
      ops.push_back(static_cast<double>(counter.ops));
    }
    const double r = affine_fit_residual(ls, ops);
    if (r >= 0.01) return detail::fail(format_number(r));
    return "affine residual " + format_number(r);
  });
  return out;
}

inline SuiteResult run_block(std::uint64_t seed) {
  SuiteResult out{"block", {}};
  detail::record(out, "identity", [seed] {
    const auto grid = random_grid({8, 8}, 4, mix_seed(seed, 7));
    BlockConfig config;
    config.mode = ParamMode::identity;
    config.merge = MergeRule::mean;
    const auto y = block_forward(grid, config);
    double worst = 0.0;
    for (std::size_t k = 0; k < y.data().size(); ++k)
      worst = std::max(worst, std::fabs(y.data()[k] - grid.data()[k]));
    if (worst > 1e-12) return detail::fail(format_number(worst));
    return "max deviation " + format_number(worst);
  });
  detail::record(out, "equivariance", [seed] {
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      const auto grid = random_grid({8, 8}, 4, mix_seed(seed, 200 + trial));
      for (auto merge : {MergeRule::sum, MergeRule::mean}) {
        BlockConfig config;
        config.share_directions = true;
        config.merge = merge;
        config.param_seed = mix_seed(seed, 300 + trial);
        const auto y = block_forward(grid, config);
        const auto yt = block_forward(transpose(grid), config);
        const auto yr = block_forward(rot180(grid), config);
        const auto ty = transpose(y);
        const auto ry = rot180(y);
        for (std::size_t k = 0; k < y.data().size(); ++k) {
          worst = std::max(worst, std::fabs(yt.data()[k] - ty.data()[k]));
          worst = std::max(worst, std::fabs(yr.data()[k] - ry.data()[k]));
        }
      }
    }
    if (worst > 1e-10) return detail::fail(format_number(worst));
    return "max deviation " + format_number(worst);
  });
  detail::record(out, "determinism", [seed] {
    const auto grid = random_grid({8, 8}, 2, seed);
    BlockConfig config;
    config.param_seed = seed;
    if (block_forward(grid, config) != block_forward(grid, config)) return detail::fail("differs");
    return std::string("bitwise identical reruns");
  });
  detail::record(out, "round_trip", [seed] {
    const auto grid = random_grid({14, 14}, 3, seed);
    for (const auto& o : direction_family(CurveKind::hilbert, grid.shape(), 1))
      if (deserialize(serialize(grid, o), o) != grid) return detail::fail("round trip");
    return std::string("serialize/deserialize exact");
  });
  detail::record(out, "opcount", [seed] {
    BlockConfig config;
    config.param_seed = seed;
    std::vector<double> ls, ops;
    for (std::size_t side : {8u, 16u, 32u, 64u}) {
      const GridShape shape{side, side};
      const auto predicted = block_opcount(shape, config, 1);
      OpCounter counter;
      (void)block_forward(random_grid(shape, 1, seed), config, &counter);
      if (counter.ops != predicted) return detail::fail("static count disagrees with execution");
      ls.push_back(static_cast<double>(shape.cells()));
      ops.push_back(static_cast<double>(predicted));
    }
    const double r = affine_fit_residual(ls, ops);
    if (r >= 0.01) return detail::fail(format_number(r));
    return "affine residual " + format_number(r);
  });
  return out;
}

inline nlohmann::ordered_json to_json(const std::vector<SuiteResult>& results, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  bool all = true;
  auto suites = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json s;
    s["suite"] = r.suite;
    s["passed"] = r.passed();
    auto checks = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    s["checks"] = std::move(checks);
    suites.push_back(std::move(s));
    all = all && r.passed();
  }
  j["passed"] = all;
  j["suites"] = std::move(suites);
  return j;
}

}  // namespace fractal::verify
