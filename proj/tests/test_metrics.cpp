#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fractal/curves.hpp"
#include "fractal/metrics.hpp"

using namespace fractal;

namespace {

// All-pairs brute force over the forward list; no use of the inverse.
AdjacencyGaps brute_gaps(const ScanOrder& o) {
  AdjacencyGaps g;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < o.size(); ++i)
    for (std::size_t j = i + 1; j < o.size(); ++j)
      if (manhattan(o[i], o[j]) == 1) {
        const auto gap = static_cast<std::int64_t>(j - i);
        g.max_gap = std::max(g.max_gap, gap);
        total += gap;
        ++g.pairs;
      }
  g.mean_gap = static_cast<double>(total) / static_cast<double>(g.pairs);
  return g;
}

double brute_locality(const ScanOrder& o) {
  double best = 0;
  for (std::size_t i = 0; i < o.size(); ++i)
    for (std::size_t j = i + 1; j < o.size(); ++j) {
      const double dr = static_cast<double>(o[i].row - o[j].row);
      const double dc = static_cast<double>(o[i].col - o[j].col);
      best = std::max(best, (dr * dr + dc * dc) / static_cast<double>(j - i));
    }
  return best;
}

ScanOrder raster(std::size_t n) { return generate_linear(CurveKind::raster, {n, n}); }
ScanOrder morton(std::size_t n) { return generate_linear(CurveKind::morton, {n, n}); }

}  // namespace

TEST(ContinuityFraction, Examples) {
  EXPECT_EQ(continuity_fraction(generate_hilbert(3, 1)), 1.0);
  EXPECT_DOUBLE_EQ(continuity_fraction(raster(8)), 56.0 / 63.0);
  EXPECT_EQ(continuity_fraction(generate_linear(CurveKind::boustrophedon, {8, 8})), 1.0);
}

TEST(ContinuityFraction, HilbertAlwaysOne) {
  for (int depth = 1; depth <= 6; ++depth)
    for (int dir = 1; dir <= 4; ++dir)
      EXPECT_EQ(continuity_fraction(generate_hilbert(depth, dir)), 1.0);
}

TEST(ContinuityFraction, NeedsTwoCells) {
  EXPECT_THROW((void)continuity_fraction(generate_hilbert(0, 1)), Error);
}

TEST(AdjacentIndexGaps, RasterEightByEight) {
  const auto g = adjacent_index_gaps(raster(8));
  EXPECT_EQ(g.max_gap, 8);
  EXPECT_EQ(g.pairs, 112u);
  EXPECT_DOUBLE_EQ(g.mean_gap, 4.5);
}

TEST(AdjacentIndexGaps, HilbertDepthThreeFixture) {
  // Enumerated over all 112 neighbour pairs.
  const auto g = adjacent_index_gaps(generate_hilbert(3, 1));
  EXPECT_EQ(g.pairs, 112u);
  EXPECT_EQ(g.max_gap, 53);
  EXPECT_DOUBLE_EQ(g.mean_gap, 568.0 / 112.0);
  EXPECT_GT(g.max_gap, 1);
}

TEST(AdjacentIndexGaps, OneByTwo) {
  const auto g = adjacent_index_gaps(generate_linear(CurveKind::raster, {1, 2}));
  EXPECT_EQ(g.max_gap, 1);
  EXPECT_EQ(g.mean_gap, 1.0);
}

TEST(AdjacentIndexGaps, MatchesBruteForce) {
  std::vector<ScanOrder> orders{raster(8), morton(16), generate_hilbert(4, 3),
                                make_order({CurveKind::hilbert, {14, 14}, 2, 1}),
                                generate_linear(CurveKind::boustrophedon, {5, 9})};
  for (const auto& o : orders) {
    const auto fast = adjacent_index_gaps(o);
    const auto slow = brute_gaps(o);
    EXPECT_EQ(fast.max_gap, slow.max_gap);
    EXPECT_EQ(fast.pairs, slow.pairs);
    EXPECT_DOUBLE_EQ(fast.mean_gap, slow.mean_gap);
  }
}

TEST(AdjacentIndexGaps, InvariantAcrossHilbertDirections) {
  for (int depth = 1; depth <= 6; ++depth) {
    const auto ref = adjacent_index_gaps(generate_hilbert(depth, 1));
    for (int dir = 2; dir <= 4; ++dir) {
      const auto g = adjacent_index_gaps(generate_hilbert(depth, dir));
      EXPECT_EQ(g.max_gap, ref.max_gap);
      EXPECT_EQ(g.mean_gap, ref.mean_gap);
    }
  }
}

TEST(AdjacentIndexGaps, SquareGridFixtures) {
  // Enumerated fixtures on the comparison grids. The Hilbert maximum is
  // set by neighbours straddling the first/last quadrant seam.
  EXPECT_EQ(adjacent_index_gaps(morton(8)).max_gap, 22);
  EXPECT_EQ(adjacent_index_gaps(generate_hilbert(4, 1)).max_gap, 213);
  EXPECT_EQ(adjacent_index_gaps(raster(16)).max_gap, 16);
  EXPECT_EQ(adjacent_index_gaps(morton(16)).max_gap, 86);
}

TEST(LocalityMeasure, Examples) {
  EXPECT_EQ(locality_measure(generate_linear(CurveKind::raster, {1, 2})), 1.0);
  EXPECT_EQ(locality_measure(generate_hilbert(0, 1)), 0.0);
  const double h = locality_measure(generate_hilbert(2, 1));
  const double r = locality_measure(raster(4));
  EXPECT_EQ(h, brute_locality(generate_hilbert(2, 1)));
  EXPECT_EQ(r, brute_locality(raster(4)));
  EXPECT_DOUBLE_EQ(h, 2.5);
  EXPECT_DOUBLE_EQ(r, 10.0);
  EXPECT_LT(h, r);
}

TEST(LocalityMeasure, SampledBranchIsBoundedByExact) {
  // 128x128 = 16384 cells takes the sampling path; a sample can only
  // under-estimate the true maximum, and it is deterministic.
  const auto o = generate_hilbert(7, 1);
  const double sampled = locality_measure(o);
  EXPECT_EQ(sampled, locality_measure(o));
  EXPECT_GT(sampled, 0.0);
  EXPECT_LE(sampled, 6.0 + 1e-12);  // Hilbert worst-case ratio is below 6.
}

TEST(CompareOrders, FourSpecTable) {
  const GridShape shape{8, 8};
  const std::vector<CurveSpec> specs{{CurveKind::hilbert, shape, 1, 0},
                                     {CurveKind::raster, shape, 1, 0},
                                     {CurveKind::boustrophedon, shape, 1, 0},
                                     {CurveKind::morton, shape, 1, 0}};
  const auto table = compare_orders(specs);
  ASSERT_EQ(table.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(table[i].spec, specs[i]);
  EXPECT_EQ(table[0].continuity_fraction, 1.0);
  EXPECT_EQ(table[0].max_adj_gap, 53);
  EXPECT_EQ(table[1].max_adj_gap, 8);
  EXPECT_EQ(table[2].max_adj_gap, 15);
  EXPECT_EQ(table[3].max_adj_gap, 22);
  EXPECT_EQ(table[1].gl_measure, brute_locality(raster(8)));
  EXPECT_LT(table[0].gl_measure, table[1].gl_measure);
  EXPECT_LT(table[0].gl_measure, table[3].gl_measure);
}

TEST(CompareOrders, SingleSpecAndMismatch) {
  const std::vector<CurveSpec> one{{CurveKind::raster, {8, 8}, 1, 0}};
  EXPECT_EQ(compare_orders(one).size(), 1u);
  const std::vector<CurveSpec> mixed{{CurveKind::raster, {8, 8}, 1, 0},
                                     {CurveKind::raster, {4, 4}, 1, 0}};
  try {
    (void)compare_orders(mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(CompareOrders, Deterministic) {
  const std::vector<CurveSpec> specs{{CurveKind::hilbert, {14, 14}, 2, 1},
                                     {CurveKind::boustrophedon, {14, 14}, 1, 0}};
  EXPECT_EQ(reports_to_csv(compare_orders(specs)), reports_to_csv(compare_orders(specs)));
}

TEST(CompareOrders, CsvLayout) {
  const std::vector<CurveSpec> specs{{CurveKind::raster, {8, 8}, 1, 0}};
  const auto csv = reports_to_csv(compare_orders(specs));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "kind,direction,shift,continuity,max_adj_gap,mean_adj_gap,gl_measure");
  EXPECT_NE(csv.find("\nraster,1,0,0.8888888888888888,8,4.5,"), std::string::npos);
}
