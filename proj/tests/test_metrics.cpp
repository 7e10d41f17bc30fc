#include <gtest/gtest.h>

#include <cmath>

#include "fcd/emd.hpp"
#include "fcd/io.hpp"
#include "fcd/metrics.hpp"
#include "fcd/report.hpp"
#include "oracles.hpp"

using namespace fcd;

namespace {

const PointCloud<2> kP{{0.5, 0}, {1, 0}};
const PointCloud<2> kG{{0, 0}, {4, 0}};

/// Points on a jittered grid: duplicate-free and with distinct distances.
PointCloud<3> distinct_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<Point<3>> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({double(i % 5) + u(rng), double((i / 5) % 5) + u(rng), double(i / 25) + u(rng)});
  return PointCloud<3>(pts);
}

}  // namespace

TEST(Chamfer, TwoPointFixture) {
  EXPECT_DOUBLE_EQ(cd_local(kP, kG, DistanceOrder::First), 0.75);
  EXPECT_DOUBLE_EQ(cd_local(kP, kG, DistanceOrder::Second), 0.625);
  EXPECT_DOUBLE_EQ(cd_global(kP, kG, DistanceOrder::First), 1.75);
  EXPECT_DOUBLE_EQ(cd_global(kP, kG, DistanceOrder::Second), 4.625);
  EXPECT_DOUBLE_EQ(chamfer_l1(kP, kG), 1.25);
  EXPECT_DOUBLE_EQ(chamfer_l2(kP, kG), 5.25);
}

TEST(Chamfer, SinglePointPairs) {
  const PointCloud<3> P{{0, 0, 0}}, G{{1, 0, 0}};
  EXPECT_EQ(chamfer_l1(P, G), 1.0);
  EXPECT_EQ(chamfer_l2(P, G), 2.0);
  EXPECT_EQ(chamfer_l1(P, P), 0.0);
  EXPECT_EQ(chamfer_l2(G, G), 0.0);
}

TEST(Chamfer, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto P = oracle::random_cloud<3>(rng, 100), G = oracle::random_cloud<3>(rng, 100);
    EXPECT_NEAR(chamfer_l1(P, G), 0.5 * (oracle::directional(P, G, 1) + oracle::directional(G, P, 1)), 1e-12);
    EXPECT_NEAR(chamfer_l2(P, G), oracle::directional(P, G, 2) + oracle::directional(G, P, 2), 1e-12);
    EXPECT_NEAR(chamfer_l1(P, G), chamfer_l1(G, P), 1e-12);
    EXPECT_NEAR(chamfer_l2(P, G), chamfer_l2(G, P), 1e-12);
    EXPECT_EQ(cd_global(P, G, DistanceOrder::First), cd_local(G, P, DistanceOrder::First));
  }
}

TEST(Chamfer, Errors) {
  EXPECT_THROW(chamfer_l1(PointCloud<2>{}, kG), InvalidInput);
  EXPECT_THROW(chamfer_l2(kP, PointCloud<2>{}), InvalidInput);
  EXPECT_THROW(parse_distance_order("3"), InvalidInput);
}

TEST(Dcd, ClosedForms) {
  EXPECT_NEAR(dcd(PointCloud<3>{{0, 0, 0}}, PointCloud<3>{{0.001, 0, 0}}, 1000.0), 1.0 - std::exp(-1.0), 1e-12);
  std::mt19937_64 rng(29);
  const auto P = distinct_cloud(rng, 30);
  EXPECT_EQ(dcd(P, P), 0.0);
  EXPECT_THROW(dcd(P, P, 0.0), InvalidInput);
  EXPECT_THROW(dcd(P, P, -1.0), InvalidInput);
}

TEST(Dcd, RangeAndIdentityOnRandomClouds) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> n(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    const auto P = oracle::random_cloud<3>(rng, n(rng)), G = oracle::random_cloud<3>(rng, n(rng));
    for (double T : {1.0, 100.0, 1000.0}) {
      const double v = dcd(P, G, T);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(dcd(P, P), 0.0);
  }
}

TEST(Emd, SmallExamples) {
  const PointCloud<3> P{{0, 0, 0}, {1, 0, 0}}, G{{0, 0, 0}, {2, 0, 0}};
  EXPECT_DOUBLE_EQ(emd_exact(P, G), 0.5);
  EXPECT_DOUBLE_EQ(emd_exact(P, G, EmdReduction::Sum), 1.0);
  EXPECT_EQ(emd_exact(P, P), 0.0);
  EXPECT_THROW(emd_exact(P, PointCloud<3>{{0, 0, 0}}), InvalidInput);
}

TEST(Emd, ExactMatchesPermutationOracle) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const auto P = oracle::random_cloud<3>(rng, 6), G = oracle::random_cloud<3>(rng, 6);
    EXPECT_NEAR(emd_exact(P, G), oracle::emd_permutations(P, G), 1e-12);
  }
}

TEST(Emd, ExactCapPointsToApproximation) {
  std::mt19937_64 rng(41);
  const auto P = oracle::random_cloud<2>(rng, kExactEmdMaxPoints + 1);
  try {
    emd_exact(P, P);
    FAIL() << "expected cap error";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("emd_approx"), std::string::npos);
  }
}

TEST(Emd, ApproximationBoundsAndMonotonicity) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto P = oracle::random_cloud<3>(rng, 6), G = oracle::random_cloud<3>(rng, 6);
    const double exact = emd_exact(P, G);
    const double approx = emd_approx(P, G);
    EXPECT_GE(approx, exact - 1e-12);
    EXPECT_LE(approx, exact * 1.05);
    double prev = INFINITY;
    for (std::size_t bids : {6u, 20u, 100u, 1000u, 100000u}) {
      const double v = emd_approx(P, G, bids, 1e-4);
      EXPECT_LE(v, prev + 1e-15);
      prev = v;
    }
  }
  const auto Q = oracle::random_cloud<3>(rng, 40);
  EXPECT_LE(emd_approx(Q, Q), 1e-6);
  EXPECT_THROW(emd_approx(Q, Q, 100, 0.0), InvalidInput);
}

TEST(Emd, ApproximationScales) {
  std::mt19937_64 rng(47);
  const auto P = oracle::random_cloud<3>(rng, 512), G = oracle::random_cloud<3>(rng, 512);
  const double v = emd_approx(P, G);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GE(v, emd_exact(P, G) - 1e-12);
  EXPECT_LE(v, emd_exact(P, G) * 1.05);
}

TEST(Fscore, Examples) {
  const PointCloud<3> P{{0, 0, 0}, {1, 0, 0}}, G{{0, 0, 0}, {5, 0, 0}};
  EXPECT_DOUBLE_EQ(fscore(P, G, 0.1), 0.5);
  const auto pr = precision_recall(P, G, 0.1);
  EXPECT_DOUBLE_EQ(pr.precision, 0.5);
  EXPECT_DOUBLE_EQ(pr.recall, 0.5);
  EXPECT_EQ(fscore(PointCloud<3>{{0, 0, 0}}, PointCloud<3>{{1, 0, 0}}, 0.01), 0.0);
  EXPECT_EQ(fscore(P, P, 1e-9), 1.0);
  EXPECT_THROW(fscore(P, G, 0.0), InvalidInput);
}

TEST(Fscore, BoundedAndMonotoneInThreshold) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto P = oracle::random_cloud<3>(rng, 50), G = oracle::random_cloud<3>(rng, 40);
    double prev = 0.0;
    for (double t = 0.01; t < 1.0; t *= 1.3) {
      const double f = fscore(P, G, t);
      EXPECT_GE(f, prev);
      EXPECT_LE(f, 1.0);
      prev = f;
    }
  }
}

TEST(Hausdorff, ExamplesAndBound) {
  EXPECT_EQ(hausdorff(PointCloud<3>{{0, 0, 0}}, PointCloud<3>{{3, 0, 0}}), 3.0);
  EXPECT_EQ(hausdorff(PointCloud<3>{{0, 0, 0}, {1, 0, 0}}, PointCloud<3>{{0, 0, 0}, {4, 0, 0}}), 3.0);
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    const auto P = oracle::random_cloud<3>(rng, 30), G = oracle::random_cloud<3>(rng, 30);
    const double h = hausdorff(P, G);
    EXPECT_GE(h, cd_local(P, G, DistanceOrder::First));
    EXPECT_GE(h, cd_global(P, G, DistanceOrder::First));
    EXPECT_EQ(hausdorff(P, P), 0.0);
  }
}

TEST(PointToMesh, FixtureSquare) {
  const auto mesh = read_mesh(std::filesystem::path(FCD_FIXTURE_DIR) / "square.ply");
  const auto P = read_cloud_as<3>(std::filesystem::path(FCD_FIXTURE_DIR) / "above_square.xyz");
  EXPECT_DOUBLE_EQ(point_to_mesh(P, mesh), (0.5 + 0.0 + 1.0) / 3.0);
  EXPECT_EQ(point_to_mesh(PointCloud<3>{{1, 1, 0}}, mesh), 0.0);
  EXPECT_THROW(point_to_mesh(P, TriangleMesh{}), InvalidInput);
}

TEST(Fidelity, Definition) {
  EXPECT_EQ(fidelity(PointCloud<3>{{0, 0, 0}}, PointCloud<3>{{2, 0, 0}}), 2.0);
  std::mt19937_64 rng(61);
  const auto in = oracle::random_cloud<3>(rng, 20), out = oracle::random_cloud<3>(rng, 50);
  EXPECT_EQ(fidelity(in, out), cd_local(in, out, DistanceOrder::First));
  std::vector<Point<3>> sup(in.begin(), in.end());
  sup.insert(sup.end(), out.begin(), out.end());
  EXPECT_EQ(fidelity(in, PointCloud<3>(sup)), 0.0);
}

TEST(MetricReport, FlatJsonAndCsv) {
  MetricReport r;
  r.cd_l1 = 1.25;
  r.dcd = 0.5;
  EXPECT_EQ(r.to_json().dump(),
            R"({"cd_l1":1.25,"cd_l2":null,"dcd":0.5,"emd":null,"fscore":null,"hausdorff":null,"p2f":null,"fidelity":null})");
  EXPECT_EQ(MetricReport::csv_header(), "cd_l1,cd_l2,dcd,emd,fscore,hausdorff,p2f,fidelity");
  EXPECT_EQ(r.csv_row(), "1.25,,0.5,,,,,");
}
