#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace ridgekit;

namespace {

/// Median of the interior block angles of a stripe image.
double interior_theta_error(const OrientationField& f, double want) {
  std::vector<double> errs;
  for (int r = 1; r + 1 < f.rows; ++r)
    for (int c = 1; c + 1 < f.cols; ++c)
      if (f.is_valid(r, c)) errs.push_back(std::abs(axial_difference(f.theta_at(r, c), want)));
  if (errs.empty()) return 1e9;
  return *std::max_element(errs.begin(), errs.end());
}

OrientationField uniform_field(int cols, int rows, double theta) {
  OrientationField f(cols, rows, 16);
  for (std::size_t i = 0; i < f.theta.size(); ++i) {
    f.theta[i] = theta;
    f.coherence[i] = 1.0;
    f.valid[i] = 1;
  }
  return f;
}

}  // namespace

TEST(Orientation, HorizontalStripes) {
  const auto f = estimate_orientation(oracle::stripes(128, 128, 0.0, 8.0));
  EXPECT_LT(interior_theta_error(f, 0.0), 0.02);
}

TEST(Orientation, DiagonalStripes) {
  const auto f = estimate_orientation(oracle::stripes(128, 128, kPi / 4, 8.0));
  EXPECT_LT(interior_theta_error(f, kPi / 4), 0.02);
}

TEST(Orientation, ConstantBlockInvalid) {
  const auto f = estimate_orientation(GrayImage(64, 64, 50));
  EXPECT_EQ(f.valid_count(), 0u);
}

TEST(Orientation, RotationConsistency) {
  const auto base = estimate_orientation(oracle::stripes(128, 128, 0.2, 9.0));
  for (double phi : {kPi / 6, kPi / 3}) {
    const auto rot = estimate_orientation(oracle::stripes(128, 128, 0.2 + phi, 9.0));
    for (int r = 1; r + 1 < base.rows; ++r)
      for (int c = 1; c + 1 < base.cols; ++c)
        EXPECT_LT(std::abs(axial_difference(rot.theta_at(r, c), base.theta_at(r, c) + phi)), 0.03);
  }
}

TEST(Orientation, ValidImpliesPositiveCoherence) {
  std::mt19937_64 rng(1);
  GrayImage img(64, 64);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
  const auto f = estimate_orientation(img);
  for (std::size_t i = 0; i < f.valid.size(); ++i) {
    if (f.valid[i]) {
      EXPECT_GT(f.coherence[i], 0.0);
    }
    EXPECT_GE(f.theta[i], 0.0);
    EXPECT_LT(f.theta[i], kPi);
  }
}

TEST(Orientation, RidgePeriodOfStripes) {
  const auto f = estimate_orientation(oracle::stripes(128, 128, 0.5, 10.0));
  for (int r = 1; r + 1 < f.rows; ++r)
    for (int c = 1; c + 1 < f.cols; ++c) EXPECT_NEAR(f.period[f.index(r, c)], 10.0, 1.0);
}

TEST(Smooth, UniformFieldUnchanged) {
  const auto f = uniform_field(6, 5, kPi / 3);
  const auto s = smooth_orientation(f);
  EXPECT_EQ(s.theta, f.theta);
  EXPECT_EQ(s.coherence, f.coherence);
}

TEST(Smooth, NoisyBlockTakesNeighborAngle) {
  auto f = uniform_field(5, 5, kPi / 3);
  f.theta[f.index(2, 2)] = 0.1;
  f.coherence[f.index(2, 2)] = 0.05;
  const auto s = smooth_orientation(f);
  EXPECT_NEAR(s.theta_at(2, 2), kPi / 3, 1e-12);
  EXPECT_FALSE(s.low_coherence[s.index(2, 2)]);
}

TEST(Smooth, IsolatedBlockFlagged) {
  OrientationField f(3, 3, 16);
  f.valid[f.index(1, 1)] = 1;
  f.theta[f.index(1, 1)] = 1.0;
  f.coherence[f.index(1, 1)] = 0.15;
  const auto s = smooth_orientation(f);
  EXPECT_EQ(s.theta_at(1, 1), 1.0);
  EXPECT_TRUE(s.low_coherence[s.index(1, 1)]);
}

TEST(Smooth, NeverTouchesCoherentBlocks) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    OrientationField f(7, 6, 16);
    for (std::size_t i = 0; i < f.theta.size(); ++i) {
      f.theta[i] = u(rng) * kPi * 0.999;
      f.coherence[i] = u(rng);
      f.valid[i] = u(rng) < 0.8;
    }
    const auto s = smooth_orientation(f);
    for (std::size_t i = 0; i < f.theta.size(); ++i)
      if (f.coherence[i] >= 0.25 || !f.valid[i]) {
        ASSERT_EQ(s.theta[i], f.theta[i]);
      }
  }
}

TEST(Poincare, LoopCoreAndDeltaCancel) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sf = generate_field(FingerClass::left_loop, 320, 320, seed);
    double total = 0.0;
    for (int r = 0; r + 1 < sf.field.rows; ++r)
      for (int c = 0; c + 1 < sf.field.cols; ++c) total += poincare_index(sf.field, r, c).value();
    EXPECT_NEAR(total, 0.0, 0.01) << "seed " << seed;
  }
}

TEST(Poincare, WhorlCellIsPlusOne) {
  FieldModel m;
  m.cls = FingerClass::whorl;
  m.width = 320;
  m.height = 320;
  m.singular = {{SingularKind::core, 160, 160}, {SingularKind::core, 160, 160}};
  m.phi0 = kPi / 2;
  const auto f = sample_field(m, 16);
  EXPECT_NEAR(poincare_index(f, 9, 9).value(), 1.0, 1e-9);
}

TEST(Core, WhorlAtCenter) {
  FieldModel m;
  m.cls = FingerClass::whorl;
  m.width = 320;
  m.height = 320;
  m.singular = {{SingularKind::core, 160, 160}, {SingularKind::core, 160, 160}};
  m.phi0 = kPi / 2;
  const auto core = find_core(sample_field(m, 16));
  EXPECT_EQ(core.kind, CoreKind::singular);
  EXPECT_LE(std::abs(core.x - 160), 16);
  EXPECT_LE(std::abs(core.y - 160), 16);
}

TEST(Core, LoopSingularity) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto sf = generate_field(FingerClass::right_loop, 320, 320, seed);
    const auto truth = sf.model.cores().front();
    const auto core = find_core(sf.field);
    EXPECT_EQ(core.kind, CoreKind::singular);
    EXPECT_LE(std::abs(core.x - truth.x), 16.0) << "seed " << seed;
    EXPECT_LE(std::abs(core.y - truth.y), 16.0) << "seed " << seed;
  }
}

TEST(Core, ArchFallsBack) {
  const auto sf = generate_field(FingerClass::arch, 320, 320, 4);
  EXPECT_EQ(find_core(sf.field).kind, CoreKind::arch_fallback);
}

TEST(Core, NoValidBlocksThrows) { EXPECT_THROW(find_core(OrientationField(4, 4, 16)), CoreDetectionError); }

TEST(CoreBits, Corners) {
  EXPECT_EQ(core_bit_code(0, 0, 300, 400).to_string(), "0000000000");
  EXPECT_EQ(core_bit_code(299, 399, 300, 400).to_string(), "1111111111");
  EXPECT_EQ(core_bit_code(160, 160, 320, 320).to_string(), "1100000000");
}

TEST(CoreBits, TopLeftQuadrant) {
  for (int x = 0; x < 160; x += 13)
    for (int y = 0; y < 160; y += 11) {
      const auto b = core_bit_code(x, y, 320, 320);
      EXPECT_FALSE(b.bit(9));
      EXPECT_FALSE(b.bit(8));
    }
}

TEST(CoreBits, ParseAndHamming) {
  const auto a = CoreCode::parse("0110101010");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->to_string(), "0110101010");
  EXPECT_FALSE(CoreCode::parse("011010101"));
  EXPECT_FALSE(CoreCode::parse("01101010x0"));
  EXPECT_EQ(hamming(*a, CoreCode(0)), 5);
  EXPECT_THROW(core_bit_code(320, 0, 320, 320), InvalidArgument);
}

TEST(Orientation, DumpFormat) {
  auto f = uniform_field(2, 1, 0.5);
  std::ostringstream os;
  dump_orientation(f, os);
  EXPECT_EQ(os.str(), "0 0 0.500000 1.000000 1\n0 1 0.500000 1.000000 1\n");
}
