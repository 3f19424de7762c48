#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "teleop/core/errors.hpp"
#include "teleop/geometry/pose.hpp"

namespace teleop::geometry {
namespace {

using teleop::testing::Rng;
using teleop::testing::random_quaternion;
using teleop::testing::random_vec;
namespace oracle = teleop::testing::oracle;

constexpr double kPi = std::numbers::pi;

TEST(Normalize, ScalarQuaternion) {
  EXPECT_EQ(normalize({2, 0, 0, 0}), (Quaternion{1, 0, 0, 0}));
}

TEST(Normalize, AxisQuaternion) {
  EXPECT_EQ(normalize({0, 0, 0, 3}), (Quaternion{0, 0, 0, 1}));
}

TEST(Normalize, RandomHasUnitNorm) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Quaternion raw{teleop::testing::uniform(rng, -5, 5), teleop::testing::uniform(rng, -5, 5),
                         teleop::testing::uniform(rng, -5, 5), teleop::testing::uniform(rng, -5, 5)};
    EXPECT_NEAR(norm(normalize(raw)), 1.0, 1e-12);
  }
}

TEST(Normalize, ZeroNormThrows) {
  try {
    normalize({0, 0, 0, 1e-13});
    FAIL() << "expected ZeroNorm";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroNorm);
  }
}

TEST(RelativeRotationAngle, IdentityPair) {
  EXPECT_EQ(relative_rotation_angle(Quaternion::identity(), Quaternion::identity()), 0.0);
}

TEST(RelativeRotationAngle, QuarterTurnAboutZ) {
  const auto q = Quaternion::from_axis_angle({0, 0, 1}, kPi / 2);
  EXPECT_NEAR(relative_rotation_angle(Quaternion::identity(), q), kPi / 2, 1e-12);
}

TEST(RelativeRotationAngle, MatchesTraceFormula) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_quaternion(rng);
    const auto b = random_quaternion(rng);
    EXPECT_NEAR(relative_rotation_angle(a, b), oracle::trace_angle(a, b), 1e-9);
  }
}

TEST(RelativeRotationAngle, SymmetricAndDoubleCover) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_quaternion(rng);
    const auto b = random_quaternion(rng);
    EXPECT_DOUBLE_EQ(relative_rotation_angle(a, b), relative_rotation_angle(b, a));
    EXPECT_EQ(relative_rotation_angle(a, a), 0.0);
    EXPECT_NEAR(relative_rotation_angle(a, -a), 0.0, 1e-15);
    EXPECT_TRUE(same_orientation(a, -a));
    const double angle = relative_rotation_angle(a, b);
    EXPECT_GE(angle, 0.0);
    EXPECT_LE(angle, kPi);
  }
}

TEST(RelativeRotationAngle, TriangleInequality) {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_quaternion(rng);
    const auto b = random_quaternion(rng);
    const auto c = random_quaternion(rng);
    EXPECT_LE(relative_rotation_angle(a, c),
              relative_rotation_angle(a, b) + relative_rotation_angle(b, c) + 1e-9);
  }
}

TEST(ComposeDelta, TranslationOnly) {
  const Pose p = compose_delta(Pose{}, {0.1, 0, 0}, Quaternion::identity());
  EXPECT_EQ(p.position, (Vec3{0.1, 0, 0}));
  EXPECT_EQ(p.orientation, Quaternion::identity());
}

TEST(ComposeDelta, ZeroDeltaIsIdentity) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Pose p{random_vec(rng), random_quaternion(rng)};
    EXPECT_EQ(compose_delta(p, {}, Quaternion::identity()), p);
  }
}

TEST(ComposeDelta, TwoEighthTurnsMakeQuarterTurn) {
  const auto d = Quaternion::from_axis_angle({0, 0, 1}, kPi / 4);
  Pose p;
  p = compose_delta(p, {}, d);
  p = compose_delta(p, {}, d);
  EXPECT_NEAR(relative_rotation_angle(Quaternion::identity(), p.orientation), kPi / 2, 1e-12);
  EXPECT_TRUE(same_orientation(p.orientation, Quaternion::from_axis_angle({0, 0, 1}, kPi / 2)));
}

TEST(ComposeDelta, WorldFramePreMultiplication) {
  // Yaw by 90° then roll about world x: the roll must act on world x, not on
  // the already-yawed body axis.
  Pose p{{}, Quaternion::from_axis_angle({0, 0, 1}, kPi / 2)};
  const auto roll = Quaternion::from_axis_angle({1, 0, 0}, kPi / 2);
  p = compose_delta(p, {}, roll);
  const Vec3 body_x = rotate(p.orientation, {1, 0, 0});
  EXPECT_NEAR(body_x.x, 0.0, 1e-12);
  EXPECT_NEAR(body_x.y, 0.0, 1e-12);
  EXPECT_NEAR(body_x.z, 1.0, 1e-12);
}

TEST(ClampAngle, ShrinksLargeRotationsOnly) {
  const auto big = Quaternion::from_axis_angle({0, 1, 0}, 1.0);
  EXPECT_NEAR(rotation_angle(clamp_angle(big, 0.2)), 0.2, 1e-12);
  const auto small = Quaternion::from_axis_angle({0, 1, 0}, 0.1);
  EXPECT_EQ(clamp_angle(small, 0.2), small);
}

TEST(Matrix, AgreesWithEigen) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto q = random_quaternion(rng);
    const auto m = to_matrix(q);
    const auto e = oracle::matrix_of(q);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(m[r][c], e(r, c), 1e-12);
    }
  }
}

}  // namespace
}  // namespace teleop::geometry
