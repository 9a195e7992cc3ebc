#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cfc/collision.hpp"
#include "cfc/error.hpp"

using namespace cfc;

namespace {

PlacedShape placed(int id, const Shape& shape, const Vector3d& position, bool movable = true,
                   const Eigen::Quaterniond& q = Eigen::Quaterniond::Identity()) {
  PlacedShape s;
  s.body_id = id;
  s.shape = shape;
  s.body_pose.position = position;
  s.body_pose.orientation = q;
  s.movable = movable;
  return s;
}

SceneSnapshot snapshot(std::vector<PlacedShape> shapes) {
  SceneSnapshot s;
  s.shapes = std::move(shapes);
  return s;
}

void expect_valid(const ContactPoint& c, int n_d) {
  EXPECT_NEAR(c.normal.norm(), 1.0, 1e-9);
  ASSERT_EQ(static_cast<int>(c.tangent_dirs.size()), n_d);
  for (const Vector3d& d : c.tangent_dirs) {
    EXPECT_NEAR(d.norm(), 1.0, 1e-9);
    EXPECT_NEAR(d.dot(c.normal), 0.0, 1e-9);
  }
  for (int j = 0; j < n_d / 2; ++j) {
    EXPECT_EQ(c.tangent_dirs[j + n_d / 2], Vector3d(-c.tangent_dirs[j]));
  }
}

}  // namespace

TEST(TangentBasis, CanonicalFrameForZ) {
  const auto d = tangent_basis(Vector3d::UnitZ(), 4);
  ASSERT_EQ(d.size(), 4u);
  const std::vector<Vector3d> expected = {Vector3d(1, 0, 0), Vector3d(0, 1, 0), Vector3d(-1, 0, 0),
                                          Vector3d(0, -1, 0)};
  for (const Vector3d& e : expected) {
    const bool found = std::any_of(d.begin(), d.end(), [&](const Vector3d& x) { return (x - e).norm() < 1e-12; });
    EXPECT_TRUE(found) << e.transpose();
  }
}

TEST(TangentBasis, SymmetricAndOrthogonal) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int n_d : {2, 4, 6, 8}) {
    for (int i = 0; i < 200; ++i) {
      const Vector3d normal = Vector3d(n(rng), n(rng), n(rng)).normalized();
      const auto d = tangent_basis(normal, n_d);
      Vector3d sum = Vector3d::Zero();
      for (const Vector3d& t : d) {
        sum += t;
        EXPECT_NEAR(t.dot(normal), 0.0, 1e-12);
        EXPECT_NEAR(t.norm(), 1.0, 1e-12);
      }
      EXPECT_NEAR(sum.norm(), 0.0, 1e-12);
      for (int j = 0; j < n_d / 2; ++j) EXPECT_EQ(d[j + n_d / 2], Vector3d(-d[j]));
    }
  }
}

TEST(GeometryConfig, Validation) {
  GeometryConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_d = 3;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.n_d = 4;
  c.contact_margin = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(DetectContacts, SphereOverPlane) {
  const auto contacts = detect_contacts(
      snapshot({placed(0, Shape::plane(), Vector3d::Zero(), false), placed(1, Shape::sphere(0.05), Vector3d(0, 0, 0.06))}),
      GeometryConfig{});
  ASSERT_EQ(contacts.size(), 1u);
  EXPECT_NEAR(contacts[0].phi, 0.01, 1e-12);
  EXPECT_NEAR((contacts[0].normal - Vector3d::UnitZ()).norm(), 0.0, 1e-12);
  EXPECT_EQ(contacts[0].body_a, 1);
  EXPECT_EQ(contacts[0].body_b, 0);
  expect_valid(contacts[0], 4);
}

TEST(DetectContacts, SphereOverPlaneRandom) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> xy(-1.0, 1.0);
  std::uniform_real_distribution<double> r(0.01, 0.1);
  std::uniform_real_distribution<double> gap(-0.02, 0.009);
  for (int i = 0; i < 1000; ++i) {
    const double radius = r(rng);
    const double g = gap(rng);
    const auto contacts = detect_contacts(snapshot({placed(0, Shape::plane(), Vector3d::Zero(), false),
                                                    placed(1, Shape::sphere(radius), Vector3d(xy(rng), xy(rng), radius + g))}),
                                          GeometryConfig{});
    ASSERT_EQ(contacts.size(), 1u);
    EXPECT_NEAR(contacts[0].phi, g, 1e-12);
  }
}

TEST(DetectContacts, TwoSpheres) {
  const auto contacts = detect_contacts(
      snapshot({placed(0, Shape::sphere(0.05), Vector3d::Zero()), placed(1, Shape::sphere(0.05), Vector3d(0.12, 0, 0))}),
      GeometryConfig{0 + 4, 0.05, 4});
  ASSERT_EQ(contacts.size(), 1u);
  EXPECT_NEAR(contacts[0].phi, 0.02, 1e-12);
  EXPECT_NEAR((contacts[0].normal - Vector3d::UnitX()).norm(), 0.0, 1e-12);
}

TEST(DetectContacts, MarginDropsFarContacts) {
  const auto contacts = detect_contacts(
      snapshot({placed(0, Shape::sphere(0.05), Vector3d::Zero()), placed(1, Shape::sphere(0.05), Vector3d(0.12, 0, 0))}),
      GeometryConfig{});
  EXPECT_TRUE(contacts.empty());
}

TEST(DetectContacts, RestingBoxFourVertices) {
  const double a = 0.03;
  const auto contacts = detect_contacts(
      snapshot({placed(0, Shape::plane(), Vector3d::Zero(), false), placed(1, Shape::box(Vector3d::Constant(a)), Vector3d(0, 0, a))}),
      GeometryConfig{});
  ASSERT_EQ(contacts.size(), 4u);
  // Brute-force oracle: bottom vertices are exactly the ones at height 0.
  std::vector<Vector3d> bottom;
  for (int i = 0; i < 8; ++i) {
    const Vector3d v((i & 1 ? a : -a), (i & 2 ? a : -a), a + (i & 4 ? a : -a));
    if (v.z() <= 0.01) bottom.push_back(v);
  }
  ASSERT_EQ(bottom.size(), 4u);
  for (const ContactPoint& c : contacts) {
    EXPECT_NEAR(c.phi, 0.0, 1e-12);
    expect_valid(c, 4);
    const bool match = std::any_of(bottom.begin(), bottom.end(), [&](const Vector3d& v) {
      return (v - c.witness_point).norm() < 1e-12;
    });
    EXPECT_TRUE(match) << c.witness_point.transpose();
  }
}

TEST(DetectContacts, PenetrationNotClamped) {
  const auto contacts = detect_contacts(snapshot({placed(0, Shape::plane(), Vector3d::Zero(), false),
                                                  placed(1, Shape::sphere(0.05), Vector3d(0, 0, 0.04))}),
                                        GeometryConfig{});
  ASSERT_EQ(contacts.size(), 1u);
  EXPECT_NEAR(contacts[0].phi, -0.01, 1e-12);
}

TEST(DetectContacts, SphereBox) {
  const auto contacts = detect_contacts(snapshot({placed(0, Shape::box(Vector3d::Constant(0.03)), Vector3d::Zero()),
                                                  placed(1, Shape::sphere(0.01), Vector3d(0.045, 0, 0))}),
                                        GeometryConfig{});
  ASSERT_EQ(contacts.size(), 1u);
  EXPECT_NEAR(contacts[0].phi, 0.005, 1e-12);
  EXPECT_NEAR((contacts[0].normal - Vector3d::UnitX()).norm(), 0.0, 1e-12);
}

TEST(DetectContacts, BoxBoxCappedPerPair) {
  const auto contacts = detect_contacts(snapshot({placed(0, Shape::box(Vector3d::Constant(0.03)), Vector3d::Zero()),
                                                  placed(1, Shape::box(Vector3d::Constant(0.03)), Vector3d(0.061, 0, 0))}),
                                        GeometryConfig{});
  ASSERT_FALSE(contacts.empty());
  EXPECT_LE(contacts.size(), 4u);
  for (const ContactPoint& c : contacts) {
    EXPECT_NEAR(c.phi, 0.001, 1e-9);
    EXPECT_NEAR(std::abs(c.normal.x()), 1.0, 1e-9);
  }
}

TEST(DetectContacts, FixedPairsSkipped) {
  const auto contacts = detect_contacts(snapshot({placed(0, Shape::plane(), Vector3d::Zero(), false),
                                                  placed(1, Shape::sphere(0.05), Vector3d(0, 0, 0.05), false)}),
                                        GeometryConfig{});
  EXPECT_TRUE(contacts.empty());
}

TEST(DetectContacts, PlanePlaneUnsupported) {
  GeometryConfig cfg;
  EXPECT_THROW(detect_pair(placed(0, Shape::plane(), Vector3d::Zero()), placed(1, Shape::plane(), Vector3d::Zero()), cfg),
               UnsupportedGeometry);
}

TEST(DetectContacts, SwapFlipsNormal) {
  GeometryConfig cfg;
  const PlacedShape a = placed(0, Shape::sphere(0.05), Vector3d::Zero());
  const PlacedShape b = placed(1, Shape::sphere(0.04), Vector3d(0.05, 0.06, 0.0));
  const auto ab = detect_pair(a, b, cfg);
  const auto ba = detect_pair(b, a, cfg);
  ASSERT_EQ(ab.size(), 1u);
  ASSERT_EQ(ba.size(), 1u);
  EXPECT_NEAR(ab[0].phi, ba[0].phi, 1e-15);
  EXPECT_NEAR((ab[0].normal + ba[0].normal).norm(), 0.0, 1e-12);
  EXPECT_EQ(ab[0].body_a, ba[0].body_b);
  EXPECT_EQ(ab[0].body_b, ba[0].body_a);
}

TEST(DetectContacts, DeterministicAndTranslationInvariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  const Eigen::Quaterniond tilt(Eigen::AngleAxisd(0.2, Vector3d(1, 1, 0).normalized()));
  auto scene = [&](const Vector3d& shift) {
    return snapshot({placed(0, Shape::box(Vector3d(0.2, 0.2, 0.02)), shift, false),
                     placed(1, Shape::box(Vector3d::Constant(0.03)), shift + Vector3d(0.0, 0.0, 0.06), true, tilt),
                     placed(2, Shape::sphere(0.02), shift + Vector3d(0.05, 0.0, 0.04))});
  };
  const GeometryConfig cfg{4, 0.05, 4};
  const auto first = detect_contacts(scene(Vector3d::Zero()), cfg);
  const auto second = detect_contacts(scene(Vector3d::Zero()), cfg);
  ASSERT_FALSE(first.empty());
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].phi, second[i].phi);
    EXPECT_EQ(first[i].witness_point, second[i].witness_point);
    EXPECT_EQ(first[i].normal, second[i].normal);
  }
  const Vector3d shift(u(rng), u(rng), u(rng));
  const auto moved = detect_contacts(scene(shift), cfg);
  ASSERT_EQ(moved.size(), first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_NEAR(moved[i].phi, first[i].phi, 1e-12);
    EXPECT_NEAR((moved[i].witness_point - first[i].witness_point - shift).norm(), 0.0, 1e-12);
  }
}

TEST(BoxSdf, InsideAndOutside) {
  Vector3d g;
  EXPECT_NEAR(box_sdf(Vector3d::Constant(1.0), Vector3d(2, 0, 0), &g), 1.0, 1e-15);
  EXPECT_NEAR((g - Vector3d::UnitX()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(box_sdf(Vector3d::Constant(1.0), Vector3d(0, 0.5, 0), &g), -0.5, 1e-15);
  EXPECT_NEAR((g - Vector3d::UnitY()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(box_sdf(Vector3d::Constant(1.0), Vector3d(2, 2, 1), &g), std::sqrt(2.0), 1e-15);
}

TEST(FrictionTable, Overrides) {
  FrictionTable t;
  t.default_mu = 0.5;
  t.overrides.push_back({0, 2, 0.1});
  EXPECT_EQ(t.lookup(0, 2), 0.1);
  EXPECT_EQ(t.lookup(2, 0), 0.1);
  EXPECT_EQ(t.lookup(1, 2), 0.5);
}
