#include "nexf/geometry.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace nexf;
using std::numbers::pi;

TEST_CASE("symmetric curve peaks at the midpoint with profile exactly 1") {
  FocalCurve curve; // alpha = beta = 2
  const Eigen::Vector2d mid = curve_point(curve, 0.5);
  CHECK(mid.x() == doctest::Approx(curve.offset.x()));
  CHECK(mid.y() == curve.offset.y() + curve.scale.y()); // profile == 1 exactly
}

TEST_CASE("symmetric curve mirrors about the midline") {
  FocalCurve curve;
  for (double u : {0.0, 0.125, 0.25, 0.375, 0.5}) {
    const Eigen::Vector2d a = curve_point(curve, u);
    const Eigen::Vector2d b = curve_point(curve, 1.0 - u);
    CHECK(a.y() == doctest::Approx(b.y()).epsilon(1e-12));
    CHECK(a.x() - curve.offset.x() ==
          doctest::Approx(-(b.x() - curve.offset.x())).epsilon(1e-12));
  }
}

TEST_CASE("arc-length table matches adaptive quadrature") {
  FocalCurve curve;
  const ArcLengthTable table(curve);
  const double quad = oracle::arc_length_quadrature(curve, 0.0, 1.0);
  CHECK(table.total_length() == doctest::Approx(quad).epsilon(1e-6));
}

TEST_CASE("straight-line curve segments at equal euclidean spacing") {
  FocalCurve line;
  line.scale = {0.8, 0.0};
  const auto samples = segment_curve(line, 4);
  REQUIRE(samples.size() == 4);
  const double gap = (samples[1].point - samples[0].point).norm();
  for (std::size_t i = 1; i < samples.size(); ++i) {
    CHECK((samples[i].point - samples[i - 1].point).norm() == doctest::Approx(gap));
    CHECK(samples[i].tangent.norm() == doctest::Approx(1.0));
  }
  CHECK(gap == doctest::Approx(2.0 * 0.8 / 3.0));
}

TEST_CASE("576 segments have equal arc spacing against the quadrature oracle") {
  FocalCurve curve;
  const ArcLengthTable table(curve);
  const auto samples = segment_curve(curve, 576);
  REQUIRE(samples.size() == 576);

  // parameters back out of the table so the oracle can integrate between them
  std::vector<double> params;
  for (int i = 0; i < 576; ++i)
    params.push_back(table.param_at_arc(table.total_length() * i / 575.0));

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 1; i < params.size(); ++i) {
    const double s = oracle::arc_length_quadrature(curve, params[i - 1], params[i], 1e-12);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  CHECK(hi / lo < 1.0001);
}

TEST_CASE("reversing the parameter direction reverses the point order") {
  FocalCurve curve;
  curve.alpha = 2.0;
  curve.beta = 3.0;
  FocalCurve reversed = curve;
  std::swap(reversed.alpha, reversed.beta);
  reversed.scale.x() = -reversed.scale.x();

  const auto forward = segment_curve(curve, 9);
  const auto backward = segment_curve(reversed, 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(forward[static_cast<std::size_t>(i)].point.x() ==
          doctest::Approx(backward[static_cast<std::size_t>(8 - i)].point.x()).epsilon(1e-9));
    CHECK(forward[static_cast<std::size_t>(i)].point.y() ==
          doctest::Approx(backward[static_cast<std::size_t>(8 - i)].point.y()).epsilon(1e-9));
  }
}

TEST_CASE("normal rays are perpendicular to the tangent") {
  FocalCurve curve;
  const auto rays = generate_rays(curve, 32);
  const auto segments = segment_curve(curve, 32);
  REQUIRE(rays.size() == 32);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    CHECK(std::abs(rays[i].direction.dot(segments[i].tangent)) < 1e-9);
    CHECK(rays[i].direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pi/4 and 3pi/4 rays mirror about the normal") {
  FocalCurve curve;
  const double angles[2] = {pi / 4.0, 3.0 * pi / 4.0};
  const auto rays = generate_rays(curve, 8, angles);
  const auto segments = segment_curve(curve, 8);
  REQUIRE(rays.size() == 16);
  for (int s = 0; s < 8; ++s) {
    const auto& quarter = rays[static_cast<std::size_t>(2 * s)];
    const auto& three_quarter = rays[static_cast<std::size_t>(2 * s + 1)];
    const Eigen::Vector2d tangent = segments[static_cast<std::size_t>(s)].tangent;
    const Eigen::Vector2d normal{tangent.y(), -tangent.x()};
    CHECK(quarter.direction.dot(tangent) ==
          doctest::Approx(-three_quarter.direction.dot(tangent)).epsilon(1e-9));
    CHECK(quarter.direction.dot(normal) ==
          doctest::Approx(three_quarter.direction.dot(normal)).epsilon(1e-9));
  }
}

TEST_CASE("chord intervals match an exhaustive stepping oracle") {
  FocalCurve curve;
  const auto rays = generate_rays(curve, 576);
  const double step = 1e-4;
  for (std::size_t i = 0; i < rays.size(); i += 23) {
    const Ray& ray = rays[i];
    // march t to find the first and last in-square positions
    double first = -1.0, last = -1.0;
    for (double t = 0.0; t < 8.0; t += step) {
      const Eigen::Vector2d p = ray.point_at(t);
      const bool inside = std::abs(p.x()) <= 1.0 && std::abs(p.y()) <= 1.0;
      if (inside && first < 0.0)
        first = t;
      if (inside)
        last = t;
    }
    REQUIRE(first >= 0.0);
    CHECK(std::abs(ray.t_near - first) < 2.0 * step);
    CHECK(std::abs(ray.t_far - last) < 2.0 * step);
  }
}

TEST_CASE("ray chords stay inside the normalized square") {
  FocalCurve curve;
  const auto rays = generate_rays(curve, 144);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const Ray& ray : rays) {
    CHECK(ray.t_near >= 0.0);
    CHECK(ray.t_far > ray.t_near);
    for (int k = 0; k < 1000; ++k) {
      const double t = ray.t_near + unit(rng) * (ray.t_far - ray.t_near);
      const Eigen::Vector2d p = ray.point_at(t);
      CHECK(std::abs(p.x()) <= 1.0 + 1e-9);
      CHECK(std::abs(p.y()) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("ray count is segments times angles") {
  FocalCurve curve;
  const double fan[3] = {pi / 4.0, pi / 2.0, 3.0 * pi / 4.0};
  CHECK(generate_rays(curve, 12, fan).size() == 36);
}

TEST_CASE("geometry error paths") {
  FocalCurve curve;
  CHECK_THROWS_AS(curve_point(curve, -0.1), GeometryError);
  CHECK_THROWS_AS(curve_point(curve, 1.1), GeometryError);
  CHECK_THROWS_AS(segment_curve(curve, 1), GeometryError);

  const double bad_angle[1] = {pi / 8.0};
  CHECK_THROWS_AS(generate_rays(curve, 4, bad_angle), GeometryError);

  FocalCurve huge;
  huge.scale = {1.5, 0.5};
  CHECK_THROWS_AS(validate_curve(huge), GeometryError);

  FocalCurve spiky;
  spiky.alpha = 0.5; // unbounded profile, cannot be peak-normalized
  CHECK_THROWS_AS(validate_curve(spiky), GeometryError);

  FocalCurve dot;
  dot.scale = {0.0, 0.0};
  CHECK_THROWS_AS(segment_curve(dot, 4), GeometryError);
}
