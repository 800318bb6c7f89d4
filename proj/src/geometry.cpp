#include "nexf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace nexf {
namespace {

// Beta-density profile normalized so the peak over [0,1] is exactly 1.
// Requires alpha, beta >= 1: for exponents below 1 the density is unbounded
// at an endpoint and cannot be peak-normalized.
struct BetaProfile {
  double alpha, beta, peak;

  explicit BetaProfile(const FocalCurve& c) : alpha(c.alpha), beta(c.beta) {
    if (!(alpha >= 1.0) || !(beta >= 1.0))
      throw GeometryError("focal curve requires alpha >= 1 and beta >= 1");
    if (alpha > 1.0 && beta > 1.0) {
      const double mode = (alpha - 1.0) / (alpha + beta - 2.0);
      peak = raw(mode);
    } else {
      peak = std::max(raw(0.0), raw(1.0)); // monotone profile peaks at an end
    }
  }

  double raw(double u) const {
    return std::pow(u, alpha - 1.0) * std::pow(1.0 - u, beta - 1.0);
  }
  double value(double u) const { return raw(u) / peak; }
  double derivative(double u) const {
    // d/du [u^(a-1)(1-u)^(b-1)] / peak, with the endpoint limits for a or b = 1
    const double a = alpha - 1.0, b = beta - 1.0;
    double term1 = 0.0, term2 = 0.0;
    if (a != 0.0)
      term1 = a * std::pow(u, a - 1.0) * std::pow(1.0 - u, b);
    if (b != 0.0)
      term2 = b * std::pow(u, a) * std::pow(1.0 - u, b - 1.0);
    return (term1 - term2) / peak;
  }
};

void check_param(double u) {
  if (!(u >= 0.0 && u <= 1.0))
    throw GeometryError("curve parameter outside [0,1]");
}

} // namespace

void validate_curve(const FocalCurve& curve) {
  BetaProfile profile(curve); // throws on bad alpha/beta
  for (int i = 0; i <= 256; ++i) {
    const Eigen::Vector2d p = curve_point(curve, i / 256.0);
    if (p.cwiseAbs().maxCoeff() >= 1.0)
      throw GeometryError("focal curve leaves the normalized footprint [-1,1]^2");
  }
  (void)profile;
}

Eigen::Vector2d curve_point(const FocalCurve& curve, double u) {
  check_param(u);
  BetaProfile profile(curve);
  return {curve.scale.x() * (2.0 * u - 1.0) + curve.offset.x(),
          curve.scale.y() * profile.value(u) + curve.offset.y()};
}

Eigen::Vector2d curve_tangent(const FocalCurve& curve, double u) {
  check_param(u);
  BetaProfile profile(curve);
  Eigen::Vector2d d{2.0 * curve.scale.x(), curve.scale.y() * profile.derivative(u)};
  const double n = d.norm();
  if (!(n > 0.0))
    throw GeometryError("degenerate focal curve: zero tangent");
  return d / n;
}

ArcLengthTable::ArcLengthTable(const FocalCurve& curve, int knots) {
  if (knots < 2)
    throw GeometryError("arc-length table needs at least 2 knots");
  cumulative_.resize(static_cast<std::size_t>(knots) + 1);
  cumulative_[0] = 0.0;
  Eigen::Vector2d prev = curve_point(curve, 0.0);
  for (int i = 1; i <= knots; ++i) {
    const Eigen::Vector2d p = curve_point(curve, static_cast<double>(i) / knots);
    cumulative_[i] = cumulative_[i - 1] + (p - prev).norm();
    prev = p;
  }
  if (!(total_length() > 0.0))
    throw GeometryError("degenerate focal curve: zero length");
}

double ArcLengthTable::param_at_arc(double s) const {
  const int knots = static_cast<int>(cumulative_.size()) - 1;
  s = std::clamp(s, 0.0, cumulative_.back());
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), s);
  if (it == cumulative_.begin())
    return 0.0;
  const int hi = static_cast<int>(it - cumulative_.begin());
  const double seg = cumulative_[hi] - cumulative_[hi - 1];
  const double frac = seg > 0.0 ? (s - cumulative_[hi - 1]) / seg : 0.0;
  return (static_cast<double>(hi - 1) + frac) / knots;
}

std::vector<CurveSample> segment_curve(const FocalCurve& curve, int n_segments) {
  if (n_segments < 2)
    throw GeometryError("segmentation needs at least 2 segments");
  ArcLengthTable table(curve);
  const double spacing = table.total_length() / (n_segments - 1);
  std::vector<CurveSample> samples;
  samples.reserve(static_cast<std::size_t>(n_segments));
  for (int i = 0; i < n_segments; ++i) {
    const double u = table.param_at_arc(spacing * i);
    samples.push_back({curve_point(curve, u), curve_tangent(curve, u)});
  }
  return samples;
}

bool clip_to_square(const Eigen::Vector2d& origin, const Eigen::Vector2d& direction,
                    double& t_near, double& t_far) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 2; ++axis) {
    const double o = origin[axis], d = direction[axis];
    if (d == 0.0) {
      if (o < -1.0 || o > 1.0)
        return false;
      continue;
    }
    double lo = (-1.0 - o) / d;
    double hi = (1.0 - o) / d;
    if (lo > hi)
      std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
  }
  if (!(t1 > t0))
    return false;
  t_near = t0;
  t_far = t1;
  return true;
}

std::vector<Ray> generate_rays(const FocalCurve& curve, int n_segments,
                               std::span<const double> angles) {
  static constexpr double kNormalOnly[] = {std::numbers::pi / 2.0};
  if (angles.empty())
    angles = kNormalOnly;
  for (double a : angles)
    if (!(a >= kMinIncidence - 1e-12 && a <= kMaxIncidence + 1e-12)) {
      std::ostringstream msg;
      msg << "ray angle " << a << " outside [pi/4, 3pi/4]";
      throw GeometryError(msg.str());
    }

  validate_curve(curve);
  const auto segments = segment_curve(curve, n_segments);

  // Place the origin behind the segment point, outside the square, so that
  // t_near > 0 and the chord crosses the arch.
  constexpr double kBackoff = 4.0; // > square diagonal 2*sqrt(2)
  std::vector<Ray> rays;
  rays.reserve(segments.size() * angles.size());
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    const Eigen::Vector2d tangent = segments[s].tangent;
    const Eigen::Vector2d inward{tangent.y(), -tangent.x()}; // concave side of the arch
    for (double theta : angles) {
      Ray ray;
      ray.direction = std::cos(theta) * tangent + std::sin(theta) * inward;
      ray.direction.normalize();
      ray.origin = segments[s].point - kBackoff * ray.direction;
      ray.segment = s;
      ray.incidence = theta;
      if (!clip_to_square(ray.origin, ray.direction, ray.t_near, ray.t_far))
        throw GeometryError("ray misses the normalized volume footprint");
      rays.push_back(ray);
    }
  }
  return rays;
}

} // namespace nexf
