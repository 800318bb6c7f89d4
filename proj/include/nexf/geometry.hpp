#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <vector>

namespace nexf {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dental-arch focal curve: a beta-density profile u^(alpha-1)(1-u)^(beta-1),
/// normalized to peak 1, scaled and offset into the normalized axial square.
/// alpha = beta = 2 gives the symmetric arch used throughout.
struct FocalCurve {
  double alpha = 2.0;
  double beta = 2.0;
  Eigen::Vector2d scale{0.70, 0.55};
  Eigen::Vector2d offset{0.0, -0.25};
};

/// Throws GeometryError unless the curve is well formed and stays strictly
/// inside the axial footprint [-1,1]^2.
void validate_curve(const FocalCurve& curve);

/// Point on the arch at parameter u in [0,1].
Eigen::Vector2d curve_point(const FocalCurve& curve, double u);

/// Unit tangent dP/du / |dP/du| at parameter u.
Eigen::Vector2d curve_tangent(const FocalCurve& curve, double u);

/// Cumulative arc-length table used for equal-distance segmentation.
/// Piecewise-linear in u over `knots` uniform intervals.
class ArcLengthTable {
public:
  ArcLengthTable(const FocalCurve& curve, int knots = 4096);
  double total_length() const { return cumulative_.back(); }
  /// Parameter u at which arc length from u=0 equals s (clamped to [0, total]).
  double param_at_arc(double s) const;

private:
  std::vector<double> cumulative_; // knots+1 entries, cumulative_[0] = 0
};

struct CurveSample {
  Eigen::Vector2d point;
  Eigen::Vector2d tangent; // unit
};

/// n_segments samples at equal arc-length spacing, endpoints included.
std::vector<CurveSample> segment_curve(const FocalCurve& curve, int n_segments);

/// Axial projection ray. The chord [t_near, t_far] is the exact intersection
/// of the ray with the bounding square [-1,1]^2, t in normalized units.
struct Ray {
  Eigen::Vector2d origin{0.0, 0.0};
  Eigen::Vector2d direction{0.0, 1.0}; // unit
  double t_near = 0.0;
  double t_far = 0.0;
  int segment = 0;
  double incidence = 0.0; // angle to the segment tangent, radians

  Eigen::Vector2d point_at(double t) const { return origin + t * direction; }
  double chord_length() const { return t_far - t_near; }
};

inline constexpr double kMinIncidence = 0.7853981633974483;  // pi/4
inline constexpr double kMaxIncidence = 2.356194490192345;   // 3*pi/4

/// One ray per (segment, angle). The angle is measured from the segment
/// tangent toward the inward normal; pi/2 is normal incidence. Empty `angles`
/// means the default single normal ray per segment.
std::vector<Ray> generate_rays(const FocalCurve& curve, int n_segments,
                               std::span<const double> angles = {});

/// Clip the line o + t*d, t >= 0, against [-1,1]^2. Returns false when the
/// intersection is empty.
bool clip_to_square(const Eigen::Vector2d& origin, const Eigen::Vector2d& direction,
                    double& t_near, double& t_far);

} // namespace nexf
