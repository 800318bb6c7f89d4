#include "nexf/phantom.hpp"

#include <cmath>
#include <random>

namespace nexf {
namespace {

// Band extents in normalized units. The arch solid sits below the tooth row,
// both wrapped in a soft-tissue band; everything else is air.
constexpr double kSoftRadius = 0.26;
constexpr double kSoftZMin = -0.85, kSoftZMax = 0.85;
constexpr double kJawRadius = 0.11;
constexpr double kJawZMin = -0.75, kJawZMax = 0.40;
constexpr double kToothRowZ = 0.45;
constexpr int kPolylinePoints = 1024;

struct DistanceField {
  std::vector<Eigen::Vector2d> points;

  explicit DistanceField(const FocalCurve& curve)
      : points([&] {
          std::vector<Eigen::Vector2d> pts;
          for (const auto& s : segment_curve(curve, kPolylinePoints))
            pts.push_back(s.point);
          return pts;
        }()) {}

  double operator()(const Eigen::Vector2d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : points)
      best = std::min(best, (p - q).squaredNorm());
    return std::sqrt(best);
  }
};

} // namespace

void validate_phantom_spec(const PhantomSpec& spec) {
  if (spec.tooth_count < 0)
    throw VolumeError("tooth count must be >= 0");
  if (!(spec.background_intensity < spec.soft_tissue_intensity &&
        spec.soft_tissue_intensity < spec.jaw_intensity &&
        spec.jaw_intensity < spec.tooth_intensity))
    throw VolumeError("phantom intensities must satisfy background < soft < jaw < tooth");
  if (!(spec.tooth_semi_axes.array() > 0.0).all())
    throw VolumeError("tooth semi-axes must be positive");
  validate_curve(spec.arch);
}

std::vector<ToothEllipsoid> phantom_teeth(const PhantomSpec& spec,
                                          const Eigen::Vector3i& dims) {
  validate_phantom_spec(spec);
  std::vector<ToothEllipsoid> teeth;
  if (spec.tooth_count == 0)
    return teeth;

  const Eigen::Vector3d base_axes{2.0 * spec.tooth_semi_axes.x() / dims.x(),
                                  2.0 * spec.tooth_semi_axes.y() / dims.y(),
                                  2.0 * spec.tooth_semi_axes.z() / dims.z()};
  ArcLengthTable table(spec.arch);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  teeth.reserve(static_cast<std::size_t>(spec.tooth_count));
  for (int i = 0; i < spec.tooth_count; ++i) {
    // Midpoint arc positions keep teeth off the arch endpoints.
    const double s = (i + 0.5) / spec.tooth_count * table.total_length();
    const Eigen::Vector2d xy = curve_point(spec.arch, table.param_at_arc(s));
    ToothEllipsoid tooth;
    tooth.center = {xy.x(), xy.y(), kToothRowZ + 0.04 * jitter(rng)};
    for (int axis = 0; axis < 3; ++axis)
      tooth.semi_axes[axis] = base_axes[axis] * (1.0 + 0.15 * jitter(rng));
    teeth.push_back(tooth);
  }
  return teeth;
}

Volume generate_phantom(const PhantomSpec& spec, const Eigen::Vector3i& dims) {
  validate_phantom_spec(spec);
  if ((dims.array() < 8).any())
    throw VolumeError("phantom dims must be at least 8 voxels per axis");

  Volume vol = make_volume(dims, {1.0, 1.0, 1.0}, spec.background_intensity);
  const DistanceField arch_distance(spec.arch);
  const auto teeth = phantom_teeth(spec, dims);

  for (int y = 0; y < dims.y(); ++y)
    for (int x = 0; x < dims.x(); ++x) {
      const Eigen::Vector2d p{voxel_center_coord(x, dims.x()),
                              voxel_center_coord(y, dims.y())};
      const double dist = arch_distance(p);
      if (dist > kSoftRadius)
        continue; // air column except possibly teeth, handled below
      for (int z = 0; z < dims.z(); ++z) {
        const double zc = voxel_center_coord(z, dims.z());
        float value = spec.background_intensity;
        if (dist <= kSoftRadius && zc >= kSoftZMin && zc <= kSoftZMax)
          value = spec.soft_tissue_intensity;
        if (dist <= kJawRadius && zc >= kJawZMin && zc <= kJawZMax)
          value = spec.jaw_intensity;
        vol.at(x, y, z) = value;
      }
    }

  // Teeth win over every band they overlap. Scan each tooth's bounding box only.
  const auto lo_index = [](double c, int n) {
    return std::max(0, static_cast<int>(std::floor((c + 1.0) * 0.5 * n - 0.5)));
  };
  const auto hi_index = [](double c, int n) {
    return std::min(n - 1, static_cast<int>(std::ceil((c + 1.0) * 0.5 * n - 0.5)));
  };
  for (const auto& tooth : teeth) {
    const Eigen::Vector3d lo = tooth.center - tooth.semi_axes;
    const Eigen::Vector3d hi = tooth.center + tooth.semi_axes;
    for (int z = lo_index(lo.z(), dims.z()); z <= hi_index(hi.z(), dims.z()); ++z)
      for (int y = lo_index(lo.y(), dims.y()); y <= hi_index(hi.y(), dims.y()); ++y)
        for (int x = lo_index(lo.x(), dims.x()); x <= hi_index(hi.x(), dims.x()); ++x) {
          const Eigen::Vector3d p{voxel_center_coord(x, dims.x()),
                                  voxel_center_coord(y, dims.y()),
                                  voxel_center_coord(z, dims.z())};
          const Eigen::Vector3d r = (p - tooth.center).cwiseQuotient(tooth.semi_axes);
          if (r.squaredNorm() <= 1.0)
            vol.at(x, y, z) = spec.tooth_intensity;
        }
  }

  return vol;
}

} // namespace nexf
