#pragma once

#include "nexf/geometry.hpp"
#include "nexf/volume.hpp"

#include <cstdint>
#include <vector>

namespace nexf {

/// Procedural dental-arch phantom: a jaw arch following the focal curve,
/// tooth ellipsoids at equal arc spacing, a soft-tissue band, air elsewhere.
/// Stands in for CBCT ground truth.
struct PhantomSpec {
  FocalCurve arch;
  int tooth_count = 10;
  Eigen::Vector3d tooth_semi_axes{2.5, 2.5, 4.0}; // voxels
  float jaw_intensity = 1400.0f;
  float tooth_intensity = 2200.0f;
  float soft_tissue_intensity = 300.0f;
  float background_intensity = -1000.0f;
  std::uint64_t seed = 1;
};

void validate_phantom_spec(const PhantomSpec& spec);

struct ToothEllipsoid {
  Eigen::Vector3d center;    // normalized coordinates
  Eigen::Vector3d semi_axes; // normalized units per axis
};

/// The realized tooth ellipsoids for (spec, dims): centers on the arch at
/// equal arc-length spacing, sizes jittered deterministically from the seed.
/// Exposed so tests can re-classify voxels independently.
std::vector<ToothEllipsoid> phantom_teeth(const PhantomSpec& spec,
                                          const Eigen::Vector3i& dims);

/// Deterministic pure function of (spec, dims); every voxel carries one of
/// the four spec intensities.
Volume generate_phantom(const PhantomSpec& spec, const Eigen::Vector3i& dims);

} // namespace nexf
