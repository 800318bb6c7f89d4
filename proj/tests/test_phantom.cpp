#include "nexf/phantom.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace nexf;

TEST_CASE("toothless phantom carries exactly jaw and soft tissue") {
  PhantomSpec spec;
  spec.tooth_count = 0;
  const Volume v = generate_phantom(spec, {16, 16, 8});

  std::set<float> nonbackground;
  for (float f : v.data)
    if (f != spec.background_intensity)
      nonbackground.insert(f);
  CHECK(nonbackground == std::set<float>{spec.soft_tissue_intensity, spec.jaw_intensity});
}

TEST_CASE("phantom generation is deterministic") {
  PhantomSpec spec;
  spec.tooth_count = 6;
  spec.seed = 42;
  const Volume a = generate_phantom(spec, {24, 24, 12});
  const Volume b = generate_phantom(spec, {24, 24, 12});
  CHECK(a.data == b.data);

  spec.seed = 43;
  const Volume c = generate_phantom(spec, {24, 24, 12});
  CHECK(a.data != c.data);
}

TEST_CASE("tooth voxel count matches an independent ellipsoid scan") {
  PhantomSpec spec;
  spec.tooth_count = 8;
  const Eigen::Vector3i dims{64, 64, 32};
  const Volume v = generate_phantom(spec, dims);
  const auto teeth = phantom_teeth(spec, dims);
  REQUIRE(teeth.size() == 8);

  std::size_t in_volume = 0;
  for (float f : v.data)
    in_volume += f == spec.tooth_intensity;

  std::size_t by_scan = 0;
  for (int z = 0; z < dims.z(); ++z)
    for (int y = 0; y < dims.y(); ++y)
      for (int x = 0; x < dims.x(); ++x) {
        const Eigen::Vector3d p{voxel_center_coord(x, dims.x()),
                                voxel_center_coord(y, dims.y()),
                                voxel_center_coord(z, dims.z())};
        for (const auto& tooth : teeth) {
          const Eigen::Vector3d r = (p - tooth.center).cwiseQuotient(tooth.semi_axes);
          if (r.squaredNorm() <= 1.0) {
            ++by_scan;
            break;
          }
        }
      }
  CHECK(in_volume == by_scan);
  CHECK(in_volume > 0);
}

TEST_CASE("every phantom voxel is one of the four intensities") {
  PhantomSpec spec;
  spec.tooth_count = 5;
  const Volume v = generate_phantom(spec, {32, 32, 16});
  const std::set<float> allowed{spec.background_intensity, spec.soft_tissue_intensity,
                                spec.jaw_intensity, spec.tooth_intensity};
  for (float f : v.data)
    CHECK(allowed.count(f) == 1);
}

TEST_CASE("phantom spec validation") {
  PhantomSpec spec;
  CHECK_THROWS_AS(generate_phantom(spec, {4, 64, 64}), VolumeError);
  spec.tooth_count = -1;
  CHECK_THROWS_AS(generate_phantom(spec, {16, 16, 16}), VolumeError);
  spec.tooth_count = 2;
  spec.soft_tissue_intensity = 2500.0f; // breaks the ordering
  CHECK_THROWS_AS(generate_phantom(spec, {16, 16, 16}), VolumeError);
}
