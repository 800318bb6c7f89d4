#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace nexf {

/// Dense voxel grid, x-fastest storage, intensities in HU-like units.
/// Immutable by convention once filled; concurrent reads are safe.
struct Volume {
  Eigen::Vector3i dims{0, 0, 0};          // (nx, ny, nz) voxels
  Eigen::Vector3d spacing{1.0, 1.0, 1.0}; // mm per voxel
  std::vector<float> data;                // nx*ny*nz scalars, x fastest

  int nx() const { return dims.x(); }
  int ny() const { return dims.y(); }
  int nz() const { return dims.z(); }
  std::size_t size() const { return data.size(); }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims.y()) * z);
  }
  float at(int x, int y, int z) const { return data[index(x, y, z)]; }
  float& at(int x, int y, int z) { return data[index(x, y, z)]; }
};

struct VolumeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Volume make_volume(const Eigen::Vector3i& dims,
                   const Eigen::Vector3d& spacing = {1.0, 1.0, 1.0},
                   float fill = 0.0f);

/// Throws VolumeError if dims/spacing/data violate the type invariants.
void validate_volume(const Volume& v);

/// Normalized coordinate of a voxel center along one axis: -1 + (i+1/2)*2/n.
double voxel_center_coord(int i, int n);

/// Normalized-units length of one voxel step in the axial plane, 2/max(nx,ny).
double voxel_pitch(const Volume& v);

// Text header (dims / spacing / dtype, blank line) + raw f32le payload.
Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& v, const std::filesystem::path& path);

} // namespace nexf
