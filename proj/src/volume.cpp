#include "nexf/volume.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "volume payload is little-endian; big-endian hosts need byte swaps");

namespace nexf {

Volume make_volume(const Eigen::Vector3i& dims, const Eigen::Vector3d& spacing, float fill) {
  if ((dims.array() < 1).any())
    throw VolumeError("volume dims must be positive");
  Volume v;
  v.dims = dims;
  v.spacing = spacing;
  v.data.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), fill);
  validate_volume(v);
  return v;
}

void validate_volume(const Volume& v) {
  if ((v.dims.array() < 1).any())
    throw VolumeError("volume dims must be positive");
  if (!(v.spacing.array() > 0.0).all())
    throw VolumeError("volume spacing must be positive");
  const std::size_t expect =
      static_cast<std::size_t>(v.dims.x()) * v.dims.y() * v.dims.z();
  if (v.data.size() != expect) {
    std::ostringstream msg;
    msg << "volume payload holds " << v.data.size() << " scalars, dims declare " << expect;
    throw VolumeError(msg.str());
  }
  for (float f : v.data)
    if (!std::isfinite(f))
      throw VolumeError("volume contains non-finite intensity");
}

double voxel_center_coord(int i, int n) {
  return -1.0 + (static_cast<double>(i) + 0.5) * 2.0 / static_cast<double>(n);
}

double voxel_pitch(const Volume& v) {
  return 2.0 / static_cast<double>(std::max(v.dims.x(), v.dims.y()));
}

void save_volume(const Volume& v, const std::filesystem::path& path) {
  validate_volume(v);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw VolumeError("cannot open " + path.string() + " for writing");
  std::ostringstream header;
  header << "dims: " << v.dims.x() << ' ' << v.dims.y() << ' ' << v.dims.z() << '\n';
  header.precision(17);
  header << "spacing: " << v.spacing.x() << ' ' << v.spacing.y() << ' ' << v.spacing.z() << '\n';
  header << "dtype: f32le\n\n";
  out << header.str();
  out.write(reinterpret_cast<const char*>(v.data.data()),
            static_cast<std::streamsize>(v.data.size() * sizeof(float)));
  if (!out)
    throw VolumeError("short write to " + path.string());
}

Volume load_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw VolumeError("cannot open " + path.string());

  Volume v;
  bool have_dims = false, have_dtype = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      break;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw VolumeError("malformed header line '" + line + "' in " + path.string());
    const std::string key = line.substr(0, colon);
    std::istringstream val(line.substr(colon + 1));
    if (key == "dims") {
      if (!(val >> v.dims.x() >> v.dims.y() >> v.dims.z()))
        throw VolumeError("malformed dims in " + path.string());
      have_dims = true;
    } else if (key == "spacing") {
      if (!(val >> v.spacing.x() >> v.spacing.y() >> v.spacing.z()))
        throw VolumeError("malformed spacing in " + path.string());
    } else if (key == "dtype") {
      std::string dtype;
      val >> dtype;
      if (dtype != "f32le")
        throw VolumeError("unsupported dtype '" + dtype + "' in " + path.string());
      have_dtype = true;
    } else {
      throw VolumeError("unknown header key '" + key + "' in " + path.string());
    }
  }
  if (!have_dims || !have_dtype)
    throw VolumeError("incomplete header in " + path.string());
  if ((v.dims.array() < 1).any())
    throw VolumeError("non-positive dims in " + path.string());

  const std::size_t count = static_cast<std::size_t>(v.dims.x()) * v.dims.y() * v.dims.z();
  v.data.resize(count);
  in.read(reinterpret_cast<char*>(v.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
    throw VolumeError("payload shorter than header dims in " + path.string());
  char extra;
  if (in.read(&extra, 1))
    throw VolumeError("payload longer than header dims in " + path.string());

  validate_volume(v); // also rejects non-finite payload
  return v;
}

} // namespace nexf
