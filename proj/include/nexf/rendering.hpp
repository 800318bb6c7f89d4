#pragma once

#include "nexf/geometry.hpp"
#include "nexf/volume.hpp"

#include <cmath>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace nexf {

struct RenderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RenderLaw { soft, beer_lambert };

/// Bias/scale of the soft projection law. C sits between soft tissue and
/// bone so the exponent (V - C)/S stays order-one over the HU-like range.
struct RenderParams {
  double bias_c = 1000.0;
  double scale_s = 1200.0;
  RenderLaw law = RenderLaw::soft;
};

void validate_render_params(const RenderParams& params);

/// Soft projection of one detector pixel:
///   S * (log sum_i exp((V_i - C)/S) - log Ns),
/// evaluated max-shifted so any finite samples give a finite result. The
/// -log Ns term makes values comparable across sampling rates.
template <class T>
T render_soft(std::span<const T> samples, T ns_rate, const RenderParams& params) {
  if (samples.empty())
    throw RenderError("render_soft needs at least one sample");
  if (!(ns_rate > T(0)))
    throw RenderError("render_soft needs a positive sampling rate");
  const T c = static_cast<T>(params.bias_c);
  const T s = static_cast<T>(params.scale_s);
  T peak = (samples[0] - c) / s;
  for (T v : samples)
    peak = std::max(peak, (v - c) / s);
  T acc = T(0);
  for (T v : samples)
    acc += std::exp((v - c) / s - peak);
  return s * (peak + std::log(acc) - std::log(ns_rate));
}

inline constexpr double kAttenuationAir = -1000.0;
inline constexpr double kAttenuationNormalizer = 2000.0;

/// Attenuation coefficient for the Beer-Lambert variant: a minimal monotone
/// HU-like map, zero at air, 1 at +1000.
template <class T>
T attenuation_mu(T value) {
  const T shifted = value - static_cast<T>(kAttenuationAir);
  return std::max(shifted, T(0)) / static_cast<T>(kAttenuationNormalizer);
}

/// Line-integral approximation sum_i mu(V_i) * step (the rendering-law
/// ablation).
template <class T>
T render_beer_lambert(std::span<const T> samples, T step, const RenderParams&) {
  if (samples.empty())
    throw RenderError("render_beer_lambert needs at least one sample");
  if (!(step > T(0)))
    throw RenderError("render_beer_lambert needs a positive step");
  T acc = T(0);
  for (T v : samples)
    acc += attenuation_mu(v);
  return acc * step;
}

/// 2D detector image: one column per ray, one row per beam height level.
struct ProjectionImage {
  int width = 0;  // rays (segments x angles)
  int height = 0; // beam height, volume nz
  std::vector<double> pixels; // row-major, index = y*width + x

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Trilinear interpolation at a normalized position in [-1,1]^3, clamped to
/// the boundary outside; exact at voxel centers.
double trilinear(const Volume& volume, const Eigen::Vector3d& position);

/// Render the ground-truth projection: for every ray and every z row, sample
/// the volume at the ray's midpoint ladder (rate Ns, one step = one voxel
/// pitch) and apply the configured law. Deterministic and thread-count
/// independent (rays are independent columns).
ProjectionImage project_volume(const Volume& volume, std::span<const Ray> rays,
                               double ns_rate, const RenderParams& params,
                               int threads = 1);

/// Raw f32 image file in the volume header format with nz = 1.
void save_projection_raw(const ProjectionImage& image, const std::filesystem::path& path);
ProjectionImage load_projection_raw(const std::filesystem::path& path);

/// 16-bit PGM, min-max scaled; scale written to "<path>.scale.txt".
void save_projection_pgm(const ProjectionImage& image, const std::filesystem::path& path);

} // namespace nexf
