#pragma once

#include "nexf/geometry.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace nexf {

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SamplerMode { dynamic, fixed };

/// Per-ray sampling-rate law. Dynamic mode draws Ns ~ Uniform[rate_min,
/// rate_max] per occurrence; fixed mode always returns fixed_rate and exists
/// for the fixed-rate ablation.
struct SamplerConfig {
  double rate_min = 0.25;
  double rate_max = 1.25;
  std::uint64_t seed = 1;
  SamplerMode mode = SamplerMode::dynamic;
  double fixed_rate = 1.0;
};

void validate_sampler(const SamplerConfig& config);

/// Draw one sampling rate, advancing the rng stream.
double draw_rate(const SamplerConfig& config, std::mt19937_64& rng);

/// Number of samples on a chord of length `t_span` (in units of `pitch`):
/// floor(Ns * t_span / pitch).
int sample_count(double t_span, double ns_rate, double pitch = 1.0);

/// Midpoint sample positions along the chord: t = t_near + (i - 1/2)/Ns * pitch
/// for i = 1..floor(Ns*(t_far-t_near)/pitch). In pitch units the spacing is
/// exactly 1/Ns. The count-0 case is the caller's to escalate; see
/// draw_rate_for_ray.
std::vector<Eigen::Vector2d> sample_positions(const Ray& ray, double ns_rate,
                                              double pitch = 1.0);

/// Parameter values (not points) of the same sample ladder.
std::vector<double> sample_parameters(const Ray& ray, double ns_rate, double pitch = 1.0);

/// Draw a rate that yields at least one sample on this ray: redraw from
/// [1.0, rate_max] when floor(Ns * span) == 0, with a deterministic clamp for
/// chords shorter than a voxel step.
double draw_rate_for_ray(const SamplerConfig& config, const Ray& ray, double pitch,
                         std::mt19937_64& rng);

} // namespace nexf
