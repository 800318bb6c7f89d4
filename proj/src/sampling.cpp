#include "nexf/sampling.hpp"

#include <cmath>

namespace nexf {

void validate_sampler(const SamplerConfig& config) {
  if (!(config.rate_min > 0.0) || !(config.rate_min <= config.rate_max))
    throw SamplingError("sampler requires 0 < rate_min <= rate_max");
  if (!(config.fixed_rate > 0.0))
    throw SamplingError("fixed sampling rate must be positive");
}

double draw_rate(const SamplerConfig& config, std::mt19937_64& rng) {
  validate_sampler(config);
  if (config.mode == SamplerMode::fixed)
    return config.fixed_rate;
  std::uniform_real_distribution<double> dist(config.rate_min, config.rate_max);
  return dist(rng);
}

int sample_count(double t_span, double ns_rate, double pitch) {
  if (!(ns_rate > 0.0))
    throw SamplingError("sampling rate must be positive");
  if (!(t_span > 0.0))
    throw SamplingError("sample interval is empty");
  return static_cast<int>(std::floor(ns_rate * t_span / pitch));
}

std::vector<double> sample_parameters(const Ray& ray, double ns_rate, double pitch) {
  const int count = sample_count(ray.chord_length(), ns_rate, pitch);
  std::vector<double> params;
  params.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 1; i <= count; ++i)
    params.push_back(ray.t_near + (i - 0.5) / ns_rate * pitch);
  return params;
}

std::vector<Eigen::Vector2d> sample_positions(const Ray& ray, double ns_rate, double pitch) {
  std::vector<Eigen::Vector2d> positions;
  for (double t : sample_parameters(ray, ns_rate, pitch))
    positions.push_back(ray.point_at(t));
  return positions;
}

double draw_rate_for_ray(const SamplerConfig& config, const Ray& ray, double pitch,
                         std::mt19937_64& rng) {
  double rate = draw_rate(config, rng);
  const double span = ray.chord_length();
  if (sample_count(span, rate, pitch) >= 1)
    return rate;

  SamplerConfig escalated = config;
  escalated.mode = SamplerMode::dynamic;
  escalated.rate_min = std::max(1.0, config.rate_min);
  escalated.rate_max = std::max(escalated.rate_min, config.rate_max);
  for (int attempt = 0; attempt < 8; ++attempt) {
    rate = draw_rate(escalated, rng);
    if (sample_count(span, rate, pitch) >= 1)
      return rate;
  }
  // Chord shorter than a voxel step even at rate_max: force two samples.
  return 2.0 / span * pitch;
}

} // namespace nexf
