#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

namespace nexf {

struct EncodingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Frequency positional encoder: raw coordinates (optional) followed, per
/// coordinate, by [sin(2^k pi p), cos(2^k pi p)] for k = 0..L-1.
struct EncoderConfig {
  int num_frequencies = 32;
  bool include_input = true;
  int input_dim = 2; // 2 for the multi-head field, 3 for the single-head ablation

  int output_dim() const {
    return input_dim * (2 * num_frequencies + (include_input ? 1 : 0));
  }
};

inline void validate_encoder(const EncoderConfig& config) {
  if (config.num_frequencies < 1)
    throw EncodingError("encoder needs at least one frequency band");
  if (config.input_dim != 2 && config.input_dim != 3)
    throw EncodingError("encoder input dimension must be 2 or 3");
}

/// sin/cos of 2^k pi p with exact dyadic range reduction: 2^k * p is an exact
/// scaling, so reducing it mod 2 before multiplying by pi avoids the huge-
/// argument cancellation a naive sin(2^k*pi*p) suffers at large k.
inline void frequency_pair(double p, int k, double& s, double& c) {
  const double reduced = std::fmod(std::ldexp(p, k), 2.0);
  const double arg = std::numbers::pi * reduced;
  s = std::sin(arg);
  c = std::cos(arg);
}

/// Encode one position into `out` (length config.output_dim()). Coordinates
/// must lie in [-1,1] up to 1e-6.
template <class T>
void encode_into(const EncoderConfig& config, std::span<const double> position,
                 std::span<T> out) {
  if (static_cast<int>(position.size()) != config.input_dim)
    throw EncodingError("position dimension does not match the encoder");
  if (static_cast<int>(out.size()) != config.output_dim())
    throw EncodingError("encoder output span has the wrong length");
  for (double p : position)
    if (!(std::abs(p) <= 1.0 + 1e-6))
      throw EncodingError("coordinate outside [-1,1]");

  std::size_t j = 0;
  if (config.include_input)
    for (double p : position)
      out[j++] = static_cast<T>(p);
  for (double p : position)
    for (int k = 0; k < config.num_frequencies; ++k) {
      double s, c;
      frequency_pair(p, k, s, c);
      out[j++] = static_cast<T>(s);
      out[j++] = static_cast<T>(c);
    }
}

template <class T>
Eigen::VectorX<T> encode(const EncoderConfig& config, std::span<const double> position) {
  validate_encoder(config);
  Eigen::VectorX<T> out(config.output_dim());
  encode_into<T>(config, position, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

} // namespace nexf
