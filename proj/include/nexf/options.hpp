#pragma once

#include "nexf/config.hpp"
#include "nexf/phantom.hpp"
#include "nexf/rendering.hpp"
#include "nexf/training.hpp"

#include <string>
#include <vector>

namespace nexf {

/// Resolved pipeline parameters: every knob of every stage, with defaults at
/// the reference (paper-scale) values. Built from a Config; unknown keys are
/// rejected with their line number.
struct Options {
  // phantom
  Eigen::Vector3i dims{288, 256, 160};
  PhantomSpec phantom;

  // projection simulation
  int segments = 576;
  std::vector<double> angles;   // empty = single normal ray per segment
  double simulate_rate = 2.0;   // Ns used for ground-truth rendering
  RenderLaw simulate_law = RenderLaw::soft;

  // training (includes sampler, render, encoder, model shape, ablation)
  TrainConfig train;
  bool use_double = true; // train.precision = f64 | f32

  std::uint64_t seed = 1;
  int threads = 1;

  double dice_threshold = 1000.0;

  static Options from_config(Config& config);
  static Options from_file(const std::filesystem::path& path);

  /// Everything, resolved, as sorted "section.key = value" lines (manifest echo).
  std::vector<std::pair<std::string, std::string>> echo() const;

  std::vector<Ray> make_rays() const;
};

} // namespace nexf
