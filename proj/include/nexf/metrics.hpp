#pragma once

#include "nexf/volume.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nexf {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Volume-to-volume evaluation. psnr is +inf for identical inputs and is
/// serialized as "inf".
struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double dice = 0.0;
  double overall = 0.0;
  double dice_threshold = 1000.0;
  double data_range = 0.0;
};

/// 10*log10(range^2 / MSE); +inf when the volumes are identical.
double psnr(const Volume& a, const Volume& b, double data_range);

/// PSNR restricted to voxels where mask is nonzero (mask length = volume size).
double psnr_masked(const Volume& a, const Volume& b, double data_range,
                   const std::vector<std::uint8_t>& mask);

/// Mean local SSIM over all full 7x7x7 windows, uniform weighting, k1 = 0.01,
/// k2 = 0.03, unbiased (co)variance. Both dims must be at least the window.
double ssim(const Volume& a, const Volume& b, double data_range, int threads = 1);

/// Dice overlap of the masks {value > threshold}; 1.0 when both are empty.
double dice(const Volume& a, const Volume& b, double threshold);

/// Percentage-scaled mean of the three metrics with PSNR capped at 40 dB:
/// (psnr/40*100 + ssim*100 + dice*100) / 3. A local convention used
/// consistently across this project's comparisons.
double overall_score(double psnr_db, double ssim_value, double dice_value);

/// Full report with data_range = max - min of the ground truth volume.
MetricReport evaluate_volumes(const Volume& reconstruction, const Volume& ground_truth,
                              double dice_threshold = 1000.0, int threads = 1);

void save_report(const MetricReport& report, const std::filesystem::path& path);
std::string report_csv_header();
std::string report_csv_row(const MetricReport& report, const std::string& label);

} // namespace nexf
