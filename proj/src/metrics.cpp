#include "nexf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace nexf {
namespace {

constexpr int kWindow = 7;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

void require_same_dims(const Volume& a, const Volume& b) {
  if (a.dims != b.dims)
    throw MetricError("volumes have different dims");
}

std::string format_metric(double v) {
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

} // namespace

double psnr(const Volume& a, const Volume& b, double data_range) {
  require_same_dims(a, b);
  if (!(data_range > 0.0))
    throw MetricError("psnr needs a positive data range");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double psnr_masked(const Volume& a, const Volume& b, double data_range,
                   const std::vector<std::uint8_t>& mask) {
  require_same_dims(a, b);
  if (mask.size() != a.data.size())
    throw MetricError("mask length does not match the volume");
  if (!(data_range > 0.0))
    throw MetricError("psnr needs a positive data range");
  double mse = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (!mask[i])
      continue;
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    mse += d * d;
    ++n;
  }
  if (n == 0)
    throw MetricError("mask selects no voxels");
  mse /= static_cast<double>(n);
  if (mse == 0.0)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const Volume& a, const Volume& b, double data_range, int threads) {
  require_same_dims(a, b);
  if (!(data_range > 0.0))
    throw MetricError("ssim needs a positive data range");
  if (a.nx() < kWindow || a.ny() < kWindow || a.nz() < kWindow)
    throw MetricError("volume smaller than the 7x7x7 ssim window");

  const double c1 = (kK1 * data_range) * (kK1 * data_range);
  const double c2 = (kK2 * data_range) * (kK2 * data_range);
  constexpr double n = kWindow * kWindow * kWindow;
  const double cov_norm = n / (n - 1.0); // unbiased

  const int ox = a.nx() - kWindow + 1;
  const int oy = a.ny() - kWindow + 1;
  const int oz = a.nz() - kWindow + 1;

  // One partial sum per z origin so the reduction order is fixed regardless
  // of the thread count.
  std::vector<double> slab_sums(static_cast<std::size_t>(oz), 0.0);
  const auto slab = [&](int z0) {
    double acc = 0.0;
    for (int y0 = 0; y0 < oy; ++y0)
      for (int x0 = 0; x0 < ox; ++x0) {
        double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
        for (int dz = 0; dz < kWindow; ++dz)
          for (int dy = 0; dy < kWindow; ++dy)
            for (int dx = 0; dx < kWindow; ++dx) {
              const double va = a.at(x0 + dx, y0 + dy, z0 + dz);
              const double vb = b.at(x0 + dx, y0 + dy, z0 + dz);
              sa += va;
              sb += vb;
              saa += va * va;
              sbb += vb * vb;
              sab += va * vb;
            }
        const double ma = sa / n, mb = sb / n;
        const double var_a = cov_norm * (saa / n - ma * ma);
        const double var_b = cov_norm * (sbb / n - mb * mb);
        const double cov = cov_norm * (sab / n - ma * mb);
        acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      }
    slab_sums[static_cast<std::size_t>(z0)] = acc;
  };

  threads = std::max(1, threads);
  if (threads == 1 || oz == 1) {
    for (int z0 = 0; z0 < oz; ++z0)
      slab(z0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int z0 = t; z0 < oz; z0 += threads)
          slab(z0);
      });
    for (auto& th : pool)
      th.join();
  }

  double total = 0.0;
  for (double s : slab_sums)
    total += s;
  return total / (static_cast<double>(ox) * oy * oz);
}

double dice(const Volume& a, const Volume& b, double threshold) {
  require_same_dims(a, b);
  std::size_t in_a = 0, in_b = 0, in_both = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool ma = a.data[i] > threshold;
    const bool mb = b.data[i] > threshold;
    in_a += ma;
    in_b += mb;
    in_both += ma && mb;
  }
  if (in_a + in_b == 0)
    return 1.0;
  return 2.0 * static_cast<double>(in_both) / static_cast<double>(in_a + in_b);
}

double overall_score(double psnr_db, double ssim_value, double dice_value) {
  const double capped = std::min(psnr_db, 40.0);
  return (capped / 40.0 * 100.0 + ssim_value * 100.0 + dice_value * 100.0) / 3.0;
}

MetricReport evaluate_volumes(const Volume& reconstruction, const Volume& ground_truth,
                              double dice_threshold, int threads) {
  require_same_dims(reconstruction, ground_truth);
  const auto [lo, hi] =
      std::minmax_element(ground_truth.data.begin(), ground_truth.data.end());
  double range = static_cast<double>(*hi) - static_cast<double>(*lo);
  if (range <= 0.0)
    range = 1.0; // constant ground truth; any positive range is as good

  MetricReport report;
  report.data_range = range;
  report.dice_threshold = dice_threshold;
  report.psnr_db = psnr(reconstruction, ground_truth, range);
  report.ssim = ssim(reconstruction, ground_truth, range, threads);
  report.dice = dice(reconstruction, ground_truth, dice_threshold);
  report.overall = overall_score(report.psnr_db, report.ssim, report.dice);
  return report;
}

void save_report(const MetricReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw MetricError("cannot open " + path.string() + " for writing");
  out << "psnr_db: " << format_metric(report.psnr_db) << '\n'
      << "ssim: " << format_metric(report.ssim) << '\n'
      << "dice: " << format_metric(report.dice) << '\n'
      << "overall: " << format_metric(report.overall) << '\n'
      << "dice_threshold: " << format_metric(report.dice_threshold) << '\n'
      << "data_range: " << format_metric(report.data_range) << '\n';
}

std::string report_csv_header() {
  return "label,psnr_db,ssim,dice,overall,dice_threshold,data_range";
}

std::string report_csv_row(const MetricReport& report, const std::string& label) {
  std::ostringstream out;
  out << label << ',' << format_metric(report.psnr_db) << ',' << format_metric(report.ssim)
      << ',' << format_metric(report.dice) << ',' << format_metric(report.overall) << ','
      << format_metric(report.dice_threshold) << ',' << format_metric(report.data_range);
  return out.str();
}

} // namespace nexf
