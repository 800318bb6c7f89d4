#include "nexf/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

using namespace nexf;

namespace {

Volume random_volume(const Eigen::Vector3i& dims, unsigned seed, float lo = -1000.0f,
                     float hi = 2400.0f) {
  Volume v = make_volume(dims);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  for (auto& f : v.data)
    f = dist(rng);
  return v;
}

} // namespace

TEST_CASE("psnr identities and closed forms") {
  const Volume a = random_volume({6, 5, 4}, 1);
  CHECK(std::isinf(psnr(a, a, 1000.0)));

  Volume c0 = make_volume({4, 4, 4}, {1, 1, 1}, 0.0f);
  Volume c1 = make_volume({4, 4, 4}, {1, 1, 1}, 100.0f); // differ by range/10
  CHECK(psnr(c0, c1, 1000.0) == 20.0);

  const Volume b = random_volume({6, 5, 4}, 2);
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    mse += (static_cast<double>(a.data[i]) - b.data[i]) *
           (static_cast<double>(a.data[i]) - b.data[i]);
  mse /= static_cast<double>(a.data.size());
  CHECK(psnr(a, b, 3400.0) ==
        doctest::Approx(10.0 * std::log10(3400.0 * 3400.0 / mse)).epsilon(1e-9));
  CHECK(psnr(a, b, 3400.0) == psnr(b, a, 3400.0)); // symmetric

  Volume wrong = make_volume({6, 5, 5});
  CHECK_THROWS_AS(psnr(a, wrong, 1000.0), MetricError);
  CHECK_THROWS_AS(psnr(a, b, 0.0), MetricError);
}

TEST_CASE("masked psnr uses only selected voxels") {
  const Volume a = random_volume({4, 4, 4}, 3);
  Volume b = a;
  // corrupt exactly one voxel outside the mask and one inside
  b.data[0] += 500.0f;
  b.data[10] += 100.0f;
  std::vector<std::uint8_t> mask(a.data.size(), 0);
  mask[10] = 1;
  mask[11] = 1;
  // += 100 in float is inexact at this magnitude, hence the loose tolerance
  const double expected = 10.0 * std::log10(1000.0 * 1000.0 / (100.0 * 100.0 / 2.0));
  CHECK(psnr_masked(a, b, 1000.0, mask) == doctest::Approx(expected).epsilon(1e-5));
  CHECK_THROWS_AS(psnr_masked(a, b, 1000.0, std::vector<std::uint8_t>(3, 1)), MetricError);
}

TEST_CASE("ssim is exactly one on identical volumes") {
  const Volume a = random_volume({9, 9, 9}, 4);
  CHECK(ssim(a, a, 3400.0) == 1.0);
}

TEST_CASE("constant volumes reduce ssim to the luminance term") {
  const double range = 1000.0;
  Volume a = make_volume({8, 8, 8}, {1, 1, 1}, 200.0f);
  Volume b = make_volume({8, 8, 8}, {1, 1, 1}, 700.0f); // a + range/2
  const double c1 = (0.01 * range) * (0.01 * range);
  const double mu_a = 200.0, mu_b = 700.0;
  const double expected = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
  CHECK(ssim(a, b, range) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ssim matches the per-window oracle on a 9x9x9 pair") {
  const Volume a = random_volume({9, 9, 9}, 5);
  const Volume b = random_volume({9, 9, 9}, 6);
  const double range = 3400.0;
  const double expected = oracle::ssim_windows(a, b, range);
  CHECK(ssim(a, b, range) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(ssim(a, b, range, 2) == ssim(a, b, range, 1)); // bitwise across threads
  CHECK(ssim(a, b, range) == ssim(b, a, range));
}

TEST_CASE("volumes smaller than the window are rejected") {
  const Volume small = random_volume({6, 9, 9}, 7);
  CHECK_THROWS_AS(ssim(small, small, 100.0), MetricError);
}

TEST_CASE("dice identities") {
  Volume a = make_volume({4, 4, 4}, {1, 1, 1}, 0.0f);
  Volume b = make_volume({4, 4, 4}, {1, 1, 1}, 0.0f);
  // identical nonempty masks
  a.data[3] = a.data[7] = 2000.0f;
  b.data[3] = b.data[7] = 1500.0f;
  CHECK(dice(a, b, 1000.0) == 1.0);

  // disjoint nonempty masks
  b.data[3] = b.data[7] = 0.0f;
  b.data[9] = 2000.0f;
  CHECK(dice(a, b, 1000.0) == 0.0);

  // both empty
  Volume e0 = make_volume({4, 4, 4});
  Volume e1 = make_volume({4, 4, 4});
  CHECK(dice(e0, e1, 1000.0) == 1.0);
}

TEST_CASE("dice matches an exhaustive counting oracle") {
  const Volume a = random_volume({7, 6, 5}, 8, 0.0f, 2000.0f);
  const Volume b = random_volume({7, 6, 5}, 9, 0.0f, 2000.0f);
  const double threshold = 1000.0;
  std::size_t na = 0, nb = 0, nboth = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool ma = a.data[i] > threshold;
    const bool mb = b.data[i] > threshold;
    na += ma;
    nb += mb;
    nboth += ma && mb;
  }
  CHECK(dice(a, b, threshold) ==
        doctest::Approx(2.0 * nboth / static_cast<double>(na + nb)).epsilon(1e-12));
  CHECK(dice(a, b, threshold) == dice(b, a, threshold));
  CHECK(dice(a, b, threshold) >= 0.0);
  CHECK(dice(a, b, threshold) <= 1.0);
}

TEST_CASE("overall score closed forms and monotonicity") {
  CHECK(overall_score(40.0, 1.0, 1.0) == 100.0);
  CHECK(overall_score(20.0, 0.5, 0.5) == 50.0);
  // psnr capped at 40
  CHECK(overall_score(55.0, 1.0, 1.0) == 100.0);
  CHECK(overall_score(std::numeric_limits<double>::infinity(), 1.0, 1.0) == 100.0);

  std::mt19937 rng(10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double p = unit(rng) * 39.0, s = unit(rng), d = unit(rng);
    const double base = overall_score(p, s, d);
    CHECK(overall_score(p + 0.5, s, d) > base);
    CHECK(overall_score(p, std::min(1.0, s + 0.01), d) >= base);
    CHECK(overall_score(p, s, std::min(1.0, d + 0.01)) >= base);
  }
}

TEST_CASE("evaluate_volumes fills a complete report and serializes it") {
  const Volume gt = random_volume({12, 11, 10}, 11);
  const Volume recon = random_volume({12, 11, 10}, 12);
  const MetricReport report = evaluate_volumes(recon, gt, 1000.0);
  CHECK(std::isfinite(report.psnr_db));
  CHECK(report.ssim >= -1.0);
  CHECK(report.ssim <= 1.0);
  CHECK(report.dice >= 0.0);
  CHECK(report.dice <= 1.0);
  CHECK(report.data_range > 0.0);

  const auto dir = std::filesystem::temp_directory_path() / "nexf_tests";
  std::filesystem::create_directories(dir);
  save_report(report, dir / "report.txt");
  std::ifstream in(dir / "report.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("psnr_db: ") != std::string::npos);
  CHECK(text.find("overall: ") != std::string::npos);

  MetricReport perfect = evaluate_volumes(gt, gt, 1000.0);
  save_report(perfect, dir / "perfect.txt");
  std::ifstream pin(dir / "perfect.txt");
  std::string ptext((std::istreambuf_iterator<char>(pin)), std::istreambuf_iterator<char>());
  CHECK(ptext.find("psnr_db: inf") != std::string::npos);

  CHECK(report_csv_header().find("psnr_db") != std::string::npos);
  const std::string row = report_csv_row(report, "baseline");
  CHECK(row.rfind("baseline,", 0) == 0);
}
