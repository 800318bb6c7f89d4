#include "nexf/rendering.hpp"

#include "nexf/sampling.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace nexf;
using std::numbers::pi;

TEST_CASE("constant field at C renders S*log(N/Ns)") {
  RenderParams params;
  for (int n : {1, 3, 17}) {
    for (double ns : {0.5, 1.0, 2.0}) {
      const std::vector<double> samples(static_cast<std::size_t>(n), params.bias_c);
      const double out = render_soft<double>(samples, ns, params);
      CHECK(out == doctest::Approx(params.scale_s * std::log(n / ns)).epsilon(1e-12));
    }
  }
  // N = 1, Ns = 1: exactly zero
  const std::vector<double> one{1000.0};
  CHECK(render_soft<double>(one, 1.0, RenderParams{}) == 0.0);
}

TEST_CASE("single sample C+S renders exactly S") {
  RenderParams params; // C = 1000, S = 1200
  const std::vector<double> samples{params.bias_c + params.scale_s};
  CHECK(render_soft<double>(samples, 1.0, params) == 1200.0);
}

TEST_CASE("discrete soft render matches adaptive quadrature of the continuous law") {
  RenderParams params;
  const auto profile = [&](double t) { return params.bias_c + params.scale_s * std::sin(t); };
  const double continuous = oracle::continuous_soft_render(profile, 0.0, pi, params);

  Ray ray;
  ray.origin = {0.0, 0.0};
  ray.direction = {1.0, 0.0};
  ray.t_near = 0.0;
  ray.t_far = pi;

  const auto render_at = [&](double ns) {
    const auto ts = sample_parameters(ray, ns);
    std::vector<double> samples;
    for (double t : ts)
      samples.push_back(profile(t));
    return render_soft<double>(samples, ns, params);
  };

  CHECK(std::abs(render_at(64.0) - continuous) / std::abs(continuous) < 0.005);
  // adaptive-rendering consistency across rates
  CHECK(std::abs(render_at(1.0) - render_at(8.0)) / std::abs(render_at(8.0)) < 0.01);
}

TEST_CASE("beer-lambert identities") {
  RenderParams params;
  params.law = RenderLaw::beer_lambert;
  const std::vector<double> air(5, -1000.0);
  CHECK(render_beer_lambert<double>(air, 1.0, params) == 0.0);

  const std::vector<double> bone{1000.0};
  CHECK(render_beer_lambert<double>(bone, 1.0, params) == 1.0);
  CHECK(render_beer_lambert<double>(bone, 2.0, params) ==
        2.0 * render_beer_lambert<double>(bone, 1.0, params));
}

TEST_CASE("render_soft is monotone in every sample") {
  RenderParams params;
  std::vector<double> samples{200.0, 900.0, 1500.0};
  const double base = render_soft<double>(samples, 1.0, params);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto bumped = samples;
    bumped[i] += 50.0;
    CHECK(render_soft<double>(bumped, 1.0, params) > base);
  }
}

TEST_CASE("render_soft is shift covariant") {
  RenderParams params;
  const std::vector<double> samples{-400.0, 250.0, 1900.0, 2200.0};
  const double base = render_soft<double>(samples, 0.75, params);
  for (double delta : {-600.0, 123.456, 2400.0}) {
    std::vector<double> shifted = samples;
    for (double& v : shifted)
      v += delta;
    CHECK(render_soft<double>(shifted, 0.75, params) ==
          doctest::Approx(base + delta).epsilon(1e-9));
  }
}

TEST_CASE("render_soft stays finite for extreme finite samples") {
  RenderParams params;
  const std::vector<double> extreme{-1e9, 1e9, 0.0};
  CHECK(std::isfinite(render_soft<double>(extreme, 1.0, params)));
  const std::vector<float> extreme_f{-1e7f, 1e7f};
  CHECK(std::isfinite(render_soft<float>(extreme_f, 1.0f, params)));
}

TEST_CASE("empty sample lists are rejected") {
  RenderParams params;
  const std::vector<double> none;
  CHECK_THROWS_AS(render_soft<double>(none, 1.0, params), RenderError);
  CHECK_THROWS_AS(render_beer_lambert<double>(none, 1.0, params), RenderError);
}

TEST_CASE("trilinear is exact at voxel centers and linear between") {
  Volume v = make_volume({4, 4, 4});
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> dist(-1000.0f, 2000.0f);
  for (auto& f : v.data)
    f = dist(rng);

  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        const Eigen::Vector3d p{voxel_center_coord(x, 4), voxel_center_coord(y, 4),
                                voxel_center_coord(z, 4)};
        CHECK(trilinear(v, p) == doctest::Approx(v.at(x, y, z)).epsilon(1e-12));
      }

  // midpoint between two x-neighbors averages them (double the operands
  // first; float addition would round differently)
  const Eigen::Vector3d mid{0.5 * (voxel_center_coord(1, 4) + voxel_center_coord(2, 4)),
                            voxel_center_coord(2, 4), voxel_center_coord(3, 4)};
  const double mean =
      0.5 * (static_cast<double>(v.at(1, 2, 3)) + static_cast<double>(v.at(2, 2, 3)));
  CHECK(std::abs(trilinear(v, mid) - mean) < 1e-9);
}

TEST_CASE("trilinear matches the corner-weight oracle at random positions") {
  Volume v = make_volume({4, 4, 4});
  std::mt19937 rng(12);
  std::uniform_real_distribution<float> dist(-1000.0f, 2000.0f);
  for (auto& f : v.data)
    f = dist(rng);

  std::uniform_real_distribution<double> unit(-1.2, 1.2); // beyond the box: clamped
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d p{unit(rng), unit(rng), unit(rng)};
    CHECK(trilinear(v, p) == doctest::Approx(oracle::trilinear_corners(v, p)).epsilon(1e-6));
  }
}

TEST_CASE("projection of a constant volume hits the closed form") {
  const double c = 1000.0;
  Volume v = make_volume({16, 16, 4}, {1, 1, 1}, static_cast<float>(c));
  FocalCurve curve;
  const auto rays = generate_rays(curve, 8);
  RenderParams params;
  const double ns = 2.0;
  const ProjectionImage image = project_volume(v, rays, ns, params);
  REQUIRE(image.width == 8);
  REQUIRE(image.height == 4);
  const double pitch = voxel_pitch(v);
  for (int x = 0; x < image.width; ++x) {
    const int n = sample_count(rays[static_cast<std::size_t>(x)].chord_length(), ns, pitch);
    for (int y = 0; y < image.height; ++y)
      CHECK(image.at(x, y) == doctest::Approx(params.scale_s * std::log(n / ns)).epsilon(1e-9));
  }
}

TEST_CASE("projection matches a scalar per-sample re-implementation") {
  Volume v = make_volume({16, 16, 4});
  std::mt19937 rng(13);
  std::uniform_real_distribution<float> dist(-1000.0f, 2400.0f);
  for (auto& f : v.data)
    f = dist(rng);

  FocalCurve curve;
  const auto rays = generate_rays(curve, 8);
  RenderParams params;
  const double ns = 4.0;
  const ProjectionImage image = project_volume(v, rays, ns, params);

  const double pitch = voxel_pitch(v);
  for (int x = 0; x < image.width; ++x) {
    const Ray& ray = rays[static_cast<std::size_t>(x)];
    const int count = static_cast<int>(std::floor(ns * (ray.t_far - ray.t_near) / pitch));
    for (int y = 0; y < image.height; ++y) {
      // scalar loop, no shared helpers beyond trilinear's oracle
      std::vector<double> samples;
      for (int i = 1; i <= count; ++i) {
        const double t = ray.t_near + (i - 0.5) / ns * pitch;
        const Eigen::Vector3d p{ray.origin.x() + t * ray.direction.x(),
                                ray.origin.y() + t * ray.direction.y(),
                                voxel_center_coord(y, v.nz())};
        samples.push_back(oracle::trilinear_corners(v, p));
      }
      double peak = samples[0];
      for (double s : samples)
        peak = std::max(peak, s);
      double acc = 0.0;
      for (double s : samples)
        acc += std::exp((s - params.bias_c) / params.scale_s -
                        (peak - params.bias_c) / params.scale_s);
      const double expected =
          params.scale_s *
          ((peak - params.bias_c) / params.scale_s + std::log(acc) - std::log(ns));
      CHECK(image.at(x, y) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("projection is identical across thread counts") {
  Volume v = make_volume({16, 16, 4});
  std::mt19937 rng(14);
  std::uniform_real_distribution<float> dist(-500.0f, 2000.0f);
  for (auto& f : v.data)
    f = dist(rng);
  FocalCurve curve;
  const auto rays = generate_rays(curve, 24);
  RenderParams params;
  const ProjectionImage a = project_volume(v, rays, 2.0, params, 1);
  const ProjectionImage b = project_volume(v, rays, 2.0, params, 2);
  CHECK(a.pixels == b.pixels);
}

TEST_CASE("projection raw file round-trips; pgm and sidecar are written") {
  ProjectionImage image;
  image.width = 3;
  image.height = 2;
  image.pixels = {0.0, 1.5, -2.25, 10.0, 4.0, 8.5};

  const auto dir = std::filesystem::temp_directory_path() / "nexf_tests";
  std::filesystem::create_directories(dir);
  const auto raw = dir / "proj.nxi";
  save_projection_raw(image, raw);
  const ProjectionImage loaded = load_projection_raw(raw);
  CHECK(loaded.width == 3);
  CHECK(loaded.height == 2);
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    CHECK(loaded.pixels[i] == doctest::Approx(image.pixels[i]));

  const auto pgm = dir / "proj.pgm";
  save_projection_pgm(image, pgm);
  CHECK(std::filesystem::exists(pgm));
  CHECK(std::filesystem::exists(dir / "proj.pgm.scale.txt"));
  CHECK(std::filesystem::file_size(pgm) > 12); // header + 12 payload bytes
}
