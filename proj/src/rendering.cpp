#include "nexf/rendering.hpp"

#include "nexf/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

namespace nexf {

void validate_render_params(const RenderParams& params) {
  if (!(params.scale_s > 0.0))
    throw RenderError("render scale S must be positive");
  if (!std::isfinite(params.bias_c))
    throw RenderError("render bias C must be finite");
}

double trilinear(const Volume& volume, const Eigen::Vector3d& position) {
  double w[3][2];
  int lo[3], hi[3];
  for (int axis = 0; axis < 3; ++axis) {
    const int n = volume.dims[axis];
    // voxel-center grid coordinate; clamping covers positions outside [-1,1]
    double g = (position[axis] + 1.0) * 0.5 * n - 0.5;
    g = std::clamp(g, 0.0, static_cast<double>(n - 1));
    lo[axis] = static_cast<int>(std::floor(g));
    hi[axis] = std::min(lo[axis] + 1, n - 1);
    const double frac = g - lo[axis];
    w[axis][0] = 1.0 - frac;
    w[axis][1] = frac;
  }
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double weight = w[0][dx] * w[1][dy] * w[2][dz];
        if (weight == 0.0)
          continue;
        acc += weight * volume.at(dx ? hi[0] : lo[0], dy ? hi[1] : lo[1], dz ? hi[2] : lo[2]);
      }
  return acc;
}

ProjectionImage project_volume(const Volume& volume, std::span<const Ray> rays,
                               double ns_rate, const RenderParams& params, int threads) {
  validate_volume(volume);
  validate_render_params(params);
  if (rays.empty())
    throw RenderError("projection needs at least one ray");
  if (!(ns_rate > 0.0))
    throw RenderError("projection sampling rate must be positive");

  ProjectionImage image;
  image.width = static_cast<int>(rays.size());
  image.height = volume.nz();
  image.pixels.assign(static_cast<std::size_t>(image.width) * image.height, 0.0);

  const double pitch = voxel_pitch(volume);
  const auto render_column = [&](int x) {
    const Ray& ray = rays[static_cast<std::size_t>(x)];
    const auto positions = sample_positions(ray, ns_rate, pitch);
    if (positions.empty())
      throw RenderError("ray chord too short for the requested sampling rate");
    std::vector<double> row_samples(positions.size());
    for (int y = 0; y < image.height; ++y) {
      const double zc = voxel_center_coord(y, volume.nz());
      for (std::size_t i = 0; i < positions.size(); ++i)
        row_samples[i] = trilinear(volume, {positions[i].x(), positions[i].y(), zc});
      const std::span<const double> samples(row_samples);
      image.at(x, y) = params.law == RenderLaw::soft
                           ? render_soft(samples, ns_rate, params)
                           : render_beer_lambert(samples, 1.0 / ns_rate, params);
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || image.width == 1) {
    for (int x = 0; x < image.width; ++x)
      render_column(x);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int x = t; x < image.width; x += threads)
            render_column(x);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    for (auto& th : pool)
      th.join();
    for (const auto& err : errors)
      if (err)
        std::rethrow_exception(err);
  }
  return image;
}

namespace {

Volume image_as_volume(const ProjectionImage& image) {
  Volume carrier = make_volume({image.width, image.height, 1});
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    carrier.data[i] = static_cast<float>(image.pixels[i]);
  return carrier;
}

} // namespace

void save_projection_raw(const ProjectionImage& image, const std::filesystem::path& path) {
  save_volume(image_as_volume(image), path);
}

ProjectionImage load_projection_raw(const std::filesystem::path& path) {
  const Volume carrier = load_volume(path);
  if (carrier.nz() != 1)
    throw RenderError("projection file must have nz = 1: " + path.string());
  ProjectionImage image;
  image.width = carrier.nx();
  image.height = carrier.ny();
  image.pixels.assign(carrier.data.begin(), carrier.data.end());
  return image;
}

void save_projection_pgm(const ProjectionImage& image, const std::filesystem::path& path) {
  if (image.pixels.empty())
    throw RenderError("cannot save an empty projection");
  const auto [lo_it, hi_it] = std::minmax_element(image.pixels.begin(), image.pixels.end());
  const double lo = *lo_it, hi = *hi_it;
  const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw RenderError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  for (double v : image.pixels) {
    const auto q = static_cast<unsigned>(std::lround((v - lo) * scale));
    const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                    static_cast<unsigned char>(q & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
  if (!out)
    throw RenderError("short write to " + path.string());

  std::ofstream sidecar(path.string() + ".scale.txt");
  sidecar.precision(17);
  sidecar << "min: " << lo << "\nmax: " << hi << "\n";
}

} // namespace nexf
