// nexf: phantom generation, panoramic projection simulation, neural-field
// training, reconstruction, and evaluation, wired by flat config files.

#include "nexf/manifest.hpp"
#include "nexf/metrics.hpp"
#include "nexf/options.hpp"
#include "nexf/phantom.hpp"
#include "nexf/rendering.hpp"
#include "nexf/training.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace nexf;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long seed = -1;
  int threads = 0;
  std::string dims;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Config file (flat key = value)");
  cmd->add_option("--out-dir", args.out_dir, "Output directory (default $NEXF_OUT_DIR or .)");
  cmd->add_option("--seed", args.seed, "Override run.seed");
  cmd->add_option("--threads", args.threads, "Override run.threads");
}

std::filesystem::path resolve_out_dir(const CommonArgs& args) {
  std::filesystem::path dir;
  if (!args.out_dir.empty())
    dir = args.out_dir;
  else if (const char* env = std::getenv("NEXF_OUT_DIR"); env && *env)
    dir = env;
  else
    dir = ".";
  std::filesystem::create_directories(dir);
  return dir;
}

Config base_config(const CommonArgs& args) {
  Config config = args.config_path.empty() ? Config::parse_string("")
                                           : Config::parse_file(args.config_path);
  if (args.seed >= 0)
    config.set("run.seed", std::to_string(args.seed));
  if (args.threads > 0)
    config.set("run.threads", std::to_string(args.threads));
  if (!args.dims.empty())
    config.set("phantom.dims", args.dims);
  return config;
}

Options load_options(const CommonArgs& args) {
  Config config = base_config(args);
  return Options::from_config(config);
}

void write_loss_csv(const std::vector<LossRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "iteration,loss,lr\n";
  out.precision(12);
  for (const auto& record : history)
    out << record.iteration << ',' << record.loss << ',' << record.lr << '\n';
}

ProjectionImage simulate_image(const Options& options, const Volume& volume, RenderLaw law) {
  RenderParams params = options.train.render;
  params.law = law;
  const auto rays = options.make_rays();
  return project_volume(volume, rays, options.simulate_rate, params, options.threads);
}

struct TrainArtifacts {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
};

// Shared by `train` and `ablate`: run the optimizer at the configured
// precision and write checkpoint + loss history.
TrainArtifacts run_training(const Options& options, const Volume& volume,
                            const ProjectionImage& gt, const std::filesystem::path& dir) {
  const auto rays = options.make_rays();
  std::filesystem::create_directories(dir);
  TrainArtifacts artifacts{dir / "checkpoint.nxc", dir / "loss.csv"};

  const auto intermediate = [&](int iteration, const auto& model) {
    save_checkpoint(model, dir / ("checkpoint_" + std::to_string(iteration) + ".nxc"));
  };

  if (options.use_double) {
    const auto result = train<double>(volume, rays, gt, options.train, intermediate);
    save_checkpoint(result.model, artifacts.checkpoint);
    write_loss_csv(result.history, artifacts.loss_csv);
  } else {
    const auto result = train<float>(volume, rays, gt, options.train, intermediate);
    save_checkpoint(result.model, artifacts.checkpoint);
    write_loss_csv(result.history, artifacts.loss_csv);
  }
  return artifacts;
}

Volume reconstruct_checkpoint(const std::filesystem::path& checkpoint,
                              const Eigen::Vector3i& dims, int threads) {
  const auto model = load_checkpoint<double>(checkpoint);
  return reconstruct(model, dims, threads);
}

int cmd_phantom(const CommonArgs& args) {
  const Options options = load_options(args);
  const auto dir = resolve_out_dir(args);
  const Volume volume = generate_phantom(options.phantom, options.dims);
  const auto out = dir / "phantom.nxv";
  save_volume(volume, out);

  RunManifest manifest{"phantom", options, {}, {}};
  manifest.add_output(out);
  manifest.write(dir / "manifest.txt");
  std::cout << "phantom " << options.dims.x() << 'x' << options.dims.y() << 'x'
            << options.dims.z() << " -> " << out.string() << '\n';
  return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& volume_path, int segments,
                 double rate, const std::string& law) {
  Config config = base_config(args);
  if (segments > 0)
    config.set("simulate.segments", std::to_string(segments));
  if (rate > 0)
    config.set("simulate.rate", std::to_string(rate));
  if (!law.empty())
    config.set("simulate.law", law);
  const Options options = Options::from_config(config);

  const auto dir = resolve_out_dir(args);
  const Volume volume = load_volume(volume_path);
  const ProjectionImage image = simulate_image(options, volume, options.simulate_law);

  const auto raw = dir / "projection.nxi";
  const auto pgm = dir / "projection.pgm";
  save_projection_raw(image, raw);
  save_projection_pgm(image, pgm);

  RunManifest manifest{"simulate", options, {}, {}};
  manifest.add_input(volume_path);
  manifest.add_output(raw);
  manifest.add_output(pgm);
  manifest.write(dir / "manifest.txt");
  std::cout << "projection " << image.width << 'x' << image.height << " -> " << raw.string()
            << '\n';
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& volume_path,
              const std::string& image_path) {
  const Options options = load_options(args);
  const auto dir = resolve_out_dir(args);
  const Volume volume = load_volume(volume_path);
  const ProjectionImage gt = load_projection_raw(image_path);

  const auto artifacts = run_training(options, volume, gt, dir);

  RunManifest manifest{"train", options, {}, {}};
  manifest.add_input(volume_path);
  manifest.add_input(image_path);
  manifest.add_output(artifacts.checkpoint);
  manifest.add_output(artifacts.loss_csv);
  manifest.write(dir / "manifest.txt");
  std::cout << "checkpoint -> " << artifacts.checkpoint.string() << '\n';
  return 0;
}

int cmd_reconstruct(const CommonArgs& args, const std::string& checkpoint_path) {
  const Options options = load_options(args);
  const auto dir = resolve_out_dir(args);
  const Volume volume = reconstruct_checkpoint(checkpoint_path, options.dims, options.threads);
  const auto out = dir / "recon.nxv";
  save_volume(volume, out);

  RunManifest manifest{"reconstruct", options, {}, {}};
  manifest.add_input(checkpoint_path);
  manifest.add_output(out);
  manifest.write(dir / "manifest.txt");
  std::cout << "reconstruction -> " << out.string() << '\n';
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& recon_path,
                 const std::string& gt_path, double dice_threshold) {
  Config config = base_config(args);
  if (dice_threshold > 0)
    config.set("evaluate.dice_threshold", std::to_string(dice_threshold));
  const Options options = Options::from_config(config);

  const auto dir = resolve_out_dir(args);
  const Volume recon = load_volume(recon_path);
  const Volume gt = load_volume(gt_path);
  const MetricReport report =
      evaluate_volumes(recon, gt, options.dice_threshold, options.threads);

  const auto txt = dir / "report.txt";
  save_report(report, txt);
  const auto csv = dir / "report.csv";
  {
    std::ofstream out(csv);
    out << report_csv_header() << '\n' << report_csv_row(report, "evaluate") << '\n';
  }

  RunManifest manifest{"evaluate", options, {}, {}};
  manifest.add_input(recon_path);
  manifest.add_input(gt_path);
  manifest.add_output(txt);
  manifest.add_output(csv);
  manifest.write(dir / "manifest.txt");

  std::ifstream echo(txt);
  std::cout << echo.rdbuf();
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& which) {
  for (char c : which)
    if (c != 'M' && c != 'D' && c != 'S')
      throw ConfigError(std::string("unknown ablation letter '") + c + "' (expected M, D, S)");

  const Options base = load_options(args);
  const auto dir = resolve_out_dir(args);

  const Volume phantom = generate_phantom(base.phantom, base.dims);
  const auto phantom_path = dir / "phantom.nxv";
  save_volume(phantom, phantom_path);

  const ProjectionImage gt_soft = simulate_image(base, phantom, base.simulate_law);
  const auto projection_path = dir / "projection.nxi";
  save_projection_raw(gt_soft, projection_path);

  struct Variant {
    std::string name;
    AblationSwitches switches;
  };
  std::vector<Variant> variants{{"baseline", {}}};
  for (char c : which) {
    Variant v;
    v.name = c;
    v.switches.single_head = c == 'M';
    v.switches.fixed_sampling = c == 'D';
    v.switches.beer_lambert = c == 'S';
    variants.push_back(v);
  }

  const auto csv_path = dir / "ablation.csv";
  std::ofstream csv(csv_path);
  csv << "variant,multi_head,dynamic_sampling,soft_rendering,psnr_db,ssim,dice,overall\n";

  RunManifest manifest{"ablate", base, {}, {}};
  manifest.add_output(phantom_path);
  manifest.add_output(projection_path);

  for (const auto& variant : variants) {
    Options options = base;
    options.train.ablation = variant.switches;

    // the rendering-law ablation swaps the law across the whole pipeline,
    // ground truth included
    const ProjectionImage* gt = &gt_soft;
    ProjectionImage gt_variant;
    if (variant.switches.beer_lambert) {
      gt_variant = simulate_image(options, phantom, RenderLaw::beer_lambert);
      gt = &gt_variant;
      save_projection_raw(gt_variant, dir / "projection_beer_lambert.nxi");
    }

    const auto variant_dir = dir / variant.name;
    const auto artifacts = run_training(options, phantom, *gt, variant_dir);
    const Volume recon =
        reconstruct_checkpoint(artifacts.checkpoint, base.dims, options.threads);
    save_volume(recon, variant_dir / "recon.nxv");
    const MetricReport report =
        evaluate_volumes(recon, phantom, base.dice_threshold, options.threads);
    save_report(report, variant_dir / "report.txt");

    csv.precision(10);
    csv << variant.name << ',' << (variant.switches.single_head ? 0 : 1) << ','
        << (variant.switches.fixed_sampling ? 0 : 1) << ','
        << (variant.switches.beer_lambert ? 0 : 1) << ',' << report.psnr_db << ','
        << report.ssim << ',' << report.dice << ',' << report.overall << '\n';
    csv.flush();
    std::cout << variant.name << ": overall " << report.overall << '\n';

    manifest.add_output(variant_dir / "checkpoint.nxc");
    manifest.add_output(variant_dir / "recon.nxv");
  }
  manifest.add_output(csv_path);
  manifest.write(dir / "manifest.txt");
  std::cout << "ablation table -> " << csv_path.string() << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural X-ray field toolkit for panoramic reconstruction"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string volume_path, image_path, checkpoint_path, recon_path, gt_path;
  std::string law, which = "MDS";
  int segments = 0;
  double rate = 0.0, dice_threshold = 0.0;

  auto* phantom = app.add_subcommand("phantom", "Generate a dental-arch phantom volume");
  add_common(phantom, args);
  phantom->add_option("--dims", args.dims, "Volume dims as NXxNYxNZ");

  auto* simulate = app.add_subcommand("simulate", "Render panoramic projections of a volume");
  add_common(simulate, args);
  simulate->add_option("--volume", volume_path, "Input volume file")->required();
  simulate->add_option("--segments", segments, "Focal-curve segments");
  simulate->add_option("--rate", rate, "Sampling rate for the simulation");
  simulate->add_option("--law", law, "Rendering law: soft | beer_lambert");

  auto* train_cmd = app.add_subcommand("train", "Fit the neural field to projections");
  add_common(train_cmd, args);
  train_cmd->add_option("--volume", volume_path, "Ground-truth volume (shape only)")->required();
  train_cmd->add_option("--image", image_path, "Simulated projection image")->required();

  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Sample a checkpoint on a grid");
  add_common(reconstruct_cmd, args);
  reconstruct_cmd->add_option("--checkpoint", checkpoint_path, "Model checkpoint")->required();
  reconstruct_cmd->add_option("--dims", args.dims, "Output dims as NXxNYxNZ");

  auto* evaluate = app.add_subcommand("evaluate", "Compare a reconstruction against ground truth");
  add_common(evaluate, args);
  evaluate->add_option("--recon", recon_path, "Reconstruction volume")->required();
  evaluate->add_option("--gt", gt_path, "Ground-truth volume")->required();
  evaluate->add_option("--dice-threshold", dice_threshold, "Binarization threshold");

  auto* ablate = app.add_subcommand("ablate", "Run baseline plus ablation variants");
  add_common(ablate, args);
  ablate->add_option("--which", which, "Subset of MDS (empty = baseline only)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom->parsed())
      return cmd_phantom(args);
    if (simulate->parsed())
      return cmd_simulate(args, volume_path, segments, rate, law);
    if (train_cmd->parsed())
      return cmd_train(args, volume_path, image_path);
    if (reconstruct_cmd->parsed())
      return cmd_reconstruct(args, checkpoint_path);
    if (evaluate->parsed())
      return cmd_evaluate(args, recon_path, gt_path, dice_threshold);
    if (ablate->parsed())
      return cmd_ablate(args, which);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
