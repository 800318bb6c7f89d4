#include "nexf/options.hpp"

#include <numbers>
#include <sstream>

namespace nexf {
namespace {

RenderLaw parse_law(const std::string& name) {
  if (name == "soft")
    return RenderLaw::soft;
  if (name == "beer_lambert")
    return RenderLaw::beer_lambert;
  throw ConfigError("unknown rendering law '" + name + "'");
}

std::string law_name(RenderLaw law) {
  return law == RenderLaw::soft ? "soft" : "beer_lambert";
}

std::string format_real(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

} // namespace

Options Options::from_config(Config& config) {
  Options o;

  const auto dims = config.get_dims("phantom.dims", {o.dims.x(), o.dims.y(), o.dims.z()});
  o.dims = {dims[0], dims[1], dims[2]};
  o.phantom.tooth_count = static_cast<int>(config.get_int("phantom.teeth", o.phantom.tooth_count));
  {
    const auto& d = o.phantom.tooth_semi_axes;
    const auto axes = config.get_reals("phantom.tooth_semi_axes", {d.x(), d.y(), d.z()});
    if (axes.size() != 3)
      throw ConfigError("phantom.tooth_semi_axes expects three values");
    o.phantom.tooth_semi_axes = {axes[0], axes[1], axes[2]};
  }
  o.phantom.background_intensity =
      static_cast<float>(config.get_real("phantom.intensity_background", -1000.0));
  o.phantom.soft_tissue_intensity =
      static_cast<float>(config.get_real("phantom.intensity_soft", 300.0));
  o.phantom.jaw_intensity = static_cast<float>(config.get_real("phantom.intensity_jaw", 1400.0));
  o.phantom.tooth_intensity =
      static_cast<float>(config.get_real("phantom.intensity_tooth", 2200.0));

  FocalCurve& curve = o.phantom.arch;
  curve.alpha = config.get_real("curve.alpha", curve.alpha);
  curve.beta = config.get_real("curve.beta", curve.beta);
  {
    const auto scale = config.get_reals("curve.scale", {curve.scale.x(), curve.scale.y()});
    const auto offset = config.get_reals("curve.offset", {curve.offset.x(), curve.offset.y()});
    if (scale.size() != 2 || offset.size() != 2)
      throw ConfigError("curve.scale and curve.offset expect two values each");
    curve.scale = {scale[0], scale[1]};
    curve.offset = {offset[0], offset[1]};
  }

  o.segments = static_cast<int>(config.get_int("simulate.segments", o.segments));
  o.angles = config.get_reals("simulate.angles", {});
  o.simulate_rate = config.get_real("simulate.rate", o.simulate_rate);
  o.simulate_law = parse_law(config.get_string("simulate.law", law_name(o.simulate_law)));

  TrainConfig& t = o.train;
  t.render.bias_c = config.get_real("render.c", t.render.bias_c);
  t.render.scale_s = config.get_real("render.s", t.render.scale_s);

  {
    const std::string mode = config.get_string("sampler.mode", "dynamic");
    if (mode == "dynamic")
      t.sampler.mode = SamplerMode::dynamic;
    else if (mode == "fixed")
      t.sampler.mode = SamplerMode::fixed;
    else
      throw ConfigError("unknown sampler mode '" + mode + "'");
  }
  t.sampler.rate_min = config.get_real("sampler.rate_min", t.sampler.rate_min);
  t.sampler.rate_max = config.get_real("sampler.rate_max", t.sampler.rate_max);
  t.sampler.fixed_rate = config.get_real("sampler.fixed_rate", t.sampler.fixed_rate);

  t.encoder.num_frequencies =
      static_cast<int>(config.get_int("encoder.frequencies", t.encoder.num_frequencies));
  t.encoder.include_input = config.get_bool("encoder.include_input", t.encoder.include_input);

  t.hidden_layers = static_cast<int>(config.get_int("model.hidden_layers", t.hidden_layers));
  t.hidden_width = static_cast<int>(config.get_int("model.hidden_width", t.hidden_width));
  t.heads = static_cast<int>(config.get_int("model.heads", t.heads));

  t.iterations = static_cast<int>(config.get_int("train.iterations", t.iterations));
  t.batch_rays = static_cast<int>(config.get_int("train.batch_rays", t.batch_rays));
  t.lr_initial = config.get_real("train.lr_initial", t.lr_initial);
  t.lr_after = config.get_real("train.lr_after", t.lr_after);
  t.lr_switch_iteration =
      static_cast<int>(config.get_int("train.lr_switch_iteration", t.lr_switch_iteration));
  t.checkpoint_interval =
      static_cast<int>(config.get_int("train.checkpoint_interval", t.checkpoint_interval));
  {
    const std::string precision = config.get_string("train.precision", "f64");
    if (precision == "f64")
      o.use_double = true;
    else if (precision == "f32")
      o.use_double = false;
    else
      throw ConfigError("train.precision must be f32 or f64, got '" + precision + "'");
  }

  t.ablation.single_head = config.get_bool("ablation.single_head", false);
  t.ablation.fixed_sampling = config.get_bool("ablation.fixed_sampling", false);
  t.ablation.beer_lambert = config.get_bool("ablation.beer_lambert", false);

  o.seed = static_cast<std::uint64_t>(config.get_int("run.seed", 1));
  o.threads = static_cast<int>(config.get_int("run.threads", 1));
  o.dice_threshold = config.get_real("evaluate.dice_threshold", o.dice_threshold);

  config.require_all_consumed();

  o.phantom.seed = o.seed;
  t.sampler.seed = o.seed;
  t.seed = o.seed;
  t.threads = o.threads;
  return o;
}

Options Options::from_file(const std::filesystem::path& path) {
  Config config = Config::parse_file(path);
  return from_config(config);
}

std::vector<std::pair<std::string, std::string>> Options::echo() const {
  std::vector<std::pair<std::string, std::string>> e;
  const auto add = [&](const std::string& k, const std::string& v) { e.emplace_back(k, v); };
  std::ostringstream dims_text;
  dims_text << dims.x() << 'x' << dims.y() << 'x' << dims.z();
  add("phantom.dims", dims_text.str());
  add("phantom.teeth", std::to_string(phantom.tooth_count));
  add("phantom.tooth_semi_axes", format_real(phantom.tooth_semi_axes.x()) + " " +
                                     format_real(phantom.tooth_semi_axes.y()) + " " +
                                     format_real(phantom.tooth_semi_axes.z()));
  add("phantom.intensity_background", format_real(phantom.background_intensity));
  add("phantom.intensity_soft", format_real(phantom.soft_tissue_intensity));
  add("phantom.intensity_jaw", format_real(phantom.jaw_intensity));
  add("phantom.intensity_tooth", format_real(phantom.tooth_intensity));
  add("curve.alpha", format_real(phantom.arch.alpha));
  add("curve.beta", format_real(phantom.arch.beta));
  add("curve.scale", format_real(phantom.arch.scale.x()) + " " + format_real(phantom.arch.scale.y()));
  add("curve.offset",
      format_real(phantom.arch.offset.x()) + " " + format_real(phantom.arch.offset.y()));
  add("simulate.segments", std::to_string(segments));
  {
    std::ostringstream a;
    if (angles.empty())
      a << format_real(std::numbers::pi / 2.0);
    else
      for (std::size_t i = 0; i < angles.size(); ++i)
        a << (i ? " " : "") << format_real(angles[i]);
    add("simulate.angles", a.str());
  }
  add("simulate.rate", format_real(simulate_rate));
  add("simulate.law", law_name(simulate_law));
  add("render.c", format_real(train.render.bias_c));
  add("render.s", format_real(train.render.scale_s));
  add("sampler.mode", train.sampler.mode == SamplerMode::dynamic ? "dynamic" : "fixed");
  add("sampler.rate_min", format_real(train.sampler.rate_min));
  add("sampler.rate_max", format_real(train.sampler.rate_max));
  add("sampler.fixed_rate", format_real(train.sampler.fixed_rate));
  add("encoder.frequencies", std::to_string(train.encoder.num_frequencies));
  add("encoder.include_input", train.encoder.include_input ? "true" : "false");
  add("model.hidden_layers", std::to_string(train.hidden_layers));
  add("model.hidden_width", std::to_string(train.hidden_width));
  add("model.heads", std::to_string(train.heads));
  add("train.iterations", std::to_string(train.iterations));
  add("train.batch_rays", std::to_string(train.batch_rays));
  add("train.lr_initial", format_real(train.lr_initial));
  add("train.lr_after", format_real(train.lr_after));
  add("train.lr_switch_iteration", std::to_string(train.lr_switch_iteration));
  add("train.checkpoint_interval", std::to_string(train.checkpoint_interval));
  add("train.precision", use_double ? "f64" : "f32");
  add("ablation.single_head", train.ablation.single_head ? "true" : "false");
  add("ablation.fixed_sampling", train.ablation.fixed_sampling ? "true" : "false");
  add("ablation.beer_lambert", train.ablation.beer_lambert ? "true" : "false");
  add("run.seed", std::to_string(seed));
  add("run.threads", std::to_string(threads));
  add("evaluate.dice_threshold", format_real(dice_threshold));
  return e;
}

std::vector<Ray> Options::make_rays() const {
  return generate_rays(phantom.arch, segments, angles);
}

} // namespace nexf
