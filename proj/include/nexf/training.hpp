#pragma once

#include "nexf/field.hpp"
#include "nexf/rendering.hpp"
#include "nexf/sampling.hpp"
#include "nexf/volume.hpp"

#include <functional>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <thread>
#include <vector>

namespace nexf {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ablation switches: M (single-head 3D field), D (fixed sampling rate),
/// S (Beer-Lambert rendering in the training loss).
struct AblationSwitches {
  bool single_head = false;
  bool fixed_sampling = false;
  bool beer_lambert = false;
};

struct TrainConfig {
  int iterations = 100000;
  int batch_rays = 64;
  double lr_initial = 1e-3;
  double lr_after = 1e-4;
  int lr_switch_iteration = 20000;
  SamplerConfig sampler;
  RenderParams render;
  EncoderConfig encoder;
  int hidden_layers = 12;
  int hidden_width = 256;
  int heads = 160;
  AblationSwitches ablation;
  std::uint64_t seed = 1;
  int threads = 1;
  int checkpoint_interval = 0; // 0 = final checkpoint only
};

void validate_train_config(const TrainConfig& config);

/// Piecewise-constant schedule: lr_initial before the switch iteration,
/// lr_after from it onward.
double lr_at(const TrainConfig& config, int iteration);

// ---------------------------------------------------------------------------
// Adam

template <class T>
struct AdamState {
  Eigen::VectorX<T> first_moment;
  Eigen::VectorX<T> second_moment;
  long step = 0;
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);

  explicit AdamState(Eigen::Index size)
      : first_moment(Eigen::VectorX<T>::Zero(size)),
        second_moment(Eigen::VectorX<T>::Zero(size)) {}
};

/// Standard Adam update with bias correction.
template <class T>
void adam_step(Eigen::VectorX<T>& params, const Eigen::VectorX<T>& grad,
               AdamState<T>& state, T lr) {
  if (params.size() != grad.size() || params.size() != state.first_moment.size())
    throw TrainError("adam_step shape mismatch");
  state.step += 1;
  state.first_moment = state.beta1 * state.first_moment + (T(1) - state.beta1) * grad;
  state.second_moment = state.beta2 * state.second_moment +
                        (T(1) - state.beta2) * grad.array().square().matrix();
  const T correct1 = T(1) - std::pow(state.beta1, static_cast<T>(state.step));
  const T correct2 = T(1) - std::pow(state.beta2, static_cast<T>(state.step));
  params.array() -= lr * (state.first_moment.array() / correct1) /
                    ((state.second_moment.array() / correct2).sqrt() + state.epsilon);
}

// ---------------------------------------------------------------------------
// Differentiable forward/backward through encoder -> MLP -> render law

template <class T>
struct ForwardTrace {
  typename FieldModel<T>::Matrix encoded;            // enc_dim x columns
  std::vector<typename FieldModel<T>::Matrix> acts;  // hidden activations
  typename FieldModel<T>::Matrix output;             // heads x columns
};

template <class T>
void field_forward_traced(const FieldModel<T>& model,
                          typename FieldModel<T>::Matrix encoded, ForwardTrace<T>& trace) {
  trace.encoded = std::move(encoded);
  trace.acts.resize(static_cast<std::size_t>(model.hidden_layers));
  for (int l = 0; l < model.hidden_layers; ++l) {
    auto& act = trace.acts[static_cast<std::size_t>(l)];
    act.noalias() = model.weight(l) * (l == 0 ? trace.encoded : trace.acts[l - 1]);
    act.colwise() += model.bias(l);
    if (model.has_skip(l))
      act += trace.acts[static_cast<std::size_t>(l - 2)];
    act = act.cwiseMax(T(0));
  }
  trace.output.noalias() =
      model.weight(model.hidden_layers) * trace.acts.back();
  trace.output.colwise() += model.bias(model.hidden_layers);
}

/// Reverse pass: accumulate d(loss)/d(params) into `grad` (flat, layout
/// order) given d(loss)/d(output). ReLU masks come from the cached
/// activations (output > 0 iff pre-activation > 0).
template <class T>
void field_backward(const FieldModel<T>& model, const ForwardTrace<T>& trace,
                    const typename FieldModel<T>::Matrix& d_output,
                    Eigen::VectorX<T>& grad) {
  using Matrix = typename FieldModel<T>::Matrix;
  using Vector = typename FieldModel<T>::Vector;
  const int head = model.hidden_layers;
  const auto weight_grad = [&](int layer) {
    const auto& s = model.layout[static_cast<std::size_t>(layer)];
    return Eigen::Map<Matrix>(grad.data() + s.weight_offset, s.rows, s.cols);
  };
  const auto bias_grad = [&](int layer) {
    const auto& s = model.layout[static_cast<std::size_t>(layer)];
    return Eigen::Map<Vector>(grad.data() + s.bias_offset, s.rows);
  };

  weight_grad(head).noalias() += d_output * trace.acts.back().transpose();
  bias_grad(head) += d_output.rowwise().sum();

  // d_acts entries start empty; the first contribution assigns, later ones add
  std::vector<Matrix> d_acts(static_cast<std::size_t>(model.hidden_layers));
  const auto add_to = [](Matrix& dst, const auto& expr) {
    if (dst.size() == 0)
      dst = expr;
    else
      dst += expr;
  };
  add_to(d_acts.back(), model.weight(head).transpose() * d_output);

  for (int l = model.hidden_layers - 1; l >= 0; --l) {
    const auto& act = trace.acts[static_cast<std::size_t>(l)];
    // d(pre-activation): gate the incoming gradient by the ReLU mask
    Matrix d_pre = ((act.array() > T(0)).template cast<T>() *
                    d_acts[static_cast<std::size_t>(l)].array())
                       .matrix();
    const Matrix& input = l == 0 ? trace.encoded : trace.acts[static_cast<std::size_t>(l - 1)];
    weight_grad(l).noalias() += d_pre * input.transpose();
    bias_grad(l) += d_pre.rowwise().sum();
    if (l > 0)
      add_to(d_acts[static_cast<std::size_t>(l - 1)], model.weight(l).transpose() * d_pre);
    if (model.has_skip(l))
      add_to(d_acts[static_cast<std::size_t>(l - 2)], d_pre);
  }
}

// ---------------------------------------------------------------------------
// Per-ray loss

/// Render one detector row from a slice of field outputs and write
/// d(residual²)/d(sample) into the matching slice of the output gradient.
/// Returns the squared residual against the ground-truth pixel. All scalar
/// math runs in double regardless of the model precision.
template <class T, class ValuesExpr, class GradExpr>
double render_row_loss(const ValuesExpr& values, double ns_rate, const RenderParams& params,
                       double gt_pixel, GradExpr&& d_values) {
  const Eigen::Index n = values.size();
  double rendered;
  if (params.law == RenderLaw::soft) {
    const double c = params.bias_c, s = params.scale_s;
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      peak = std::max(peak, (static_cast<double>(values(i)) - c) / s);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::exp((static_cast<double>(values(i)) - c) / s - peak);
      d_values(i) = static_cast<T>(e); // softmax numerator, scaled below
      sum += e;
    }
    rendered = s * (peak + std::log(sum) - std::log(ns_rate));
    const double residual = rendered - gt_pixel;
    const double scale = 2.0 * residual / sum;
    for (Eigen::Index i = 0; i < n; ++i)
      d_values(i) = static_cast<T>(static_cast<double>(d_values(i)) * scale);
    return residual * residual;
  }
  // Beer-Lambert: sum_i mu(V_i) * step with step = one voxel step / Ns
  const double step = 1.0 / ns_rate;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    acc += attenuation_mu(static_cast<double>(values(i)));
  rendered = acc * step;
  const double residual = rendered - gt_pixel;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool active = static_cast<double>(values(i)) > kAttenuationAir;
    d_values(i) = active ? static_cast<T>(2.0 * residual * step / kAttenuationNormalizer)
                         : T(0);
  }
  return residual * residual;
}

struct RayTask {
  const Ray* ray = nullptr;
  double ns_rate = 1.0;
  int image_column = 0;
};

/// Shared kernel behind ray_loss and the batch loop: forward a set of rays
/// through the field, render every detector row, and accumulate gradients.
/// Losses are per-ray means over rows; the caller averages over rays.
template <class T>
class RayBatchKernel {
public:
  RayBatchKernel(const FieldModel<T>& model, const RenderParams& render,
                 const ProjectionImage& gt, int beam_height, double pitch)
      : model_(model), render_(render), gt_(gt), beam_height_(beam_height), pitch_(pitch) {
    if (model.mode == HeadMode::single) {
      // cache the z-dependent encoder entries; they repeat for every sample
      const int L = model.encoder.num_frequencies;
      z_raw_.resize(beam_height_);
      z_trig_.resize(2 * L, beam_height_);
      for (int j = 0; j < beam_height_; ++j) {
        const double z = voxel_center_coord(j, beam_height_);
        z_raw_[static_cast<std::size_t>(j)] = static_cast<T>(z);
        for (int k = 0; k < L; ++k) {
          double s, c;
          frequency_pair(z, k, s, c);
          z_trig_(2 * k, j) = static_cast<T>(s);
          z_trig_(2 * k + 1, j) = static_cast<T>(c);
        }
      }
    }
  }

  /// Returns the summed per-ray loss; adds parameter gradients into `grad`.
  double run(std::span<const RayTask> tasks, Eigen::VectorX<T>& grad) const {
    using Matrix = typename FieldModel<T>::Matrix;
    std::vector<int> counts(tasks.size());
    std::vector<Eigen::Index> offsets(tasks.size());
    Eigen::Index columns = 0;
    for (std::size_t r = 0; r < tasks.size(); ++r) {
      const int count = sample_count(tasks[r].ray->chord_length(), tasks[r].ns_rate, pitch_);
      if (count < 1)
        throw TrainError("ray with no samples reached the training kernel");
      counts[r] = count;
      offsets[r] = columns;
      columns += model_.mode == HeadMode::multi
                     ? count
                     : static_cast<Eigen::Index>(count) * beam_height_;
    }

    Matrix encoded(model_.encoder.output_dim(), columns);
    for (std::size_t r = 0; r < tasks.size(); ++r)
      encode_ray(*tasks[r].ray, tasks[r].ns_rate, counts[r], encoded, offsets[r]);

    ForwardTrace<T> trace;
    field_forward_traced(model_, std::move(encoded), trace);

    Matrix d_output = Matrix::Zero(trace.output.rows(), trace.output.cols());
    double loss_sum = 0.0;
    for (std::size_t r = 0; r < tasks.size(); ++r) {
      const int count = counts[r];
      const Eigen::Index base = offsets[r];
      double ray_loss_acc = 0.0;
      for (int row = 0; row < beam_height_; ++row) {
        const double gt_pixel = gt_.at(tasks[r].image_column, row);
        if (model_.mode == HeadMode::multi) {
          ray_loss_acc += render_row_loss<T>(trace.output.row(row).segment(base, count),
                                             tasks[r].ns_rate, render_, gt_pixel,
                                             d_output.row(row).segment(base, count));
        } else {
          const Eigen::Index slice = base + static_cast<Eigen::Index>(row) * count;
          ray_loss_acc += render_row_loss<T>(trace.output.row(0).segment(slice, count),
                                             tasks[r].ns_rate, render_, gt_pixel,
                                             d_output.row(0).segment(slice, count));
        }
      }
      loss_sum += ray_loss_acc / beam_height_;
    }
    // fold the per-ray 1/rows normalization into the output gradient
    d_output *= static_cast<T>(1.0 / beam_height_);
    field_backward(model_, trace, d_output, grad);
    return loss_sum;
  }

private:
  void encode_ray(const Ray& ray, double ns_rate, int count,
                  typename FieldModel<T>::Matrix& encoded, Eigen::Index base) const {
    const auto positions = sample_positions(ray, ns_rate, pitch_);
    if (static_cast<int>(positions.size()) != count)
      throw TrainError("sample count changed between planning and encoding");
    if (model_.mode == HeadMode::multi) {
      for (int i = 0; i < count; ++i) {
        const double coords[2] = {positions[static_cast<std::size_t>(i)].x(),
                                  positions[static_cast<std::size_t>(i)].y()};
        encode_into<T>(model_.encoder, coords,
                       {encoded.data() + (base + i) * encoded.rows(),
                        static_cast<std::size_t>(encoded.rows())});
      }
      return;
    }
    // single-head: columns ordered row-major per ray (all samples of row 0,
    // then row 1, ...), splicing the cached z entries
    const int L = model_.encoder.num_frequencies;
    const bool raw = model_.encoder.include_input;
    const int xy_width = 4 * L;
    typename FieldModel<T>::Matrix xy_trig(xy_width, count);
    for (int i = 0; i < count; ++i) {
      const auto& p = positions[static_cast<std::size_t>(i)];
      for (int axis = 0; axis < 2; ++axis)
        for (int k = 0; k < L; ++k) {
          double s, c;
          frequency_pair(axis == 0 ? p.x() : p.y(), k, s, c);
          xy_trig(2 * L * axis + 2 * k, i) = static_cast<T>(s);
          xy_trig(2 * L * axis + 2 * k + 1, i) = static_cast<T>(c);
        }
    }
    for (int row = 0; row < beam_height_; ++row)
      for (int i = 0; i < count; ++i) {
        const auto& p = positions[static_cast<std::size_t>(i)];
        T* cursor = encoded.data() +
                    (base + static_cast<Eigen::Index>(row) * count + i) * encoded.rows();
        if (raw) {
          *cursor++ = static_cast<T>(p.x());
          *cursor++ = static_cast<T>(p.y());
          *cursor++ = z_raw_[static_cast<std::size_t>(row)];
        }
        Eigen::Map<Eigen::VectorX<T>>(cursor, xy_width) = xy_trig.col(i);
        Eigen::Map<Eigen::VectorX<T>>(cursor + xy_width, 2 * L) = z_trig_.col(row);
      }
  }

  const FieldModel<T>& model_;
  const RenderParams& render_;
  const ProjectionImage& gt_;
  int beam_height_;
  double pitch_;
  std::vector<T> z_raw_;
  typename FieldModel<T>::Matrix z_trig_;
};

/// Loss and parameter gradients for one ray: mean over detector rows of the
/// squared residual between the rendered and ground-truth pixels.
template <class T>
struct RayLossResult {
  double loss = 0.0;
  Eigen::VectorX<T> grad;
};

template <class T>
RayLossResult<T> ray_loss(const FieldModel<T>& model, const Ray& ray,
                          const ProjectionImage& gt, int image_column, double ns_rate,
                          const RenderParams& render, double pitch) {
  const int beam_height = gt.height;
  RayBatchKernel<T> kernel(model, render, gt, beam_height, pitch);
  RayLossResult<T> result;
  result.grad = Eigen::VectorX<T>::Zero(model.params.size());
  const RayTask task{&ray, ns_rate, image_column};
  result.loss = kernel.run({&task, 1}, result.grad);
  return result;
}

// ---------------------------------------------------------------------------
// Training loop

struct LossRecord {
  int iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
};

template <class T>
struct TrainResult {
  FieldModel<T> model;
  std::vector<LossRecord> history;
};

namespace detail {

inline const char* parameter_block_name(int layer, int layer_count) {
  return layer == layer_count - 1 ? "output head" : "hidden layer";
}

template <class T>
void require_finite_gradient(const FieldModel<T>& model, const Eigen::VectorX<T>& grad,
                             int iteration) {
  if (grad.allFinite())
    return;
  for (int l = 0; l < model.layer_count(); ++l) {
    const auto& s = model.layout[static_cast<std::size_t>(l)];
    const auto block = grad.segment(s.weight_offset,
                                    static_cast<Eigen::Index>(s.rows) * s.cols + s.rows);
    if (!block.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite gradient at iteration " << iteration << " in "
          << parameter_block_name(l, model.layer_count()) << ' ' << l;
      throw TrainError(msg.str());
    }
  }
  throw TrainError("non-finite gradient at iteration " + std::to_string(iteration));
}

} // namespace detail

/// Optimize a field model against a simulated projection image. Deterministic
/// for a fixed config: the batch stream is drawn serially from one generator,
/// rays are processed in fixed groups, and group gradients are reduced in
/// fixed order whatever the thread count.
template <class T>
TrainResult<T> train(const Volume& volume, std::span<const Ray> rays,
                     const ProjectionImage& gt, const TrainConfig& config,
                     const std::function<void(int, const FieldModel<T>&)>& on_checkpoint = {}) {
  validate_train_config(config);
  if (static_cast<int>(rays.size()) != gt.width)
    throw TrainError("projection width does not match the ray count");
  if (gt.height != volume.nz())
    throw TrainError("projection height does not match the volume depth");

  TrainConfig cfg = config;
  if (cfg.ablation.fixed_sampling)
    cfg.sampler.mode = SamplerMode::fixed;
  if (cfg.ablation.beer_lambert)
    cfg.render.law = RenderLaw::beer_lambert;

  HeadMode mode = HeadMode::multi;
  int heads = cfg.heads;
  if (cfg.ablation.single_head) {
    mode = HeadMode::single;
    heads = 1;
    cfg.encoder.input_dim = 3;
  } else {
    cfg.encoder.input_dim = 2;
    if (heads != volume.nz())
      throw TrainError("multi-head training requires heads equal to volume nz");
  }

  TrainResult<T> result;
  result.model = make_field_model<T>(cfg.encoder, cfg.hidden_layers, cfg.hidden_width,
                                     heads, mode, cfg.seed);
  AdamState<T> adam(result.model.params.size());
  const double pitch = voxel_pitch(volume);
  RayBatchKernel<T> kernel(result.model, cfg.render, gt, volume.nz(), pitch);

  // Distinct stream from the weight init; drawn serially per iteration.
  std::mt19937_64 rng(cfg.seed ^ 0xda3e39cb94b95bdbULL);
  std::uniform_int_distribution<int> pick_ray(0, static_cast<int>(rays.size()) - 1);

  const int batch = cfg.batch_rays;
  const int groups = std::min(16, batch);
  const int threads = std::max(1, std::min(cfg.threads, groups));

  std::vector<RayTask> tasks(static_cast<std::size_t>(batch));
  std::vector<Eigen::VectorX<T>> group_grads(static_cast<std::size_t>(groups));
  std::vector<double> group_losses(static_cast<std::size_t>(groups));
  result.history.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int it = 0; it < cfg.iterations; ++it) {
    for (int s = 0; s < batch; ++s) {
      const int index = pick_ray(rng);
      tasks[static_cast<std::size_t>(s)].ray = &rays[static_cast<std::size_t>(index)];
      tasks[static_cast<std::size_t>(s)].image_column = index;
      tasks[static_cast<std::size_t>(s)].ns_rate =
          draw_rate_for_ray(cfg.sampler, rays[static_cast<std::size_t>(index)], pitch, rng);
    }

    const auto run_group = [&](int g) {
      const int begin = g * batch / groups;
      const int end = (g + 1) * batch / groups;
      auto& grad = group_grads[static_cast<std::size_t>(g)];
      if (grad.size() != result.model.params.size())
        grad = Eigen::VectorX<T>::Zero(result.model.params.size());
      else
        grad.setZero();
      group_losses[static_cast<std::size_t>(g)] =
          kernel.run({tasks.data() + begin, static_cast<std::size_t>(end - begin)}, grad);
    };

    if (threads == 1) {
      for (int g = 0; g < groups; ++g)
        run_group(g);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
          try {
            for (int g = t; g < groups; g += threads)
              run_group(g);
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

    double loss = 0.0;
    Eigen::VectorX<T>& grad = group_grads[0];
    for (int g = 1; g < groups; ++g)
      grad += group_grads[static_cast<std::size_t>(g)];
    for (int g = 0; g < groups; ++g)
      loss += group_losses[static_cast<std::size_t>(g)];
    loss /= batch;
    grad *= static_cast<T>(1.0 / batch);

    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "training diverged: loss " << loss << " at iteration " << it
          << " (lr " << lr_at(cfg, it) << ", batch around ray "
          << tasks[0].image_column << ")";
      throw TrainError(msg.str());
    }
    detail::require_finite_gradient(result.model, grad, it);

    const double lr = lr_at(cfg, it);
    adam_step(result.model.params, grad, adam, static_cast<T>(lr));
    result.history.push_back({it, loss, lr});

    if (on_checkpoint && cfg.checkpoint_interval > 0 && (it + 1) % cfg.checkpoint_interval == 0)
      on_checkpoint(it + 1, result.model);
  }
  if (!result.model.params.allFinite())
    throw TrainError("non-finite parameters after training");
  return result;
}

// ---------------------------------------------------------------------------
// Reconstruction

/// Query the field on every axial grid position and write the predicted
/// intensities down the z axis. Multi-head models emit a full column per
/// query; the single-head ablation is queried once per voxel.
template <class T>
Volume reconstruct(const FieldModel<T>& model, const Eigen::Vector3i& dims, int threads = 1) {
  using Matrix = typename FieldModel<T>::Matrix;
  if (model.mode == HeadMode::multi && model.heads != dims.z())
    throw TrainError("reconstruction dims.z must equal the model head count");
  Volume out = make_volume(dims);

  const auto fill_row = [&](int y) {
    const double yc = voxel_center_coord(y, dims.y());
    if (model.mode == HeadMode::multi) {
      Matrix encoded(model.encoder.output_dim(), dims.x());
      for (int x = 0; x < dims.x(); ++x) {
        const double coords[2] = {voxel_center_coord(x, dims.x()), yc};
        encode_into<T>(model.encoder, coords,
                       {encoded.data() + static_cast<Eigen::Index>(x) * encoded.rows(),
                        static_cast<std::size_t>(encoded.rows())});
      }
      const Matrix columns = field_forward(model, encoded);
      for (int z = 0; z < dims.z(); ++z)
        for (int x = 0; x < dims.x(); ++x)
          out.at(x, y, z) = static_cast<float>(columns(z, x));
    } else {
      Matrix encoded(model.encoder.output_dim(), static_cast<Eigen::Index>(dims.x()) * dims.z());
      Eigen::Index col = 0;
      for (int z = 0; z < dims.z(); ++z)
        for (int x = 0; x < dims.x(); ++x, ++col) {
          const double coords[3] = {voxel_center_coord(x, dims.x()), yc,
                                    voxel_center_coord(z, dims.z())};
          encode_into<T>(model.encoder, coords,
                         {encoded.data() + col * encoded.rows(),
                          static_cast<std::size_t>(encoded.rows())});
        }
      const Matrix values = field_forward(model, encoded);
      col = 0;
      for (int z = 0; z < dims.z(); ++z)
        for (int x = 0; x < dims.x(); ++x, ++col)
          out.at(x, y, z) = static_cast<float>(values(0, col));
    }
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    for (int y = 0; y < dims.y(); ++y)
      fill_row(y);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int y = t; y < dims.y(); y += threads)
            fill_row(y);
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
  return out;
}

/// Reference grid walk used by tests: one column query per axial position,
/// in the same order reconstruct uses.
Volume reconstruct_with(const std::function<Eigen::VectorXd(double x, double y)>& query,
                        const Eigen::Vector3i& dims);

} // namespace nexf
