#include "nexf/training.hpp"

namespace nexf {

void validate_train_config(const TrainConfig& config) {
  if (config.iterations < 1)
    throw TrainError("iterations must be positive");
  if (config.batch_rays < 1)
    throw TrainError("batch size must be at least one ray");
  if (!(config.lr_initial > 0.0) || !(config.lr_after > 0.0))
    throw TrainError("learning rates must be positive");
  if (config.lr_switch_iteration < 0 || config.lr_switch_iteration > config.iterations)
    throw TrainError("lr switch iteration must lie within the run");
  if (config.hidden_layers < 1 || config.hidden_width < 1 || config.heads < 1)
    throw TrainError("model shape must be positive");
  if (config.threads < 1)
    throw TrainError("thread count must be positive");
  validate_sampler(config.sampler);
  validate_render_params(config.render);
  validate_encoder(config.encoder);
}

double lr_at(const TrainConfig& config, int iteration) {
  return iteration < config.lr_switch_iteration ? config.lr_initial : config.lr_after;
}

Volume reconstruct_with(const std::function<Eigen::VectorXd(double x, double y)>& query,
                        const Eigen::Vector3i& dims) {
  Volume out = make_volume(dims);
  for (int y = 0; y < dims.y(); ++y)
    for (int x = 0; x < dims.x(); ++x) {
      const Eigen::VectorXd column =
          query(voxel_center_coord(x, dims.x()), voxel_center_coord(y, dims.y()));
      if (column.size() != dims.z())
        throw TrainError("column query returned the wrong number of slices");
      for (int z = 0; z < dims.z(); ++z)
        out.at(x, y, z) = static_cast<float>(column[z]);
    }
  return out;
}

} // namespace nexf
