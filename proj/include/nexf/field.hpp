#pragma once

#include "nexf/encoding.hpp"
#include "nexf/volume.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

namespace nexf {

struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class HeadMode { multi, single };

/// The neural X-ray field: frequency encoder -> fully connected stack with
/// skip-adds every two layers -> linear output head. In multi mode a single
/// 2D axial query yields all `heads` z-level intensities at once; in single
/// mode (ablation) the input is 3D and there is one output.
///
/// Parameters live in one flat vector; per-layer weights and biases are
/// Eigen maps into it, in declared order (W column-major, then b, layer by
/// layer, output head last). Optimizer state and checkpoints share the layout.
template <class T>
struct FieldModel {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::VectorX<T>;

  struct LayerShape {
    int rows = 0, cols = 0;
    std::ptrdiff_t weight_offset = 0, bias_offset = 0;
  };

  EncoderConfig encoder;
  int hidden_layers = 12;
  int hidden_width = 256;
  int heads = 160;
  HeadMode mode = HeadMode::multi;
  std::vector<LayerShape> layout; // hidden layers then the output head
  Vector params;

  int layer_count() const { return static_cast<int>(layout.size()); }

  Eigen::Map<const Matrix> weight(int layer) const {
    const auto& s = layout[static_cast<std::size_t>(layer)];
    return {params.data() + s.weight_offset, s.rows, s.cols};
  }
  Eigen::Map<const Vector> bias(int layer) const {
    const auto& s = layout[static_cast<std::size_t>(layer)];
    return {params.data() + s.bias_offset, s.rows};
  }
  Eigen::Map<Matrix> weight(int layer) {
    const auto& s = layout[static_cast<std::size_t>(layer)];
    return {params.data() + s.weight_offset, s.rows, s.cols};
  }
  Eigen::Map<Vector> bias(int layer) {
    const auto& s = layout[static_cast<std::size_t>(layer)];
    return {params.data() + s.bias_offset, s.rows};
  }

  /// True for hidden layers that add the activation from two layers back
  /// before their nonlinearity.
  bool has_skip(int layer) const {
    return layer >= 2 && layer < hidden_layers && layer % 2 == 0;
  }
};

namespace detail {

template <class T>
void build_layout(FieldModel<T>& model) {
  model.layout.clear();
  std::ptrdiff_t offset = 0;
  const auto push = [&](int rows, int cols) {
    typename FieldModel<T>::LayerShape s;
    s.rows = rows;
    s.cols = cols;
    s.weight_offset = offset;
    offset += static_cast<std::ptrdiff_t>(rows) * cols;
    s.bias_offset = offset;
    offset += rows;
    model.layout.push_back(s);
  };
  int in = model.encoder.output_dim();
  for (int l = 0; l < model.hidden_layers; ++l) {
    push(model.hidden_width, in);
    in = model.hidden_width;
  }
  push(model.heads, in); // output head
  model.params = FieldModel<T>::Vector::Zero(offset);
}

} // namespace detail

/// He-style uniform fan-in initialization; the output head is scaled down by
/// 1e-2 so untrained renders sit near the bias level C. Draws are made in
/// double so a given seed yields the same weights at every precision.
template <class T>
FieldModel<T> make_field_model(const EncoderConfig& encoder, int hidden_layers,
                               int hidden_width, int heads, HeadMode mode,
                               std::uint64_t seed) {
  validate_encoder(encoder);
  if (hidden_layers < 1 || hidden_width < 1 || heads < 1)
    throw FieldError("field model needs positive layer count, width, and heads");
  if (mode == HeadMode::single && heads != 1)
    throw FieldError("single-head mode requires heads = 1");
  if (mode == HeadMode::multi && encoder.input_dim != 2)
    throw FieldError("multi-head mode takes 2D axial input");
  if (mode == HeadMode::single && encoder.input_dim != 3)
    throw FieldError("single-head mode takes 3D input");

  FieldModel<T> model;
  model.encoder = encoder;
  model.hidden_layers = hidden_layers;
  model.hidden_width = hidden_width;
  model.heads = heads;
  model.mode = mode;
  detail::build_layout(model);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int l = 0; l < model.layer_count(); ++l) {
    auto w = model.weight(l);
    double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
    if (l == model.layer_count() - 1)
      limit *= 1e-2;
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        w(r, c) = static_cast<T>(limit * unit(rng));
    // biases stay zero
  }
  return model;
}

/// Forward pass over a batch of encoded columns; returns heads x columns.
template <class T>
typename FieldModel<T>::Matrix field_forward(const FieldModel<T>& model,
                                             const typename FieldModel<T>::Matrix& encoded) {
  if (encoded.rows() != model.encoder.output_dim())
    throw FieldError("encoded input has the wrong dimension");
  using Matrix = typename FieldModel<T>::Matrix;
  Matrix prev, prev2, current;
  for (int l = 0; l < model.hidden_layers; ++l) {
    current.noalias() = model.weight(l) * (l == 0 ? encoded : prev);
    current.colwise() += model.bias(l);
    if (model.has_skip(l))
      current += prev2;
    current = current.cwiseMax(T(0));
    prev2.swap(prev);
    prev.swap(current);
  }
  Matrix out;
  out.noalias() = model.weight(model.hidden_layers) * prev;
  out.colwise() += model.bias(model.hidden_layers);
  return out;
}

/// Multi-head column query: all z-level intensities at an axial position,
/// head j corresponding to volume slice j.
template <class T>
typename FieldModel<T>::Vector field_query_column(const FieldModel<T>& model,
                                                  const Eigen::Vector2d& xy) {
  if (model.mode != HeadMode::multi)
    throw FieldError("column query requires a multi-head model");
  const double coords[2] = {xy.x(), xy.y()};
  typename FieldModel<T>::Matrix encoded(model.encoder.output_dim(), 1);
  encode_into<T>(model.encoder, coords,
                 {encoded.data(), static_cast<std::size_t>(encoded.rows())});
  return field_forward(model, encoded).col(0);
}

/// Single-head ablation equivalent: assemble the same-shaped column by
/// querying (x, y, z_j) for every slice j.
template <class T>
typename FieldModel<T>::Vector field_query_column_single(const FieldModel<T>& model,
                                                         const Eigen::Vector2d& xy, int nz) {
  if (model.mode != HeadMode::single)
    throw FieldError("per-slice query requires a single-head model");
  typename FieldModel<T>::Matrix encoded(model.encoder.output_dim(), nz);
  for (int j = 0; j < nz; ++j) {
    const double coords[3] = {xy.x(), xy.y(), voxel_center_coord(j, nz)};
    encode_into<T>(model.encoder, coords,
                   {encoded.data() + static_cast<std::ptrdiff_t>(j) * encoded.rows(),
                    static_cast<std::size_t>(encoded.rows())});
  }
  return field_forward(model, encoded).transpose();
}

// ---------------------------------------------------------------------------
// Checkpoint I/O: text header with the architecture, then the flat parameter
// vector as raw little-endian f32 in layout order.

template <class T>
void save_checkpoint(const FieldModel<T>& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw FieldError("cannot open " + path.string() + " for writing");
  out << "nexf-checkpoint: 1\n";
  out << "input_dim: " << model.encoder.input_dim << '\n';
  out << "frequencies: " << model.encoder.num_frequencies << '\n';
  out << "include_input: " << (model.encoder.include_input ? 1 : 0) << '\n';
  out << "hidden_layers: " << model.hidden_layers << '\n';
  out << "hidden_width: " << model.hidden_width << '\n';
  out << "heads: " << model.heads << '\n';
  out << "head_mode: " << (model.mode == HeadMode::multi ? "multi" : "single") << '\n';
  out << "parameters: " << model.params.size() << "\n\n";
  for (Eigen::Index i = 0; i < model.params.size(); ++i) {
    const float f = static_cast<float>(model.params[i]);
    out.write(reinterpret_cast<const char*>(&f), sizeof(float));
  }
  if (!out)
    throw FieldError("short write to " + path.string());
}

template <class T>
FieldModel<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FieldError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "nexf-checkpoint: 1")
    throw FieldError("not a checkpoint file: " + path.string());

  EncoderConfig encoder;
  int hidden_layers = 0, hidden_width = 0, heads = 0;
  HeadMode mode = HeadMode::multi;
  std::int64_t declared = -1;
  while (std::getline(in, line) && !line.empty()) {
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw FieldError("malformed checkpoint header line '" + line + "'");
    const std::string key = line.substr(0, colon);
    std::istringstream val(line.substr(colon + 1));
    if (key == "input_dim") val >> encoder.input_dim;
    else if (key == "frequencies") val >> encoder.num_frequencies;
    else if (key == "include_input") { int b = 0; val >> b; encoder.include_input = b != 0; }
    else if (key == "hidden_layers") val >> hidden_layers;
    else if (key == "hidden_width") val >> hidden_width;
    else if (key == "heads") val >> heads;
    else if (key == "head_mode") {
      std::string m; val >> m;
      if (m == "multi") mode = HeadMode::multi;
      else if (m == "single") mode = HeadMode::single;
      else throw FieldError("unknown head_mode '" + m + "'");
    } else if (key == "parameters") val >> declared;
    else throw FieldError("unknown checkpoint key '" + key + "'");
    if (val.fail())
      throw FieldError("malformed checkpoint value in '" + line + "'");
  }

  FieldModel<T> model;
  model.encoder = encoder;
  model.hidden_layers = hidden_layers;
  model.hidden_width = hidden_width;
  model.heads = heads;
  model.mode = mode;
  validate_encoder(encoder);
  if (hidden_layers < 1 || hidden_width < 1 || heads < 1)
    throw FieldError("invalid architecture in " + path.string());
  detail::build_layout(model);
  if (declared != model.params.size())
    throw FieldError("parameter count mismatch in " + path.string());

  std::vector<float> payload(static_cast<std::size_t>(model.params.size()));
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != payload.size() * sizeof(float))
    throw FieldError("payload shorter than declared in " + path.string());
  char extra;
  if (in.read(&extra, 1))
    throw FieldError("payload longer than declared in " + path.string());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (!std::isfinite(payload[i]))
      throw FieldError("non-finite parameter in " + path.string());
    model.params[static_cast<Eigen::Index>(i)] = static_cast<T>(payload[i]);
  }
  return model;
}

} // namespace nexf
