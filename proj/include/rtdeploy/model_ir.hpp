// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rtdeploy {

/// Name used in `Layer::inputs` to refer to the graph input tensor.
inline constexpr std::string_view kGraphInput = "input";

enum class OpKind { Conv2D, Dense, ReLU, ElementwiseAdd, MaxPool2D, Flatten };

std::string_view to_string(OpKind op);
std::optional<OpKind> op_from_string(std::string_view name);

/// Dense tensor shape. 4-D shapes are N,H,W,C with N == 1; 3-D shapes are
/// H,W,C. Activations and weights are int8 (elem_bytes 1).
struct TensorShape {
  std::vector<std::int64_t> dims;
  int elem_bytes = 1;

  std::int64_t elements() const;
  std::uint64_t bytes() const;

  /// Channels are the innermost dim; everything before it is the pixel axis.
  std::int64_t channels() const { return dims.back(); }
  std::int64_t pixels() const { return elements() / channels(); }

  bool operator==(const TensorShape&) const = default;
};

std::string to_string(const TensorShape& s);

struct Conv2DAttrs {
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  std::int64_t kernel_h = 0;
  std::int64_t kernel_w = 0;
  std::int64_t stride = 1;
  std::int64_t padding = 0;

  std::int64_t reduction() const { return in_channels * kernel_h * kernel_w; }
  bool operator==(const Conv2DAttrs&) const = default;
};

struct DenseAttrs {
  std::int64_t in_features = 0;
  std::int64_t out_features = 0;
  bool operator==(const DenseAttrs&) const = default;
};

struct PoolAttrs {
  std::int64_t window = 0;
  std::int64_t stride = 1;
  bool operator==(const PoolAttrs&) const = default;
};

using LayerAttrs = std::variant<std::monostate, Conv2DAttrs, DenseAttrs, PoolAttrs>;

struct Layer {
  std::string id;
  OpKind op = OpKind::ReLU;
  LayerAttrs attrs;
  std::vector<std::string> inputs;
  std::optional<std::string> weights;
  /// Requantization right-shift applied to int32 accumulators.
  int shift = 0;
  /// ReLU absorbed by operator fusion (Conv2D / Dense only).
  bool relu_epilogue = false;
  /// Filled in by validation.
  TensorShape output_shape;

  const Conv2DAttrs& conv() const { return std::get<Conv2DAttrs>(attrs); }
  const DenseAttrs& dense() const { return std::get<DenseAttrs>(attrs); }
  const PoolAttrs& pool() const { return std::get<PoolAttrs>(attrs); }

  bool operator==(const Layer&) const = default;
};

struct ModelGraph {
  /// Topologically ordered.
  std::vector<Layer> layers;
  TensorShape input_shape;
  /// Blob name -> byte count, in declaration order (the blob file order).
  std::vector<std::pair<std::string, std::uint64_t>> weight_sizes;
  /// Weight blob path, resolved against the model file's directory.
  std::filesystem::path weights_file;

  const Layer* find(std::string_view id) const;
  const Layer& output() const { return layers.back(); }
  /// Shape of a named tensor: a layer id or kGraphInput.
  const TensorShape& shape_of(std::string_view id) const;
  /// Ids of layers that list `id` among their inputs, in layer order.
  std::vector<std::string> consumers(std::string_view id) const;
  std::optional<std::uint64_t> weight_size(std::string_view blob) const;

  bool operator==(const ModelGraph&) const = default;
};

/// Sort layers topologically (stable w.r.t. file order), infer every output
/// shape and check all graph invariants. Throws ValidationError naming the
/// offending layer.
ModelGraph validate(ModelGraph g);

/// Parse the JSON interchange format. `base_dir` resolves weights_file.
ModelGraph parse_model(const nlohmann::ordered_json& doc,
                       const std::filesystem::path& base_dir = {});
ModelGraph load_model(const std::filesystem::path& path);

/// Absorb ReLU layers into a sole-consumer Conv2D/Dense producer.
ModelGraph fuse_operators(const ModelGraph& g);

using WeightStore = std::map<std::string, std::vector<std::int8_t>, std::less<>>;

WeightStore load_weights(const ModelGraph& g);
WeightStore load_weights(const ModelGraph& g, const std::filesystem::path& blob);

struct Int8Tensor {
  TensorShape shape;
  std::vector<std::int8_t> data;

  bool operator==(const Int8Tensor&) const = default;
};

std::int8_t saturate_int8(std::int32_t acc, int shift);

/// Layer-by-layer int8 inference with int32 accumulation.
Int8Tensor execute_reference(const ModelGraph& g, const Int8Tensor& input,
                             const WeightStore& weights);

}  // namespace rtdeploy
