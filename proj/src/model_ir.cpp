// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/model_ir.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rtdeploy/error.hpp"

namespace rtdeploy {

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw ValidationError("model_ir", msg);
}

[[noreturn]] void parse_fail(const std::string& msg) {
  throw ParseError("model_ir", msg);
}

std::int64_t checked_product(const std::vector<std::int64_t>& dims) {
  std::int64_t p = 1;
  for (auto d : dims) {
    if (__builtin_mul_overflow(p, d, &p)) invalid("tensor size overflows 63 bits");
  }
  return p;
}

struct Spatial {
  std::int64_t h, w, c;
};

// Accepts H,W,C or 1,H,W,C.
std::optional<Spatial> spatial(const TensorShape& s) {
  if (s.dims.size() == 3) return Spatial{s.dims[0], s.dims[1], s.dims[2]};
  if (s.dims.size() == 4 && s.dims[0] == 1)
    return Spatial{s.dims[1], s.dims[2], s.dims[3]};
  return std::nullopt;
}

TensorShape with_spatial(const TensorShape& like, std::int64_t h, std::int64_t w,
                         std::int64_t c) {
  TensorShape out;
  if (like.dims.size() == 4) out.dims = {1, h, w, c};
  else out.dims = {h, w, c};
  return out;
}

void expect_arity(const Layer& l, std::size_t n) {
  if (l.inputs.size() != n) {
    invalid(std::string(to_string(l.op)) + " expects " + std::to_string(n) +
            " input(s) at " + l.id);
  }
}

void require_positive(const Layer& l, std::int64_t v, const char* name) {
  if (v < 1) invalid(std::string("attribute ") + name + " must be >= 1 at " + l.id);
}

std::uint64_t expected_weight_bytes(const Layer& l) {
  if (l.op == OpKind::Conv2D) {
    const auto& a = l.conv();
    return static_cast<std::uint64_t>(a.out_channels * a.reduction());
  }
  const auto& a = l.dense();
  return static_cast<std::uint64_t>(a.in_features * a.out_features);
}

TensorShape infer_shape(const Layer& l, const std::vector<const TensorShape*>& in) {
  auto mismatch = [&]() -> TensorShape { invalid("shape mismatch at " + l.id); };
  switch (l.op) {
    case OpKind::Conv2D: {
      const auto& a = l.conv();
      require_positive(l, a.in_channels, "in_channels");
      require_positive(l, a.out_channels, "out_channels");
      require_positive(l, a.kernel_h, "kernel_h");
      require_positive(l, a.kernel_w, "kernel_w");
      require_positive(l, a.stride, "stride");
      if (a.padding < 0) invalid("attribute padding must be >= 0 at " + l.id);
      auto s = spatial(*in[0]);
      if (!s || s->c != a.in_channels) return mismatch();
      if (s->h + 2 * a.padding < a.kernel_h || s->w + 2 * a.padding < a.kernel_w)
        return mismatch();
      const auto ho = (s->h + 2 * a.padding - a.kernel_h) / a.stride + 1;
      const auto wo = (s->w + 2 * a.padding - a.kernel_w) / a.stride + 1;
      return with_spatial(*in[0], ho, wo, a.out_channels);
    }
    case OpKind::Dense: {
      const auto& a = l.dense();
      require_positive(l, a.in_features, "in_features");
      require_positive(l, a.out_features, "out_features");
      if (in[0]->dims.size() != 1 || in[0]->dims[0] != a.in_features) return mismatch();
      return TensorShape{{a.out_features}, 1};
    }
    case OpKind::ReLU:
      return TensorShape{in[0]->dims, 1};
    case OpKind::ElementwiseAdd:
      if (in[0]->dims != in[1]->dims) return mismatch();
      return TensorShape{in[0]->dims, 1};
    case OpKind::MaxPool2D: {
      const auto& a = l.pool();
      require_positive(l, a.window, "window");
      require_positive(l, a.stride, "stride");
      auto s = spatial(*in[0]);
      if (!s || s->h < a.window || s->w < a.window) return mismatch();
      return with_spatial(*in[0], (s->h - a.window) / a.stride + 1,
                          (s->w - a.window) / a.stride + 1, s->c);
    }
    case OpKind::Flatten:
      return TensorShape{{in[0]->elements()}, 1};
  }
  invalid("unknown op at " + l.id);
}

std::int64_t get_int(const nlohmann::ordered_json& obj, const char* key,
                     const std::string& where, std::optional<std::int64_t> dflt = {}) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (dflt) return *dflt;
    parse_fail(std::string("missing attribute '") + key + "' at " + where);
  }
  if (!it->is_number_integer())
    parse_fail(std::string("attribute '") + key + "' must be an integer at " + where);
  return it->get<std::int64_t>();
}

}  // namespace

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::Conv2D: return "Conv2D";
    case OpKind::Dense: return "Dense";
    case OpKind::ReLU: return "ReLU";
    case OpKind::ElementwiseAdd: return "ElementwiseAdd";
    case OpKind::MaxPool2D: return "MaxPool2D";
    case OpKind::Flatten: return "Flatten";
  }
  return "?";
}

std::optional<OpKind> op_from_string(std::string_view name) {
  for (auto op : {OpKind::Conv2D, OpKind::Dense, OpKind::ReLU, OpKind::ElementwiseAdd,
                  OpKind::MaxPool2D, OpKind::Flatten}) {
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

std::int64_t TensorShape::elements() const { return checked_product(dims); }

std::uint64_t TensorShape::bytes() const {
  return static_cast<std::uint64_t>(elements()) * static_cast<std::uint64_t>(elem_bytes);
}

std::string to_string(const TensorShape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s.dims[i]);
  }
  return out;
}

const Layer* ModelGraph::find(std::string_view id) const {
  for (const auto& l : layers)
    if (l.id == id) return &l;
  return nullptr;
}

const TensorShape& ModelGraph::shape_of(std::string_view id) const {
  if (id == kGraphInput) return input_shape;
  const Layer* l = find(id);
  if (!l) invalid("dangling reference '" + std::string(id) + "'");
  return l->output_shape;
}

std::vector<std::string> ModelGraph::consumers(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& l : layers) {
    for (const auto& in : l.inputs) {
      if (in == id) out.push_back(l.id);
    }
  }
  return out;
}

std::optional<std::uint64_t> ModelGraph::weight_size(std::string_view blob) const {
  for (const auto& [name, bytes] : weight_sizes)
    if (name == blob) return bytes;
  return std::nullopt;
}

ModelGraph validate(ModelGraph g) {
  if (g.layers.empty()) invalid("empty graph");
  if (g.input_shape.dims.empty() || g.input_shape.dims.size() > 4)
    invalid("graph input must have 1 to 4 dims");
  for (auto d : g.input_shape.dims)
    if (d < 1) invalid("graph input dims must be >= 1");
  g.input_shape.elements();

  std::set<std::string, std::less<>> ids;
  for (const auto& l : g.layers) {
    if (l.id.empty() || l.id == kGraphInput) invalid("invalid layer id '" + l.id + "'");
    if (!ids.insert(l.id).second) invalid("duplicate layer id " + l.id);
  }
  for (const auto& l : g.layers) {
    for (const auto& in : l.inputs) {
      if (in != kGraphInput && !ids.count(in))
        invalid("dangling reference at " + l.id + ": '" + in + "'");
    }
  }

  // Kahn's algorithm, always taking the earliest ready layer in file order.
  std::vector<Layer> ordered;
  std::vector<bool> done(g.layers.size(), false);
  std::set<std::string, std::less<>> emitted;
  while (ordered.size() < g.layers.size()) {
    bool progress = false;
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
      if (done[i]) continue;
      const auto& l = g.layers[i];
      bool ready = std::all_of(l.inputs.begin(), l.inputs.end(), [&](const std::string& in) {
        return in == kGraphInput || emitted.count(in);
      });
      if (!ready) continue;
      done[i] = true;
      emitted.insert(l.id);
      ordered.push_back(l);
      progress = true;
      break;
    }
    if (!progress) {
      for (std::size_t i = 0; i < g.layers.size(); ++i)
        if (!done[i]) invalid("cycle at " + g.layers[i].id);
    }
  }
  g.layers = std::move(ordered);

  bool input_used = false;
  for (auto& l : g.layers) {
    const bool needs_weights = l.op == OpKind::Conv2D || l.op == OpKind::Dense;
    switch (l.op) {
      case OpKind::Conv2D:
        if (!std::holds_alternative<Conv2DAttrs>(l.attrs)) invalid("missing Conv2D attrs at " + l.id);
        expect_arity(l, 1);
        break;
      case OpKind::Dense:
        if (!std::holds_alternative<DenseAttrs>(l.attrs)) invalid("missing Dense attrs at " + l.id);
        expect_arity(l, 1);
        break;
      case OpKind::MaxPool2D:
        if (!std::holds_alternative<PoolAttrs>(l.attrs)) invalid("missing MaxPool2D attrs at " + l.id);
        expect_arity(l, 1);
        break;
      case OpKind::ElementwiseAdd:
        expect_arity(l, 2);
        break;
      case OpKind::ReLU:
      case OpKind::Flatten:
        expect_arity(l, 1);
        break;
    }
    if (l.relu_epilogue && !needs_weights) invalid("relu epilogue on non-GEMM layer " + l.id);
    if (needs_weights) {
      if (!l.weights) invalid("missing weights at " + l.id);
      auto declared = g.weight_size(*l.weights);
      if (!declared) invalid("undeclared weight blob '" + *l.weights + "' at " + l.id);
      if (*declared != expected_weight_bytes(l)) {
        invalid("weight size mismatch at " + l.id + ": declared " + std::to_string(*declared) +
                ", expected " + std::to_string(expected_weight_bytes(l)));
      }
    } else if (l.weights) {
      invalid("unexpected weights at " + l.id);
    }

    std::vector<const TensorShape*> in;
    for (const auto& name : l.inputs) {
      input_used |= name == kGraphInput;
      in.push_back(&g.shape_of(name));
    }
    l.output_shape = infer_shape(l, in);
    l.output_shape.elements();
  }
  if (!input_used) invalid("graph input is never consumed");

  std::vector<std::string> sinks;
  for (const auto& l : g.layers)
    if (g.consumers(l.id).empty()) sinks.push_back(l.id);
  if (sinks.size() != 1) {
    std::string names;
    for (const auto& s : sinks) names += (names.empty() ? "" : ", ") + s;
    invalid("expected exactly one graph output, found: " + names);
  }
  return g;
}

ModelGraph parse_model(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir) {
  ModelGraph g;
  try {
    if (!doc.is_object()) parse_fail("model root must be an object");
    const auto& input = doc.at("input");
    g.input_shape.dims = input.at("dims").get<std::vector<std::int64_t>>();
    g.input_shape.elem_bytes = static_cast<int>(input.value("elem_bytes", 1));

    if (doc.contains("weight_sizes")) {
      for (const auto& [name, bytes] : doc.at("weight_sizes").items())
        g.weight_sizes.emplace_back(name, bytes.get<std::uint64_t>());
    }
    if (doc.contains("weights_file")) {
      g.weights_file = base_dir / doc.at("weights_file").get<std::string>();
    }

    for (const auto& jl : doc.at("layers")) {
      Layer l;
      l.id = jl.at("id").get<std::string>();
      const auto op_name = jl.at("op").get<std::string>();
      auto op = op_from_string(op_name);
      if (!op) invalid("unknown op '" + op_name + "' at " + l.id);
      l.op = *op;
      l.inputs = jl.at("inputs").get<std::vector<std::string>>();
      if (jl.contains("weights") && !jl.at("weights").is_null())
        l.weights = jl.at("weights").get<std::string>();

      static const nlohmann::ordered_json kNoAttrs = nlohmann::ordered_json::object();
      const auto& a = jl.contains("attrs") ? jl.at("attrs") : kNoAttrs;
      switch (l.op) {
        case OpKind::Conv2D: {
          Conv2DAttrs c;
          c.in_channels = get_int(a, "in_channels", l.id);
          c.out_channels = get_int(a, "out_channels", l.id);
          if (a.contains("kernel")) {
            c.kernel_h = c.kernel_w = get_int(a, "kernel", l.id);
          } else {
            c.kernel_h = get_int(a, "kernel_h", l.id);
            c.kernel_w = get_int(a, "kernel_w", l.id);
          }
          c.stride = get_int(a, "stride", l.id, 1);
          c.padding = get_int(a, "padding", l.id, 0);
          l.attrs = c;
          break;
        }
        case OpKind::Dense:
          l.attrs = DenseAttrs{get_int(a, "in_features", l.id), get_int(a, "out_features", l.id)};
          break;
        case OpKind::MaxPool2D: {
          PoolAttrs p;
          p.window = get_int(a, "window", l.id);
          p.stride = get_int(a, "stride", l.id, p.window);
          l.attrs = p;
          break;
        }
        default:
          break;
      }
      l.shift = static_cast<int>(get_int(a, "shift", l.id, 0));
      if (l.shift < 0 || l.shift > 31) invalid("shift must be in [0, 31] at " + l.id);
      l.relu_epilogue = a.value("relu", false);
      g.layers.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    parse_fail(std::string("malformed model: ") + e.what());
  }
  return validate(std::move(g));
}

ModelGraph load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open model file " + path.string());
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    parse_fail("malformed model file " + path.string() + ": " + e.what());
  }
  return parse_model(doc, path.parent_path());
}

ModelGraph fuse_operators(const ModelGraph& g) {
  ModelGraph out = g;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < out.layers.size(); ++i) {
      const Layer& relu = out.layers[i];
      if (relu.op != OpKind::ReLU || relu.inputs[0] == kGraphInput) continue;
      const std::string producer_id = relu.inputs[0];
      auto producer = std::find_if(out.layers.begin(), out.layers.end(),
                                   [&](const Layer& l) { return l.id == producer_id; });
      if (producer->op != OpKind::Conv2D && producer->op != OpKind::Dense) continue;
      if (out.consumers(producer_id).size() != 1) continue;

      producer->relu_epilogue = true;
      const std::string relu_id = relu.id;
      out.layers.erase(out.layers.begin() + static_cast<std::ptrdiff_t>(i));
      for (auto& l : out.layers) {
        for (auto& in : l.inputs)
          if (in == relu_id) in = producer_id;
      }
      changed = true;
      break;
    }
  }
  return validate(std::move(out));
}

WeightStore load_weights(const ModelGraph& g) { return load_weights(g, g.weights_file); }

WeightStore load_weights(const ModelGraph& g, const std::filesystem::path& blob) {
  WeightStore store;
  if (g.weight_sizes.empty()) return store;
  std::ifstream in(blob, std::ios::binary);
  if (!in) parse_fail("cannot open weight blob " + blob.string());
  for (const auto& [name, bytes] : g.weight_sizes) {
    std::vector<std::int8_t> data(bytes);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::uint64_t>(in.gcount()) != bytes)
      parse_fail("weight blob " + blob.string() + " truncated at '" + name + "'");
    store.emplace(name, std::move(data));
  }
  return store;
}

std::int8_t saturate_int8(std::int32_t acc, int shift) {
  const std::int32_t shifted = acc >> shift;
  return static_cast<std::int8_t>(std::clamp<std::int32_t>(shifted, -128, 127));
}

namespace {

std::int8_t relu(std::int8_t v) { return v < 0 ? std::int8_t{0} : v; }

const std::vector<std::int8_t>& blob_for(const Layer& l, const WeightStore& weights) {
  auto it = weights.find(*l.weights);
  if (it == weights.end()) invalid("missing weight blob '" + *l.weights + "' for " + l.id);
  if (it->second.size() != expected_weight_bytes(l))
    invalid("weight blob '" + *l.weights + "' has wrong size for " + l.id);
  return it->second;
}

Int8Tensor run_conv(const Layer& l, const Int8Tensor& x, const WeightStore& weights) {
  const auto& a = l.conv();
  const auto& w = blob_for(l, weights);
  const auto in = *spatial(x.shape);
  const auto out = *spatial(l.output_shape);
  Int8Tensor y{l.output_shape, std::vector<std::int8_t>(static_cast<std::size_t>(l.output_shape.elements()))};
  for (std::int64_t oh = 0; oh < out.h; ++oh) {
    for (std::int64_t ow = 0; ow < out.w; ++ow) {
      for (std::int64_t co = 0; co < out.c; ++co) {
        std::int32_t acc = 0;
        for (std::int64_t kh = 0; kh < a.kernel_h; ++kh) {
          const auto ih = oh * a.stride - a.padding + kh;
          if (ih < 0 || ih >= in.h) continue;
          for (std::int64_t kw = 0; kw < a.kernel_w; ++kw) {
            const auto iw = ow * a.stride - a.padding + kw;
            if (iw < 0 || iw >= in.w) continue;
            const auto* px = &x.data[static_cast<std::size_t>((ih * in.w + iw) * in.c)];
            const auto* wk = &w[static_cast<std::size_t>(((co * a.kernel_h + kh) * a.kernel_w + kw) * in.c)];
            for (std::int64_t ci = 0; ci < in.c; ++ci) acc += std::int32_t{px[ci]} * wk[ci];
          }
        }
        auto v = saturate_int8(acc, l.shift);
        y.data[static_cast<std::size_t>((oh * out.w + ow) * out.c + co)] = l.relu_epilogue ? relu(v) : v;
      }
    }
  }
  return y;
}

Int8Tensor run_dense(const Layer& l, const Int8Tensor& x, const WeightStore& weights) {
  const auto& a = l.dense();
  const auto& w = blob_for(l, weights);
  Int8Tensor y{l.output_shape, std::vector<std::int8_t>(static_cast<std::size_t>(a.out_features))};
  for (std::int64_t o = 0; o < a.out_features; ++o) {
    std::int32_t acc = 0;
    for (std::int64_t i = 0; i < a.in_features; ++i)
      acc += std::int32_t{x.data[static_cast<std::size_t>(i)]} * w[static_cast<std::size_t>(o * a.in_features + i)];
    auto v = saturate_int8(acc, l.shift);
    y.data[static_cast<std::size_t>(o)] = l.relu_epilogue ? relu(v) : v;
  }
  return y;
}

Int8Tensor run_maxpool(const Layer& l, const Int8Tensor& x) {
  const auto& a = l.pool();
  const auto in = *spatial(x.shape);
  const auto out = *spatial(l.output_shape);
  Int8Tensor y{l.output_shape, std::vector<std::int8_t>(static_cast<std::size_t>(l.output_shape.elements()))};
  for (std::int64_t oh = 0; oh < out.h; ++oh) {
    for (std::int64_t ow = 0; ow < out.w; ++ow) {
      for (std::int64_t c = 0; c < out.c; ++c) {
        std::int8_t best = std::numeric_limits<std::int8_t>::min();
        for (std::int64_t kh = 0; kh < a.window; ++kh) {
          for (std::int64_t kw = 0; kw < a.window; ++kw) {
            const auto ih = oh * a.stride + kh;
            const auto iw = ow * a.stride + kw;
            best = std::max(best, x.data[static_cast<std::size_t>((ih * in.w + iw) * in.c + c)]);
          }
        }
        y.data[static_cast<std::size_t>((oh * out.w + ow) * out.c + c)] = best;
      }
    }
  }
  return y;
}

}  // namespace

Int8Tensor execute_reference(const ModelGraph& g, const Int8Tensor& input,
                             const WeightStore& weights) {
  if (input.shape.dims != g.input_shape.dims ||
      input.data.size() != static_cast<std::size_t>(g.input_shape.elements())) {
    invalid("input shape " + to_string(input.shape) + " does not match graph input " +
            to_string(g.input_shape));
  }
  std::map<std::string, Int8Tensor, std::less<>> values;
  auto value_of = [&](const std::string& id) -> const Int8Tensor& {
    return id == kGraphInput ? input : values.at(id);
  };
  for (const auto& l : g.layers) {
    const Int8Tensor& x = value_of(l.inputs[0]);
    Int8Tensor y;
    switch (l.op) {
      case OpKind::Conv2D: y = run_conv(l, x, weights); break;
      case OpKind::Dense: y = run_dense(l, x, weights); break;
      case OpKind::MaxPool2D: y = run_maxpool(l, x); break;
      case OpKind::ReLU:
        y = x;
        for (auto& v : y.data) v = relu(v);
        break;
      case OpKind::ElementwiseAdd: {
        const Int8Tensor& b = value_of(l.inputs[1]);
        y = x;
        for (std::size_t i = 0; i < y.data.size(); ++i)
          y.data[i] = saturate_int8(std::int32_t{x.data[i]} + b.data[i], l.shift);
        break;
      }
      case OpKind::Flatten:
        y = x;
        break;
    }
    y.shape = l.output_shape;
    values[l.id] = std::move(y);
  }
  return values.at(g.output().id);
}

}  // namespace rtdeploy
