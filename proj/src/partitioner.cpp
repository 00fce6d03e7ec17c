// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/partitioner.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "rtdeploy/error.hpp"

namespace rtdeploy {

std::uint64_t tile_footprint(const GemmDims& d, std::int64_t mt, std::int64_t nt) {
  const auto m = static_cast<std::uint64_t>(mt);
  const auto n = static_cast<std::uint64_t>(nt);
  if (d.streaming()) return (static_cast<std::uint64_t>(d.fan_in) + 1) * m * n;
  const auto k = static_cast<std::uint64_t>(d.k);
  return m * k + k * n + 4 * m * n;
}

std::optional<GemmDims> lower_to_gemm(const Layer& layer) {
  const auto& out = layer.output_shape;
  switch (layer.op) {
    case OpKind::Conv2D:
      return GemmDims{out.pixels(), layer.conv().out_channels, layer.conv().reduction(), 0};
    case OpKind::Dense:
      return GemmDims{1, layer.dense().out_features, layer.dense().in_features, 0};
    case OpKind::ElementwiseAdd:
      return GemmDims{out.pixels(), out.channels(), 1, 2};
    case OpKind::MaxPool2D:
      return GemmDims{out.pixels(), out.channels(), 1, layer.pool().window * layer.pool().window};
    case OpKind::ReLU:
      return GemmDims{out.pixels(), out.channels(), 1, 1};
    case OpKind::Flatten:
      return std::nullopt;
  }
  throw ValidationError("partitioner", "unsupported op at " + layer.id);
}

std::vector<TileExtent> tile_layer(const GemmDims& dims, std::uint64_t budget_bytes, int lanes) {
  if (lanes < 1) throw std::invalid_argument("tile_layer: lanes must be >= 1");
  if (dims.m < 1 || dims.n < 1 || dims.k < 1)
    throw std::invalid_argument("tile_layer: GEMM dims must be >= 1");

  const std::int64_t min_nt = std::min<std::int64_t>(dims.n, lanes);
  const std::uint64_t required = tile_footprint(dims, 1, min_nt);
  if (required > budget_bytes) {
    throw InfeasibleBudgetError("tile budget " + std::to_string(budget_bytes) +
                                    " B is below the minimum tile footprint " +
                                    std::to_string(required) + " B",
                                required);
  }

  std::int64_t nt = dims.n;
  if (dims.n >= lanes) {
    nt = dims.n / lanes * lanes;
    while (nt > lanes && tile_footprint(dims, 1, nt) > budget_bytes) nt -= lanes;
  }

  // Footprint is affine in mt: fixed + mt * per_row.
  const std::uint64_t fixed = tile_footprint(dims, 0, nt);
  const std::uint64_t per_row = tile_footprint(dims, 1, nt) - fixed;
  const auto fit = static_cast<std::int64_t>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(dims.m), (budget_bytes - fixed) / per_row));
  const std::int64_t mt = std::max<std::int64_t>(fit, 1);

  std::vector<TileExtent> tiles;
  for (std::int64_t m0 = 0; m0 < dims.m; m0 += mt) {
    for (std::int64_t n0 = 0; n0 < dims.n; n0 += nt) {
      tiles.push_back({m0, std::min(mt, dims.m - m0), n0, std::min(nt, dims.n - n0)});
    }
  }
  return tiles;
}

const GemmDims& SubtaskGraph::dims_of(const Subtask& s) const {
  return layers.at(layer_index(s)).dims;
}

std::size_t SubtaskGraph::layer_index(const Subtask& s) const {
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].layer_id == s.layer_id) return i;
  throw std::out_of_range("subtask " + std::to_string(s.id) + " has unknown layer " + s.layer_id);
}

namespace {

// Tensor a consumer operand really reads: a compute layer's output or the
// graph input, seen through any chain of Flatten views.
struct Source {
  const Layer* layer = nullptr;
  bool flattened = false;

  bool operator==(const Source& o) const { return layer == o.layer; }
};

Source resolve(const ModelGraph& g, const std::string& name) {
  Source src;
  std::string cur = name;
  while (cur != kGraphInput) {
    const Layer* l = g.find(cur);
    if (l->op != OpKind::Flatten) {
      src.layer = l;
      return src;
    }
    src.flattened = true;
    cur = l->inputs[0];
  }
  return src;
}

const TensorShape& source_shape(const ModelGraph& g, const Source& s) {
  return s.layer ? s.layer->output_shape : g.input_shape;
}

struct Spatial {
  std::int64_t h, w;
};

Spatial spatial_hw(const TensorShape& s) {
  const auto r = s.dims.size();
  return {s.dims[r - 3], s.dims[r - 2]};
}

// Elements of a source tensor read by one consumer tile. Either a pixel set
// times a channel interval, or an interval over the NHWC-flattened index.
class ReadSet {
 public:
  static ReadSet pixels(std::vector<std::uint8_t> mask, std::int64_t c0, std::int64_t c1) {
    ReadSet r;
    r.prefix_.assign(mask.size() + 1, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) r.prefix_[i + 1] = r.prefix_[i] + mask[i];
    r.lo_ = c0;
    r.hi_ = c1;
    return r;
  }

  static ReadSet flat(std::int64_t f0, std::int64_t f1) {
    ReadSet r;
    r.flat_ = true;
    r.lo_ = f0;
    r.hi_ = f1;
    return r;
  }

  std::uint64_t size() const {
    if (flat_) return static_cast<std::uint64_t>(hi_ - lo_);
    return static_cast<std::uint64_t>(prefix_.back() * (hi_ - lo_));
  }

  /// Elements shared with the producer rectangle of pixels [a,b) x channels
  /// [c,d) on a tensor with `channels` channels.
  std::uint64_t overlap(const TileExtent& t, std::int64_t channels) const {
    const auto a = t.m0, b = t.m0 + t.mt, c = t.n0, d = t.n0 + t.nt;
    if (!flat_) {
      const auto ch = std::min(d, hi_) - std::max(c, lo_);
      if (ch <= 0) return 0;
      return static_cast<std::uint64_t>((prefix_[static_cast<std::size_t>(b)] -
                                         prefix_[static_cast<std::size_t>(a)]) * ch);
    }
    std::uint64_t total = 0;
    const auto p_first = std::max(a, lo_ / channels);
    const auto p_last = std::min(b, (hi_ + channels - 1) / channels);
    for (auto p = p_first; p < p_last; ++p) {
      const auto run = std::min(p * channels + d, hi_) - std::max(p * channels + c, lo_);
      if (run > 0) total += static_cast<std::uint64_t>(run);
    }
    return total;
  }

 private:
  bool flat_ = false;
  std::vector<std::int64_t> prefix_;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
};

// Input pixels touched by sliding a kh x kw window over output pixels
// [m0, m0+mt).
std::vector<std::uint8_t> window_mask(const TensorShape& in, const TensorShape& out,
                                      std::int64_t m0, std::int64_t mt, std::int64_t kh,
                                      std::int64_t kw, std::int64_t stride, std::int64_t pad) {
  const auto src = spatial_hw(in);
  const auto dst = spatial_hw(out);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(src.h * src.w), 0);
  for (auto q = m0; q < m0 + mt; ++q) {
    const auto oh = q / dst.w, ow = q % dst.w;
    for (std::int64_t r = 0; r < kh; ++r) {
      const auto ih = oh * stride - pad + r;
      if (ih < 0 || ih >= src.h) continue;
      for (std::int64_t c = 0; c < kw; ++c) {
        const auto iw = ow * stride - pad + c;
        if (iw < 0 || iw >= src.w) continue;
        mask[static_cast<std::size_t>(ih * src.w + iw)] = 1;
      }
    }
  }
  return mask;
}

ReadSet read_set(const ModelGraph& g, const Layer& consumer, const TileExtent& t,
                 const Source& src) {
  const TensorShape& in = source_shape(g, src);
  const auto pixels = in.pixels();
  switch (consumer.op) {
    case OpKind::Conv2D: {
      const auto& a = consumer.conv();
      return ReadSet::pixels(window_mask(in, consumer.output_shape, t.m0, t.mt, a.kernel_h,
                                         a.kernel_w, a.stride, a.padding),
                             0, in.channels());
    }
    case OpKind::MaxPool2D: {
      const auto& a = consumer.pool();
      return ReadSet::pixels(window_mask(in, consumer.output_shape, t.m0, t.mt, a.window,
                                         a.window, a.stride, 0),
                             t.n0, t.n0 + t.nt);
    }
    case OpKind::Dense:
      if (src.flattened) return ReadSet::flat(0, in.elements());
      return ReadSet::pixels(std::vector<std::uint8_t>(static_cast<std::size_t>(pixels), 1), 0,
                             in.channels());
    case OpKind::ElementwiseAdd:
    case OpKind::ReLU: {
      if (src.flattened) return ReadSet::flat(t.n0, t.n0 + t.nt);
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(pixels), 0);
      std::fill(mask.begin() + t.m0, mask.begin() + t.m0 + t.mt, 1);
      return ReadSet::pixels(std::move(mask), t.n0, t.n0 + t.nt);
    }
    case OpKind::Flatten:
      break;
  }
  throw ValidationError("partitioner", "no read set for " + consumer.id);
}

}  // namespace

SubtaskGraph build_subtask_graph(const ModelGraph& g, const HardwareConfig& hw) {
  SubtaskGraph sg;
  sg.input_bytes = g.input_shape.bytes();
  sg.output_bytes = g.output().output_shape.bytes();
  std::map<const Layer*, std::size_t> tiling_of;

  for (const auto& layer : g.layers) {
    auto dims = lower_to_gemm(layer);
    if (!dims) continue;
    std::vector<TileExtent> tiles;
    try {
      tiles = tile_layer(*dims, hw.tile_budget(), hw.lanes());
    } catch (const InfeasibleBudgetError& e) {
      throw InfeasibleBudgetError("layer " + layer.id + ": " + e.what(), e.required_bytes());
    }
    LayerTiling lt{layer.id, *dims, {}};
    for (const auto& t : tiles) {
      Subtask s;
      s.id = static_cast<int>(sg.subtasks.size()) + 1;
      s.layer_id = layer.id;
      s.tile = t;
      s.spm_footprint_bytes = tile_footprint(*dims, t.mt, t.nt);
      s.out_bytes = static_cast<std::uint64_t>(t.mt * t.nt);
      if (!dims->streaming()) s.weight_bytes = static_cast<std::uint64_t>(dims->k * t.nt);
      lt.subtasks.push_back(s.id);
      sg.subtasks.push_back(std::move(s));
    }
    tiling_of[&layer] = sg.layers.size();
    sg.layers.push_back(std::move(lt));
  }

  for (const auto& layer : g.layers) {
    auto it = tiling_of.find(&layer);
    if (it == tiling_of.end()) continue;
    std::vector<Source> sources;
    for (const auto& name : layer.inputs) {
      Source s = resolve(g, name);
      if (std::find(sources.begin(), sources.end(), s) == sources.end()) sources.push_back(s);
    }
    for (int id : sg.layers[it->second].subtasks) {
      Subtask& consumer = sg.subtasks[static_cast<std::size_t>(id - 1)];
      std::uint64_t from_dram = consumer.weight_bytes;
      std::vector<SubtaskEdge> incoming;
      for (const auto& src : sources) {
        const ReadSet rs = read_set(g, layer, consumer.tile, src);
        if (!src.layer) {
          from_dram += rs.size();
          continue;
        }
        const auto channels = src.layer->output_shape.channels();
        for (int pid : sg.layers[tiling_of.at(src.layer)].subtasks) {
          const auto bytes = rs.overlap(sg.subtask(pid).tile, channels);
          if (bytes > 0) incoming.push_back({pid, id, bytes});
        }
      }
      consumer.dram_in_bytes = from_dram;
      if (from_dram > 0) sg.edges.push_back({kDramNode, id, from_dram});
      sg.edges.insert(sg.edges.end(), incoming.begin(), incoming.end());
    }
  }

  const Source out = resolve(g, g.output().id);
  if (out.layer) {
    for (int id : sg.layers[tiling_of.at(out.layer)].subtasks)
      sg.edges.push_back({id, kDramNode, sg.subtask(id).out_bytes});
  }
  return sg;
}

}  // namespace rtdeploy
