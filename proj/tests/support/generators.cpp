// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtdeploy/error.hpp"

namespace rtdeploy::testing {

namespace {

std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

struct Tensor {
  std::string name;
  TensorShape shape;
};

}  // namespace

ModelGraph random_model(Rng& rng, const RandomModelOptions& opt) {
  ModelGraph g;
  if (coin(rng, 0.75)) {
    g.input_shape.dims = {pick(rng, 1, opt.max_spatial), pick(rng, 1, opt.max_spatial),
                          pick(rng, 1, opt.max_channels)};
  } else {
    g.input_shape.dims = {pick(rng, 1, opt.max_features)};
  }

  std::vector<Tensor> seen{{std::string(kGraphInput), g.input_shape}};
  Tensor cur = seen.front();
  const auto n_layers = pick(rng, opt.min_layers, opt.max_layers);
  for (std::int64_t i = 0; i < n_layers; ++i) {
    Layer l;
    l.id = "l" + std::to_string(i);
    l.inputs = {cur.name};
    l.shift = static_cast<int>(pick(rng, 0, 6));
    TensorShape out = cur.shape;
    const bool spatial = cur.shape.dims.size() == 3;

    enum { kConv, kDense, kRelu, kPool, kAdd, kFlatten } op;
    const auto roll = pick(rng, 0, 99);
    if (spatial) {
      const auto h = cur.shape.dims[0], w = cur.shape.dims[1];
      if (roll < 40) op = kConv;
      else if (roll < 55) op = kRelu;
      else if (roll < 70 && h >= 2 && w >= 2) op = kPool;
      else if (roll < 85) op = kAdd;
      else op = kFlatten;
    } else {
      op = roll < 55 ? kDense : roll < 80 ? kRelu : kAdd;
    }

    switch (op) {
      case kConv: {
        Conv2DAttrs a;
        a.in_channels = cur.shape.channels();
        a.out_channels = pick(rng, 1, opt.max_channels);
        const auto h = cur.shape.dims[0], w = cur.shape.dims[1];
        a.kernel_h = pick(rng, 1, 3);
        a.kernel_w = coin(rng, 0.8) ? a.kernel_h : pick(rng, 1, 3);
        a.padding = pick(rng, 0, std::max(a.kernel_h, a.kernel_w) - 1);
        a.stride = pick(rng, 1, 2);
        if (h + 2 * a.padding < a.kernel_h || w + 2 * a.padding < a.kernel_w) {
          a.kernel_h = a.kernel_w = 1;
          a.padding = 0;
        }
        out.dims = {(h + 2 * a.padding - a.kernel_h) / a.stride + 1,
                    (w + 2 * a.padding - a.kernel_w) / a.stride + 1, a.out_channels};
        l.op = OpKind::Conv2D;
        l.attrs = a;
        l.weights = l.id + ".w";
        g.weight_sizes.emplace_back(*l.weights,
                                    static_cast<std::uint64_t>(a.out_channels * a.reduction()));
        l.relu_epilogue = coin(rng, opt.epilogue_chance);
        break;
      }
      case kDense: {
        DenseAttrs a{cur.shape.elements(), pick(rng, 1, opt.max_features)};
        out.dims = {a.out_features};
        l.op = OpKind::Dense;
        l.attrs = a;
        l.weights = l.id + ".w";
        g.weight_sizes.emplace_back(*l.weights,
                                    static_cast<std::uint64_t>(a.in_features * a.out_features));
        l.relu_epilogue = coin(rng, opt.epilogue_chance);
        break;
      }
      case kRelu:
        l.op = OpKind::ReLU;
        l.shift = 0;
        break;
      case kPool: {
        PoolAttrs a;
        const auto h = cur.shape.dims[0], w = cur.shape.dims[1];
        a.window = std::min<std::int64_t>({pick(rng, 2, 3), h, w});
        a.stride = coin(rng, 0.7) ? a.window : 1;
        out.dims = {(h - a.window) / a.stride + 1, (w - a.window) / a.stride + 1, cur.shape.channels()};
        l.op = OpKind::MaxPool2D;
        l.attrs = a;
        l.shift = 0;
        break;
      }
      case kAdd: {
        std::vector<const Tensor*> partners;
        for (const auto& t : seen)
          if (t.shape == cur.shape && t.name != cur.name) partners.push_back(&t);
        const Tensor* other = partners.empty() || coin(rng, 0.2)
                                  ? &cur
                                  : partners[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(partners.size()) - 1))];
        l.inputs = {cur.name, other->name};
        if (coin(rng, 0.5)) std::swap(l.inputs[0], l.inputs[1]);
        l.op = OpKind::ElementwiseAdd;
        l.shift = static_cast<int>(pick(rng, 0, 1));
        break;
      }
      case kFlatten:
        out.dims = {cur.shape.elements()};
        l.op = OpKind::Flatten;
        l.shift = 0;
        break;
    }
    g.layers.push_back(l);
    cur = {l.id, out};
    seen.push_back(cur);
  }
  return validate(std::move(g));
}

WeightStore random_weights(const ModelGraph& g, Rng& rng) {
  WeightStore store;
  std::uniform_int_distribution<int> d(-6, 6);
  for (const auto& [name, bytes] : g.weight_sizes) {
    auto& w = store[name];
    w.resize(bytes);
    for (auto& v : w) v = static_cast<std::int8_t>(d(rng));
  }
  return store;
}

Int8Tensor random_input(const TensorShape& shape, Rng& rng) {
  Int8Tensor t{shape, std::vector<std::int8_t>(static_cast<std::size_t>(shape.elements()))};
  std::uniform_int_distribution<int> d(-128, 127);
  for (auto& v : t.data) v = static_cast<std::int8_t>(d(rng));
  return t;
}

HardwareConfig random_hw(Rng& rng, const RandomHwOptions& opt) {
  HardwareConfig hw;
  hw.n_cores = static_cast<int>(pick(rng, 1, opt.max_cores));
  const double lo = std::log2(static_cast<double>(opt.min_spm));
  const double hi = std::log2(static_cast<double>(opt.max_spm));
  hw.spm_data_bytes = static_cast<std::uint64_t>(std::exp2(std::uniform_real_distribution<double>(lo, hi)(rng)));
  hw.vlen_bits = static_cast<int>(32 << pick(rng, 0, 4));
  hw.sew_bits = 8;
  hw.bus_bytes_per_cycle = static_cast<std::uint64_t>(4 << pick(rng, 0, 2));
  hw.dma_setup_cycles = static_cast<std::uint64_t>(pick(rng, 1, 40));
  hw.dram_latency_cycles = static_cast<std::uint64_t>(pick(rng, 1, 60));
  hw.gemm_c0 = static_cast<std::uint64_t>(pick(rng, 10, 300));
  hw.gemm_c1 = static_cast<std::uint64_t>(pick(rng, 1, 3));
  hw.stream_c1 = static_cast<std::uint64_t>(pick(rng, 1, 2));
  hw.spm_instr_bytes = 65536;
  hw.program_image_bytes = static_cast<std::uint64_t>(pick(rng, 64, 4096));
  hw.include_program_load = coin(rng, opt.program_load_chance);
  if (coin(rng, 0.3)) hw.tile_budget_bytes = hw.spm_data_bytes / static_cast<std::uint64_t>(pick(rng, 2, 4));
  return hw;
}

std::optional<Pipeline> random_pipeline(Rng& rng, std::size_t max_subtasks, const RandomModelOptions& mopt,
                                        const RandomHwOptions& hopt) {
  Pipeline p;
  p.model = random_model(rng, mopt);
  p.hw = random_hw(rng, hopt);
  try {
    const ModelGraph fused = fuse_operators(p.model);
    const SubtaskGraph sg = build_subtask_graph(fused, p.hw);
    if (sg.subtasks.size() > max_subtasks) return std::nullopt;
    p.compiled = compile_pipeline(p.model, p.hw);
  } catch (const InfeasibleBudgetError&) {
    return std::nullopt;
  } catch (const SpmOverflowError&) {
    return std::nullopt;
  }
  return p;
}

ChainExample chain_example() {
  ChainExample ex;
  auto& sg = ex.sg;
  // Layer a streams 100 B of graph input; layer b loads 800 B of weights.
  sg.layers = {{"a", GemmDims{1, 64, 1, 1}, {1}}, {"b", GemmDims{1, 8, 100, 0}, {2}}};
  Subtask s1;
  s1.id = 1;
  s1.layer_id = "a";
  s1.tile = {0, 1, 0, 64};
  s1.dram_in_bytes = 100;
  s1.spm_footprint_bytes = 1000;
  s1.out_bytes = 64;
  Subtask s2;
  s2.id = 2;
  s2.layer_id = "b";
  s2.tile = {0, 1, 0, 8};
  s2.dram_in_bytes = 800;
  s2.weight_bytes = 800;
  s2.spm_footprint_bytes = 2000;
  s2.out_bytes = 128;
  sg.subtasks = {s1, s2};
  sg.edges = {{kDramNode, 1, 100}, {kDramNode, 2, 800}, {1, 2, 64}, {2, kDramNode, 128}};
  sg.input_bytes = 100;
  sg.output_bytes = 128;

  ex.hw = HardwareConfig{};
  ex.mapping.n_cores = ex.hw.n_cores;
  ex.mapping.load_cap = 2;
  ex.mapping.core_of = {-1, 0, 0};
  ex.costs.resize(3);
  ex.costs[1].wcet_cycles = 1000;
  ex.costs[1].derived_from.model = "override";
  ex.costs[2].wcet_cycles = 2000;
  ex.costs[2].derived_from.model = "override";
  return ex;
}

}  // namespace rtdeploy::testing
