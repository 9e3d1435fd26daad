#include "hgnn/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace hgnn::models {

using diff::Tape;
using diff::Tensor;

std::string arch_name(Arch a) {
  switch (a) {
    case Arch::kGcn: return "gcn";
    case Arch::kSage: return "sage";
    case Arch::kGat: return "gat";
  }
  return "?";
}

std::string geometry_name(Geometry g) {
  return g == Geometry::kEuclidean ? "euclidean" : "hyperbolic";
}

Arch parse_arch(const std::string& s) {
  if (s == "gcn") return Arch::kGcn;
  if (s == "sage") return Arch::kSage;
  if (s == "gat") return Arch::kGat;
  throw InvalidInput("unknown architecture: " + s);
}

Geometry parse_geometry(const std::string& s) {
  if (s == "euclidean") return Geometry::kEuclidean;
  if (s == "hyperbolic") return Geometry::kHyperbolic;
  throw InvalidInput("unknown geometry: " + s);
}

void ModelConfig::validate() const {
  if (layers != 2 && layers != 3)
    throw InvalidInput("layers must be 2 or 3");
  if (hidden_dim <= 0 || classes <= 0 || input_dim <= 0)
    throw InvalidInput("dimensions must be positive");
  if (arch == Arch::kGat && heads * head_dim != hidden_dim)
    throw InvalidInput("heads * head_dim must equal hidden_dim for GAT");
  if (geometry == Geometry::kHyperbolic && !(curvature > 0.0))
    throw InvalidInput("hyperbolic models require positive curvature");
  if (dropout < 0.0 || dropout >= 1.0)
    throw InvalidInput("dropout must be in [0,1)");
}

BatchGraph make_batch(std::span<const graph::EgoSubgraph> subgraphs) {
  if (subgraphs.empty()) throw InvalidInput("make_batch: empty batch");
  std::size_t total = 0;
  const std::size_t fdim = subgraphs.front().features.cols();
  for (const auto& sg : subgraphs) {
    if (sg.features.empty() || sg.features.cols() != fdim)
      throw InvalidInput("make_batch: subgraphs must carry matching features");
    total += sg.num_nodes();
  }

  BatchGraph bg;
  bg.num_nodes = static_cast<int>(total);
  bg.features = Tensor(total, fdim, 0.0);

  std::vector<std::pair<int, int>> undirected;
  int offset = 0;
  for (const auto& sg : subgraphs) {
    bg.seed_rows.push_back(offset);
    bg.labels.push_back(sg.label);
    for (std::size_t i = 0; i < sg.num_nodes(); ++i)
      for (std::size_t j = 0; j < fdim; ++j)
        bg.features.at(offset + i, j) = sg.features.at(i, j);
    for (const auto& [s, d] : sg.edges) {
      if (s == d) continue;
      undirected.emplace_back(offset + s, offset + d);
      undirected.emplace_back(offset + d, offset + s);
    }
    offset += static_cast<int>(sg.num_nodes());
  }
  std::sort(undirected.begin(), undirected.end());
  undirected.erase(std::unique(undirected.begin(), undirected.end()),
                   undirected.end());

  const int n = bg.num_nodes;
  std::vector<int> degree(n, 0);
  for (const auto& [s, d] : undirected) ++degree[s];

  // (src, dst) pairs sorted by target so segment operations see contiguous
  // segments.
  std::vector<std::pair<int, int>> by_dst;
  by_dst.reserve(undirected.size());
  for (const auto& [s, d] : undirected) by_dst.emplace_back(d, s);
  std::sort(by_dst.begin(), by_dst.end());

  bg.nbr.inv_count.assign(n, 0.0);
  for (const auto& [d, s] : by_dst) {
    bg.nbr.src.push_back(s);
    bg.nbr.dst.push_back(d);
  }
  for (int v = 0; v < n; ++v)
    if (degree[v] > 0) bg.nbr.inv_count[v] = 1.0 / degree[v];

  bg.nbr_self.inv_count.assign(n, 0.0);
  {
    auto with_self = by_dst;
    for (int v = 0; v < n; ++v) with_self.emplace_back(v, v);
    std::sort(with_self.begin(), with_self.end());
    for (const auto& [d, s] : with_self) {
      bg.nbr_self.src.push_back(s);
      bg.nbr_self.dst.push_back(d);
    }
    for (int v = 0; v < n; ++v) bg.nbr_self.inv_count[v] = 1.0 / (degree[v] + 1);
  }

  for (std::size_t e = 0; e < bg.nbr_self.src.size(); ++e) {
    const int s = bg.nbr_self.src[e], d = bg.nbr_self.dst[e];
    bg.gcn_src.push_back(s);
    bg.gcn_dst.push_back(d);
    bg.gcn_coef.push_back(1.0 / std::sqrt(static_cast<double>(degree[s] + 1) *
                                          static_cast<double>(degree[d] + 1)));
  }
  return bg;
}

NodeId exp_map0_rows(Tape& t, NodeId v, double c) {
  const auto r = t.row_norm(v);
  const auto arg = t.scale(r, std::sqrt(c));
  const auto th = t.tanh(arg);
  const auto factor = t.div(th, arg);
  return t.ball_clamp(t.row_scale(v, factor), c);
}

NodeId log_map0_rows(Tape& t, NodeId x, double c) {
  const auto r = t.row_norm(x);
  const auto arg = t.scale(r, std::sqrt(c));
  const auto ath = t.atanh_clamped(arg);
  const auto factor = t.div(ath, arg);
  return t.row_scale(x, factor);
}

NodeId poincare_to_klein_rows(Tape& t, NodeId x, double c) {
  const auto r = t.row_norm(x);
  const auto n2 = t.mul(r, r);
  const auto denom = t.add_scalar(t.scale(n2, c), 1.0);
  const auto ones = t.constant(Tensor(t.value(x).rows(), 1, 1.0));
  const auto factor = t.scale(t.div(ones, denom), 2.0);
  return t.row_scale(x, factor);
}

NodeId klein_to_poincare_rows(Tape& t, NodeId k, double c) {
  const auto r = t.row_norm(k);
  const auto n2 = t.mul(r, r);
  const auto root = t.sqrt_clamped(t.add_scalar(t.scale(n2, -c), 1.0));
  const auto denom = t.add_scalar(root, 1.0);
  const auto ones = t.constant(Tensor(t.value(k).rows(), 1, 1.0));
  return t.row_scale(k, t.div(ones, denom));
}

NodeId klein_aggregate(Tape& t, NodeId ball, double c, const AggIndex& agg,
                       int num_nodes) {
  const auto klein = poincare_to_klein_rows(t, ball, c);
  const auto gathered = t.gather_rows(klein, agg.src);
  const auto sums = t.segment_sum(gathered, agg.dst, num_nodes);
  const auto inv = t.constant(
      Tensor::from_rows(agg.inv_count.size(), 1, agg.inv_count));
  const auto mean = t.row_scale(sums, inv);
  return klein_to_poincare_rows(t, mean, c);
}

NodeId pairwise_hyper_distance(Tape& t, NodeId x, NodeId y, double c) {
  const auto diff = t.sub(x, y);
  const auto rd = t.row_norm(diff);
  const auto d2 = t.mul(rd, rd);
  const auto rx = t.row_norm(x);
  const auto x2 = t.mul(rx, rx);
  const auto ry = t.row_norm(y);
  const auto y2 = t.mul(ry, ry);
  const auto ax = t.add_scalar(t.scale(x2, -c), 1.0);
  const auto ay = t.add_scalar(t.scale(y2, -c), 1.0);
  const auto u = t.div(t.scale(d2, 2.0 * c), t.mul(ax, ay));
  return t.scale(t.acosh1p(u), 1.0 / std::sqrt(c));
}

NodeId euclidean_gcn_layer(Tape& t, NodeId h, const BatchGraph& bg, NodeId w) {
  const auto hw = t.matmul(h, w);
  const auto gathered = t.gather_rows(hw, bg.gcn_src);
  const auto coef =
      t.constant(Tensor::from_rows(bg.gcn_coef.size(), 1, bg.gcn_coef));
  const auto scaled = t.row_scale(gathered, coef);
  return t.segment_sum(scaled, bg.gcn_dst, bg.num_nodes);
}

NodeId euclidean_sage_layer(Tape& t, NodeId h, const BatchGraph& bg,
                            NodeId w_self, NodeId w_neigh) {
  const auto self_path = t.matmul(h, w_self);
  if (bg.nbr.src.empty()) return self_path;  // all nodes isolated
  const auto gathered = t.gather_rows(h, bg.nbr.src);
  const auto sums = t.segment_sum(gathered, bg.nbr.dst, bg.num_nodes);
  const auto inv = t.constant(
      Tensor::from_rows(bg.nbr.inv_count.size(), 1, bg.nbr.inv_count));
  const auto mean = t.row_scale(sums, inv);
  return t.add(self_path, t.matmul(mean, w_neigh));
}

NodeId euclidean_gat_layer(Tape& t, NodeId h, const BatchGraph& bg,
                           std::span<const GatHeadParams> heads) {
  std::vector<NodeId> outs;
  outs.reserve(heads.size());
  for (const auto& head : heads) {
    const auto h1 = t.matmul(h, head.w_self);
    const auto h2 = t.matmul(h, head.w_neigh);
    const auto target_part = t.gather_rows(h1, bg.nbr_self.dst);
    const auto source_part = t.gather_rows(h2, bg.nbr_self.src);
    const auto pre = t.leaky_relu(t.add(target_part, source_part), 0.2);
    const auto scores = t.matmul(pre, head.attn);
    const auto alpha = t.segment_softmax(scores, bg.nbr_self.dst, bg.num_nodes);
    const auto msg = t.row_scale(t.gather_rows(h2, bg.nbr_self.src), alpha);
    outs.push_back(t.segment_sum(msg, bg.nbr_self.dst, bg.num_nodes));
  }
  return outs.size() == 1 ? outs[0] : t.concat_cols(outs);
}

namespace {

NodeId tangent_nonlinearity(Tape& t, NodeId z, double c, double dropout,
                            bool training, Rng* rng) {
  NodeId act = t.relu(z);
  if (training && dropout > 0.0) {
    if (!rng) throw InvalidInput("training forward pass requires a dropout rng");
    act = t.dropout(act, dropout, true, *rng);
  }
  return exp_map0_rows(t, act, c);
}

}  // namespace

NodeId hyperbolic_gcn_layer(Tape& t, NodeId ball, const BatchGraph& bg,
                            NodeId w, double c, bool final_layer,
                            double dropout, bool training, Rng* rng) {
  const auto agg = klein_aggregate(t, ball, c, bg.nbr_self, bg.num_nodes);
  const auto z = t.matmul(log_map0_rows(t, agg, c), w);
  if (final_layer) return z;
  return tangent_nonlinearity(t, z, c, dropout, training, rng);
}

NodeId hyperbolic_sage_layer(Tape& t, NodeId ball, const BatchGraph& bg,
                             NodeId w_self, NodeId w_neigh, double c,
                             bool final_layer, double dropout, bool training,
                             Rng* rng) {
  const auto tangent = log_map0_rows(t, ball, c);
  const auto h1 = t.matmul(tangent, w_self);
  const auto neigh = t.matmul(tangent, w_neigh);
  const auto neigh_ball = exp_map0_rows(t, neigh, c);
  const auto agg = klein_aggregate(t, neigh_ball, c, bg.nbr_self, bg.num_nodes);
  const auto h2 = log_map0_rows(t, agg, c);
  const auto z = t.add(h1, h2);
  if (final_layer) return z;
  return tangent_nonlinearity(t, z, c, dropout, training, rng);
}

NodeId hyperbolic_gat_layer(Tape& t, NodeId ball, const BatchGraph& bg,
                            std::span<const GatHeadParams> heads, double c,
                            bool final_layer, double dropout, bool training,
                            Rng* rng) {
  const auto tangent = log_map0_rows(t, ball, c);
  std::vector<NodeId> outs;
  outs.reserve(heads.size());
  for (const auto& head : heads) {
    const auto a1 = t.matmul(tangent, head.w_self);
    const auto a2 = t.matmul(tangent, head.w_neigh);
    const auto target_ball = exp_map0_rows(t, a1, c);
    const auto source_ball = exp_map0_rows(t, a2, c);
    const auto target_rows = t.gather_rows(target_ball, bg.nbr_self.dst);
    const auto source_rows = t.gather_rows(source_ball, bg.nbr_self.src);
    const auto dist = pairwise_hyper_distance(t, target_rows, source_rows, c);
    const auto alpha =
        t.segment_softmax(t.scale(dist, -1.0), bg.nbr_self.dst, bg.num_nodes);
    const auto msg = t.row_scale(t.gather_rows(a2, bg.nbr_self.src), alpha);
    const auto h_agg = t.segment_sum(msg, bg.nbr_self.dst, bg.num_nodes);
    outs.push_back(t.add(a1, h_agg));
  }
  const NodeId z = outs.size() == 1 ? outs[0] : t.concat_cols(outs);
  if (final_layer) return z;
  return tangent_nonlinearity(t, z, c, dropout, training, rng);
}

NodeId seed_masked_loss(Tape& t, NodeId logits, const BatchGraph& bg) {
  for (int l : bg.labels)
    if (l < 0) throw InvalidInput("seed_masked_loss: unlabeled seed in batch");
  const auto seed_logits = t.gather_rows(logits, bg.seed_rows);
  return t.cross_entropy_mean(seed_logits, bg.labels);
}

GnnModel::GnnModel(ModelConfig cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  std::uint64_t ordinal = 0;
  auto glorot = [&](const std::string& name, int fan_in, int fan_out) {
    Rng rng(Rng::derive(init_seed, /*stream=*/0x1417u, ordinal++));
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w(fan_in, fan_out, 0.0);
    for (auto& v : w.data()) v = rng.uniform(-bound, bound);
    params_.add(name, std::move(w));
  };

  for (int k = 0; k < cfg_.layers; ++k) {
    const bool final_layer = k == cfg_.layers - 1;
    const int din = k == 0 ? cfg_.input_dim : cfg_.hidden_dim;
    const std::string prefix = "l" + std::to_string(k);
    switch (cfg_.arch) {
      case Arch::kGcn:
        glorot(prefix + ".W", din, final_layer ? cfg_.classes : cfg_.hidden_dim);
        break;
      case Arch::kSage:
        glorot(prefix + ".W1", din, final_layer ? cfg_.classes : cfg_.hidden_dim);
        glorot(prefix + ".W2", din, final_layer ? cfg_.classes : cfg_.hidden_dim);
        break;
      case Arch::kGat: {
        const int nheads = final_layer ? 1 : cfg_.heads;
        const int dh = final_layer ? cfg_.classes : cfg_.head_dim;
        for (int h = 0; h < nheads; ++h) {
          const std::string hp = prefix + ".h" + std::to_string(h);
          glorot(hp + ".W1", din, dh);
          glorot(hp + ".W2", din, dh);
          if (cfg_.geometry == Geometry::kEuclidean) glorot(hp + ".a", dh, 1);
        }
        break;
      }
    }
  }
}

NodeId GnnModel::forward(Tape& t, const BatchGraph& bg, bool training,
                         Rng* dropout_rng) const {
  if (bg.features.cols() != static_cast<std::size_t>(cfg_.input_dim))
    throw InvalidInput("forward: feature dim does not match model input_dim");
  const double c = cfg_.curvature;
  NodeId h = t.input(bg.features);
  if (cfg_.geometry == Geometry::kHyperbolic) h = exp_map0_rows(t, h, c);

  for (int k = 0; k < cfg_.layers; ++k) {
    const bool final_layer = k == cfg_.layers - 1;
    const std::string prefix = "l" + std::to_string(k);
    auto bind = [&](const std::string& name) {
      return t.param(params_.get(name));
    };
    if (cfg_.geometry == Geometry::kEuclidean) {
      NodeId z = 0;
      switch (cfg_.arch) {
        case Arch::kGcn:
          z = euclidean_gcn_layer(t, h, bg, bind(prefix + ".W"));
          break;
        case Arch::kSage:
          z = euclidean_sage_layer(t, h, bg, bind(prefix + ".W1"),
                                   bind(prefix + ".W2"));
          break;
        case Arch::kGat: {
          const int nheads = final_layer ? 1 : cfg_.heads;
          std::vector<GatHeadParams> heads;
          for (int hh = 0; hh < nheads; ++hh) {
            const std::string hp = prefix + ".h" + std::to_string(hh);
            heads.push_back({bind(hp + ".W1"), bind(hp + ".W2"), bind(hp + ".a")});
          }
          z = euclidean_gat_layer(t, h, bg, heads);
          break;
        }
      }
      if (final_layer) return z;
      NodeId act = t.relu(z);
      if (training && cfg_.dropout > 0.0) {
        if (!dropout_rng)
          throw InvalidInput("training forward pass requires a dropout rng");
        act = t.dropout(act, cfg_.dropout, true, *dropout_rng);
      }
      h = act;
    } else {
      switch (cfg_.arch) {
        case Arch::kGcn:
          h = hyperbolic_gcn_layer(t, h, bg, bind(prefix + ".W"), c, final_layer,
                                   cfg_.dropout, training, dropout_rng);
          break;
        case Arch::kSage:
          h = hyperbolic_sage_layer(t, h, bg, bind(prefix + ".W1"),
                                    bind(prefix + ".W2"), c, final_layer,
                                    cfg_.dropout, training, dropout_rng);
          break;
        case Arch::kGat: {
          const int nheads = final_layer ? 1 : cfg_.heads;
          std::vector<GatHeadParams> heads;
          for (int hh = 0; hh < nheads; ++hh) {
            const std::string hp = prefix + ".h" + std::to_string(hh);
            heads.push_back({bind(hp + ".W1"), bind(hp + ".W2"), -1});
          }
          h = hyperbolic_gat_layer(t, h, bg, heads, c, final_layer, cfg_.dropout,
                                   training, dropout_rng);
          break;
        }
      }
      if (final_layer) return h;
    }
  }
  return h;  // unreachable; layers >= 2
}

namespace {

constexpr std::uint32_t kCkptMagic = 0x4b434748u;  // "HGCK"
constexpr std::uint32_t kCkptVersion = 1;

template <typename T>
void wr(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T rd(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidInput("checkpoint: truncated file");
  return v;
}

}  // namespace

void GnnModel::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  wr(os, kCkptMagic);
  wr(os, kCkptVersion);
  wr(os, static_cast<std::uint8_t>(cfg_.arch));
  wr(os, static_cast<std::uint8_t>(cfg_.geometry));
  wr(os, static_cast<std::int32_t>(cfg_.layers));
  wr(os, static_cast<std::int32_t>(cfg_.hidden_dim));
  wr(os, static_cast<std::int32_t>(cfg_.heads));
  wr(os, static_cast<std::int32_t>(cfg_.head_dim));
  wr(os, static_cast<std::int32_t>(cfg_.classes));
  wr(os, static_cast<std::int32_t>(cfg_.input_dim));
  wr(os, cfg_.dropout);
  wr(os, cfg_.curvature);
  wr(os, static_cast<std::uint64_t>(params_.all().size()));
  for (const auto& p : params_.all()) {
    wr(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    wr(os, static_cast<std::uint64_t>(p.value.rows()));
    wr(os, static_cast<std::uint64_t>(p.value.cols()));
    os.write(reinterpret_cast<const char*>(p.value.data().data()),
             static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

GnnModel GnnModel::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open checkpoint: " + path);
  if (rd<std::uint32_t>(is) != kCkptMagic)
    throw InvalidInput("checkpoint: bad magic in " + path);
  if (rd<std::uint32_t>(is) != kCkptVersion)
    throw InvalidInput("checkpoint: unsupported version in " + path);
  ModelConfig cfg;
  cfg.arch = static_cast<Arch>(rd<std::uint8_t>(is));
  cfg.geometry = static_cast<Geometry>(rd<std::uint8_t>(is));
  cfg.layers = rd<std::int32_t>(is);
  cfg.hidden_dim = rd<std::int32_t>(is);
  cfg.heads = rd<std::int32_t>(is);
  cfg.head_dim = rd<std::int32_t>(is);
  cfg.classes = rd<std::int32_t>(is);
  cfg.input_dim = rd<std::int32_t>(is);
  cfg.dropout = rd<double>(is);
  cfg.curvature = rd<double>(is);
  GnnModel model(cfg, /*init_seed=*/0);
  const auto count = rd<std::uint64_t>(is);
  if (count != model.params_.all().size())
    throw InvalidInput("checkpoint: parameter count mismatch in " + path);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = rd<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto rows = rd<std::uint64_t>(is);
    const auto cols = rd<std::uint64_t>(is);
    diff::Param& p = model.params_.get(name);
    if (p.value.rows() != rows || p.value.cols() != cols)
      throw InvalidInput("checkpoint: shape mismatch for " + name);
    is.read(reinterpret_cast<char*>(p.value.data().data()),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!is) throw InvalidInput("checkpoint: truncated file " + path);
  }
  return model;
}

}  // namespace hgnn::models
