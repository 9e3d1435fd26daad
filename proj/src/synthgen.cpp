#include "hgnn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hgnn/rng.hpp"

namespace hgnn::synth {

namespace {

struct EdgeRec {
  std::uint32_t src, dst;
  double amount;
};

int signal_feature_count(const SynthSpec& spec) {
  std::size_t n = 0;
  for (const auto& cp : spec.classes) n = std::max(n, cp.value_log_mean.size());
  return static_cast<int>(n);
}

}  // namespace

void SynthSpec::validate() const {
  if (classes.empty()) throw InvalidInput("synth spec: no classes");
  if (seeds_per_class <= 0) throw InvalidInput("synth spec: seeds_per_class must be positive");
  if (depth <= 0) throw InvalidInput("synth spec: depth must be positive");
  if (inter_tree_edge_rate < 0.0 || inter_tree_edge_rate > 1.0)
    throw InvalidInput("synth spec: inter_tree_edge_rate must be in [0,1]");
  if (noise < 0.0) throw InvalidInput("synth spec: noise must be non-negative");
  for (const auto& cp : classes) {
    if (graph::class_index(cp.name) < 0)
      throw InvalidInput("synth spec: unknown class name " + cp.name);
    if (cp.branching.empty()) throw InvalidInput("synth spec: empty branching");
    for (const auto& [lo, hi] : cp.branching)
      if (lo < 1 || hi < lo)
        throw InvalidInput("synth spec: branching bounds must satisfy 1 <= lo <= hi");
    if (cp.cross_link_prob < 0.0 || cp.cross_link_prob > 1.0)
      throw InvalidInput("synth spec: cross_link_prob must be in [0,1]");
    if (cp.value_log_sigma < 0.0)
      throw InvalidInput("synth spec: value_log_sigma must be non-negative");
  }
}

std::vector<std::string> feature_columns(int signal_features) {
  std::vector<std::string> cols = {"total_sent", "total_received", "in_count",
                                   "out_count",  "first_ts",       "last_ts"};
  for (int j = 0; j < signal_features; ++j)
    cols.push_back("val" + std::to_string(j + 1));
  return cols;
}

std::vector<std::string> value_type_columns(int signal_features) {
  std::vector<std::string> cols = {"total_sent", "total_received",
                                   "derived_avg_sent", "derived_avg_received"};
  for (int j = 0; j < signal_features; ++j)
    cols.push_back("val" + std::to_string(j + 1));
  return cols;
}

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  const int nsignal = signal_feature_count(spec);

  struct NodeRec {
    int cls;
    int tree;
    double ts;
    std::vector<double> signal;
  };
  std::vector<NodeRec> recs;
  std::vector<EdgeRec> edges;
  SynthOutput out;

  std::uint64_t tree_index = 0;
  for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
    const ClassProfile& cp = spec.classes[ci];
    const int cls = graph::class_index(cp.name);
    for (int s = 0; s < spec.seeds_per_class; ++s, ++tree_index) {
      Rng rng(Rng::derive(spec.master_seed, /*stream=*/0x7133u, tree_index));
      const std::uint32_t tree_start = static_cast<std::uint32_t>(recs.size());
      auto spawn = [&](double ts) {
        NodeRec nr;
        nr.cls = cls;
        nr.tree = static_cast<int>(tree_index);
        nr.ts = ts;
        nr.signal.resize(nsignal, 1.0);
        for (int j = 0; j < nsignal; ++j) {
          const double mu = j < static_cast<int>(cp.value_log_mean.size())
                                ? cp.value_log_mean[j]
                                : 0.0;
          const double sigma = cp.value_log_sigma * spec.noise;
          nr.signal[j] = std::exp(mu + sigma * rng.normal());
        }
        recs.push_back(std::move(nr));
        return static_cast<std::uint32_t>(recs.size()) - 1;
      };

      // at zero noise the timestamps are fixed so no feature column carries
      // class-independent randomness
      const bool jitter = spec.noise > 0.0;
      const std::uint32_t root =
          spawn(jitter ? rng.uniform(1.3e9, 1.55e9) : 1.4e9);
      out.seeds.push_back(root);
      std::vector<std::uint32_t> frontier{root};
      for (int hop = 1; hop <= spec.depth; ++hop) {
        const auto& [blo, bhi] =
            cp.branching[std::min<std::size_t>(hop - 1, cp.branching.size() - 1)];
        std::vector<std::uint32_t> next;
        for (std::uint32_t parent : frontier) {
          const int kids =
              blo + static_cast<int>(rng.uniform_int(
                        static_cast<std::uint64_t>(bhi - blo + 1)));
          for (int k = 0; k < kids; ++k) {
            const std::uint32_t child = spawn(
                recs[parent].ts +
                (jitter ? rng.uniform(3600.0, 30.0 * 86400.0) : 10.0 * 86400.0));
            const double amount = std::exp(cp.amount_log_mean +
                                           0.75 * spec.noise * rng.normal());
            edges.push_back({parent, child, amount});
            next.push_back(child);
          }
        }
        frontier = std::move(next);
      }
      // Non-tree shortcuts inside the tree.
      const std::uint32_t tree_end = static_cast<std::uint32_t>(recs.size());
      for (std::uint32_t v = tree_start + 1; v < tree_end; ++v) {
        if (rng.uniform() < cp.cross_link_prob) {
          const std::uint32_t target =
              tree_start + static_cast<std::uint32_t>(
                               rng.uniform_int(v - tree_start));
          const double amount = std::exp(cp.amount_log_mean +
                                         0.75 * spec.noise * rng.normal());
          edges.push_back({v, target, amount});
        }
      }
    }
  }

  // Random tree-to-tree edges at the configured rate.
  {
    Rng rng(Rng::derive(spec.master_seed, /*stream=*/0x13a7u));
    const std::size_t extra = static_cast<std::size_t>(
        std::llround(spec.inter_tree_edge_rate * static_cast<double>(recs.size())));
    std::size_t added = 0, attempts = 0;
    while (added < extra && attempts < 20 * extra + 100) {
      ++attempts;
      const auto a = static_cast<std::uint32_t>(rng.uniform_int(recs.size()));
      const auto b = static_cast<std::uint32_t>(rng.uniform_int(recs.size()));
      if (recs[a].tree == recs[b].tree) continue;
      const double amount = std::exp(4.0 + 0.75 * spec.noise * rng.normal());
      edges.push_back({a, b, amount});
      ++added;
    }
  }

  // Assemble the graph: structural totals are recomputed from the final edge
  // set so counts and sums stay consistent with the topology.
  graph::TransactionGraph& g = out.graph;
  g.num_nodes = recs.size();
  g.edges.reserve(edges.size());
  std::vector<double> total_sent(recs.size(), 0.0), total_recv(recs.size(), 0.0);
  std::vector<double> in_count(recs.size(), 0.0), out_count(recs.size(), 0.0);
  for (const auto& e : edges) {
    g.edges.emplace_back(e.src, e.dst);
    total_sent[e.src] += e.amount;
    total_recv[e.dst] += e.amount;
    out_count[e.src] += 1.0;
    in_count[e.dst] += 1.0;
  }
  g.feature_names = feature_columns(nsignal);
  g.features = diff::Tensor(std::max<std::size_t>(1, recs.size()),
                            g.feature_names.size(), 0.0);
  Rng span_rng(Rng::derive(spec.master_seed, /*stream=*/0x4a9eu));
  for (std::size_t v = 0; v < recs.size(); ++v) {
    const double first_ts = recs[v].ts;
    const double last_ts =
        first_ts + (spec.noise > 0.0 ? span_rng.uniform(86400.0, 120.0 * 86400.0)
                                     : 60.0 * 86400.0);
    g.features.at(v, 0) = total_sent[v];
    g.features.at(v, 1) = total_recv[v];
    g.features.at(v, 2) = in_count[v];
    g.features.at(v, 3) = out_count[v];
    g.features.at(v, 4) = first_ts;
    g.features.at(v, 5) = last_ts;
    for (int j = 0; j < nsignal; ++j)
      g.features.at(v, 6 + j) = recs[v].signal[j];
  }
  g.labels.assign(recs.size(), -1);
  for (std::uint32_t seed : out.seeds) g.labels[seed] = recs[seed].cls;
  g.build_indexes();
  return out;
}

void write_graph_files(const graph::TransactionGraph& g,
                       const std::string& edge_path,
                       const std::string& feature_path,
                       const std::string& label_path) {
  {
    std::ofstream os(edge_path, std::ios::trunc);
    if (!os) throw InvalidInput("cannot open for writing: " + edge_path);
    for (const auto& [s, d] : g.edges) os << s << '\t' << d << '\n';
    if (!os) throw InvalidInput("write failed: " + edge_path);
  }
  {
    std::ofstream os(feature_path, std::ios::trunc);
    if (!os) throw InvalidInput("cannot open for writing: " + feature_path);
    os << "node_id";
    for (const auto& name : g.feature_names) os << ',' << name;
    os << '\n';
    char buf[64];
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
      os << v;
      for (std::size_t j = 0; j < g.feature_names.size(); ++j) {
        const double x = g.features.at(v, j);
        if (std::isnan(x)) {
          os << ',';
        } else {
          std::snprintf(buf, sizeof(buf), "%.17g", x);
          os << ',' << buf;
        }
      }
      os << '\n';
    }
    if (!os) throw InvalidInput("write failed: " + feature_path);
  }
  {
    std::ofstream os(label_path, std::ios::trunc);
    if (!os) throw InvalidInput("cannot open for writing: " + label_path);
    os << "node_id,class\n";
    for (std::size_t v = 0; v < g.num_nodes; ++v)
      if (g.labels[v] >= 0)
        os << v << ',' << graph::kClassNames[g.labels[v]] << '\n';
    if (!os) throw InvalidInput("write failed: " + label_path);
  }
}

SynthSpec default_spec(std::uint64_t master_seed) {
  SynthSpec spec;
  spec.master_seed = master_seed;
  spec.seeds_per_class = 20;
  spec.depth = 3;
  spec.inter_tree_edge_rate = 0.02;
  spec.noise = 1.0;
  auto cls = [&](const char* name, std::vector<std::pair<int, int>> branching,
                 std::vector<double> means, double cross) {
    ClassProfile cp;
    cp.name = name;
    cp.branching = std::move(branching);
    cp.value_log_mean = std::move(means);
    cp.cross_link_prob = cross;
    spec.classes.push_back(std::move(cp));
  };
  cls("EXCHANGE", {{5, 8}, {3, 5}, {2, 3}}, {6.0, 1.0, 3.0, 0.0}, 0.10);
  cls("MINING", {{1, 2}, {1, 2}, {1, 2}}, {4.5, 4.5, 0.0, 1.5}, 0.02);
  cls("GAMBLING", {{4, 6}, {2, 4}, {1, 3}}, {2.0, 5.0, 1.0, 2.0}, 0.08);
  cls("PONZI", {{6, 9}, {1, 2}, {1, 2}}, {1.0, 6.0, 4.0, 3.0}, 0.12);
  cls("INDIVIDUAL", {{1, 3}, {1, 2}, {1, 2}}, {0.0, 0.0, 2.0, 4.0}, 0.03);
  cls("RANSOMWARE", {{2, 4}, {4, 7}, {1, 2}}, {5.0, 2.5, 5.0, 1.0}, 0.06);
  cls("BET", {{3, 4}, {1, 3}, {2, 4}}, {3.0, 3.0, 0.5, 5.0}, 0.05);
  return spec;
}

SynthSpec separable_two_class_spec(std::uint64_t master_seed) {
  SynthSpec spec;
  spec.master_seed = master_seed;
  spec.seeds_per_class = 20;
  spec.depth = 2;
  spec.inter_tree_edge_rate = 0.0;
  spec.noise = 0.0;
  ClassProfile a;
  a.name = "EXCHANGE";
  a.branching = {{3, 3}, {2, 2}};
  a.value_log_mean = {2.0, 6.0};
  a.value_log_sigma = 0.0;
  a.cross_link_prob = 0.0;
  ClassProfile b;
  b.name = "PONZI";
  b.branching = {{3, 3}, {2, 2}};
  b.value_log_mean = {6.0, 2.0};
  b.value_log_sigma = 0.0;
  b.cross_link_prob = 0.0;
  spec.classes = {a, b};
  return spec;
}

}  // namespace hgnn::synth
