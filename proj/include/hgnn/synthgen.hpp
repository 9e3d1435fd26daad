#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgnn/graph.hpp"

namespace hgnn::synth {

// Per-class generation profile. Branching entry k bounds the children count
// (inclusive) spawned at hop k+1; the last entry repeats for deeper hops.
struct ClassProfile {
  std::string name;
  std::vector<std::pair<int, int>> branching = {{2, 4}};
  std::vector<double> value_log_mean;  // log-means of the signal features
  double value_log_sigma = 1.25;       // within-class log-spread
  double amount_log_mean = 4.0;        // per-edge transferred amount
  double cross_link_prob = 0.05;       // extra non-tree edge per node
};

struct SynthSpec {
  std::vector<ClassProfile> classes;
  int seeds_per_class = 20;
  int depth = 2;
  double inter_tree_edge_rate = 0.01;  // random tree-to-tree edges per node
  double noise = 1.0;                  // global multiplier on log-spreads
  std::uint64_t master_seed = 1;

  void validate() const;
};

struct SynthOutput {
  graph::TransactionGraph graph;
  std::vector<std::uint32_t> seeds;  // labeled root nodes
};

// Grows one rooted branching structure per seed with class-conditioned
// branching factors and log-normally distributed transactional magnitudes,
// adds cross-links and inter-tree edges, and assembles everything into a
// single labeled graph. Deterministic in the master seed.
SynthOutput generate(const SynthSpec& spec);

// Emits the exact ingestion formats (edge/feature/label files).
void write_graph_files(const graph::TransactionGraph& g,
                       const std::string& edge_path,
                       const std::string& feature_path,
                       const std::string& label_path);

// Names of the raw feature columns the generator emits.
std::vector<std::string> feature_columns(int signal_features);
// Raw columns holding transferred-value magnitudes (fed the q5 anchor rule).
std::vector<std::string> value_type_columns(int signal_features);

// Seven-class benchmark profile mixing structural and feature signal.
SynthSpec default_spec(std::uint64_t master_seed);
// Two perfectly separable classes: disjoint feature means, zero spread.
SynthSpec separable_two_class_spec(std::uint64_t master_seed);

}  // namespace hgnn::synth
