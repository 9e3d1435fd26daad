#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hgnn/common.hpp"
#include "hgnn/tensor.hpp"

namespace hgnn::graph {

inline constexpr int kNumClasses = 7;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "EXCHANGE", "MINING", "GAMBLING", "PONZI", "INDIVIDUAL", "RANSOMWARE", "BET"};

// Index of a class name, or -1 if unknown.
int class_index(std::string_view name);

// Directed transaction graph. Immutable after load; duplicate edges are kept
// in the edge list but collapsed into a sorted neighbor set for sampling.
struct TransactionGraph {
  std::size_t num_nodes = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  // CSR over out-edges (edge multiplicity preserved, used for induction).
  std::vector<std::size_t> out_offset;
  std::vector<std::uint32_t> out_targets;
  // CSR over in-edges (multiplicity preserved).
  std::vector<std::size_t> in_offset;
  std::vector<std::uint32_t> in_sources;
  // Sorted deduplicated union of in- and out-neighbors, used for expansion.
  std::vector<std::size_t> nbr_offset;
  std::vector<std::uint32_t> nbr;

  std::vector<std::string> feature_names;
  diff::Tensor features;  // [num_nodes, F]; empty when no feature file
  std::vector<int> labels;  // class index per node, -1 = unlabeled

  std::size_t out_degree(std::uint32_t v) const {
    return out_offset[v + 1] - out_offset[v];
  }
  std::size_t in_degree(std::uint32_t v) const {
    return in_offset[v + 1] - in_offset[v];
  }
  std::vector<std::uint32_t> labeled_nodes() const;

  // Rebuilds the adjacency indexes from num_nodes + edges.
  void build_indexes();
};

// Loads edges (required) plus optional feature and label files (pass "" to
// skip). Malformed or inconsistent records raise IngestError listing the
// offending lines.
TransactionGraph load_graph(const std::string& edge_path,
                            const std::string& feature_path,
                            const std::string& label_path);

// Per-hop cap on sampled neighbors; entry k applies to hop k+1.
struct FanoutSpec {
  std::vector<int> fanouts;
  explicit FanoutSpec(std::vector<int> f) : fanouts(std::move(f)) {
    if (fanouts.empty()) throw InvalidInput("fanout spec must not be empty");
    for (int v : fanouts)
      if (v <= 0) throw InvalidInput("fanouts must be positive");
  }
  int depth() const { return static_cast<int>(fanouts.size()); }
  // 1 + f1 + f1*f2 + ... upper bound on sampled node count.
  std::size_t node_bound() const;
};

// Seed-centered sampled subgraph. Node 0 is always the seed.
struct EgoSubgraph {
  std::uint32_t seed = 0;
  std::vector<std::uint32_t> nodes;           // original ids, seed first
  std::vector<int> hop;                       // BFS hop at discovery
  std::vector<std::pair<int, int>> edges;     // local indices, all induced
  std::vector<std::uint8_t> seed_mask;        // true only at position 0
  diff::Tensor features;                      // [nodes, F], may be empty
  int label = -1;

  std::size_t num_nodes() const { return nodes.size(); }
};

// Breadth-wise expansion with per-hop fan-out caps. At each hop every
// frontier node samples up to fanout_k previously-unvisited neighbors
// uniformly without replacement from the union of in- and out-neighbors;
// afterwards all original directed edges among the sampled set are induced.
// The RNG stream is a pure function of (master_seed, seed node id).
EgoSubgraph sample_ego(const TransactionGraph& g, std::uint32_t seed,
                       const FanoutSpec& spec, std::uint64_t master_seed);

// One subgraph per seed, reproducible and order-independent; `workers`
// bounds sampling threads.
std::vector<EgoSubgraph> sample_all_seeds(const TransactionGraph& g,
                                          const std::vector<std::uint32_t>& seeds,
                                          const FanoutSpec& spec,
                                          std::uint64_t master_seed,
                                          int workers = 1);

// Versioned binary subgraph cache; reload is bit-exact. Feature column names
// travel with the cache so later stages can resolve per-column policy.
void save_subgraphs(const std::string& path,
                    const std::vector<EgoSubgraph>& subgraphs,
                    const std::vector<std::string>& feature_names = {});
std::vector<EgoSubgraph> load_subgraphs(const std::string& path,
                                        std::vector<std::string>* feature_names = nullptr);

}  // namespace hgnn::graph
