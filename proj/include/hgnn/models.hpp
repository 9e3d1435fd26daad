#pragma once

#include <span>
#include <string>
#include <vector>

#include "hgnn/graph.hpp"
#include "hgnn/rng.hpp"
#include "hgnn/tape.hpp"

namespace hgnn::models {

enum class Arch { kGcn, kSage, kGat };
enum class Geometry { kEuclidean, kHyperbolic };

std::string arch_name(Arch a);
std::string geometry_name(Geometry g);
Arch parse_arch(const std::string& s);
Geometry parse_geometry(const std::string& s);

struct ModelConfig {
  Arch arch = Arch::kGcn;
  Geometry geometry = Geometry::kEuclidean;
  int layers = 2;
  int hidden_dim = 256;
  int heads = 8;        // intermediate GAT layers; final layer uses 1 head
  int head_dim = 32;    // heads * head_dim == hidden_dim for GAT
  double dropout = 0.1;
  double curvature = 1.0;  // hyperbolic only
  int classes = graph::kNumClasses;
  int input_dim = 0;    // filled from data

  void validate() const;
};

// One aggregation index over a batch graph: (src -> dst) contribution pairs
// sorted by dst, plus per-target 1/|set| (0 for empty sets).
struct AggIndex {
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<double> inv_count;
};

// Disjoint union of ego subgraphs. Neighbor structure is the undirected,
// deduplicated view of the induced edges.
struct BatchGraph {
  int num_nodes = 0;
  diff::Tensor features;          // [n, F]
  std::vector<int> seed_rows;     // one per subgraph
  std::vector<int> labels;        // one per subgraph (-1 if unlabeled)
  AggIndex nbr;                   // self excluded (Euclidean SAGE mean)
  AggIndex nbr_self;              // self included (GCN / Klein / attention)
  std::vector<int> gcn_src, gcn_dst;
  std::vector<double> gcn_coef;   // 1/sqrt(deg~ src * deg~ dst), self loops in
};

BatchGraph make_batch(std::span<const graph::EgoSubgraph> subgraphs);

using NodeId = diff::Tape::NodeId;

// --- tangent-space building blocks (row-wise over [n,d] tensors) ---
NodeId exp_map0_rows(diff::Tape& t, NodeId v, double c);
NodeId log_map0_rows(diff::Tape& t, NodeId x, double c);
NodeId poincare_to_klein_rows(diff::Tape& t, NodeId x, double c);
NodeId klein_to_poincare_rows(diff::Tape& t, NodeId k, double c);
// Klein-model mean over an aggregation index.
NodeId klein_aggregate(diff::Tape& t, NodeId ball, double c,
                       const AggIndex& agg, int num_nodes);
// Row-wise curvature-c Poincare distance between paired rows of X and Y.
NodeId pairwise_hyper_distance(diff::Tape& t, NodeId x, NodeId y, double c);

// --- single layers, pre-activation (tests drive these directly) ---
struct GatHeadParams {
  NodeId w_self;   // W1
  NodeId w_neigh;  // W2
  NodeId attn;     // score vector a (Euclidean only; -1 for hyperbolic)
};

NodeId euclidean_gcn_layer(diff::Tape& t, NodeId h, const BatchGraph& bg, NodeId w);
NodeId euclidean_sage_layer(diff::Tape& t, NodeId h, const BatchGraph& bg,
                            NodeId w_self, NodeId w_neigh);
NodeId euclidean_gat_layer(diff::Tape& t, NodeId h, const BatchGraph& bg,
                           std::span<const GatHeadParams> heads);
// Hyperbolic layers take and return ball points unless `final_layer` is set,
// in which case the returned node holds tangent-space logits.
NodeId hyperbolic_gcn_layer(diff::Tape& t, NodeId ball, const BatchGraph& bg,
                            NodeId w, double c, bool final_layer,
                            double dropout, bool training, Rng* rng);
NodeId hyperbolic_sage_layer(diff::Tape& t, NodeId ball, const BatchGraph& bg,
                             NodeId w_self, NodeId w_neigh, double c,
                             bool final_layer, double dropout, bool training,
                             Rng* rng);
NodeId hyperbolic_gat_layer(diff::Tape& t, NodeId ball, const BatchGraph& bg,
                            std::span<const GatHeadParams> heads, double c,
                            bool final_layer, double dropout, bool training,
                            Rng* rng);

// Cross-entropy evaluated only at seed rows, averaged over the batch.
NodeId seed_masked_loss(diff::Tape& t, NodeId logits, const BatchGraph& bg);

// One of the six architectures with its parameter store.
class GnnModel {
 public:
  GnnModel(ModelConfig cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  diff::ParamStore& params() { return params_; }
  const diff::ParamStore& params() const { return params_; }

  // Builds the forward graph and returns the logits node ([n, classes] for
  // Euclidean models, tangent-space logits for hyperbolic ones).
  NodeId forward(diff::Tape& t, const BatchGraph& bg, bool training,
                 Rng* dropout_rng) const;

  void save(const std::string& path) const;
  static GnnModel load(const std::string& path);

 private:
  ModelConfig cfg_;
  // Params are stored mutable so inference-only forward passes can bind them
  // on a caller-owned tape.
  mutable diff::ParamStore params_;
};

}  // namespace hgnn::models
