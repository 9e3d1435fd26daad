#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hgnn/rng.hpp"
#include "hgnn/tensor.hpp"

namespace hgnn::diff {

// Named parameter with its gradient accumulator and Adam moment buffers.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor moment1;
  Tensor moment2;
};

class ParamStore {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }
  void zero_grads();
  // Parameter values only (used for best-checkpoint snapshots).
  std::vector<Tensor> snapshot_values() const;
  void restore_values(const std::vector<Tensor>& values);

 private:
  std::vector<Param> params_;
};

// Reverse-mode tape. Forward calls record the adjoint of each primitive;
// backward() traverses in exact reverse order and accumulates gradients into
// the bound ParamStore entries.
class Tape {
 public:
  using NodeId = int;

  NodeId input(Tensor t);       // leaf, no gradient
  NodeId constant(Tensor t) { return input(std::move(t)); }
  NodeId param(Param& p);       // leaf bound to a parameter

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId add_scalar(NodeId a, double s);
  NodeId relu(NodeId a);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId tanh(NodeId a);
  // atanh with the argument clamped to |x| <= 1 - kAtanhEps; gradient is zero
  // in the clamped region.
  NodeId atanh_clamped(NodeId a);
  NodeId sqrt_clamped(NodeId a);
  // acosh(1 + u) for u >= 0 (negative inputs clamp to 0). Stable form of the
  // distance kernel; the adjoint denominator is floored to stay finite at
  // coincident points.
  NodeId acosh1p(NodeId a);
  // Per-row L2 norm, floored at kZeroEps: [n,m] -> [n,1].
  NodeId row_norm(NodeId a);
  // Multiplies row i of a [n,m] by s[i] of a [n,1].
  NodeId row_scale(NodeId a, NodeId s);
  // Rescales any row with sqrt(c)*||row|| >= 1 - kBallEps back to the margin;
  // the factor is treated as constant in the adjoint.
  NodeId ball_clamp(NodeId a, double curvature);
  // Inverted dropout; identity when training is false.
  NodeId dropout(NodeId a, double rate, bool training, Rng& rng);
  NodeId gather_rows(NodeId a, std::vector<int> idx);
  NodeId segment_sum(NodeId a, std::vector<int> seg, int num_segments);
  // Softmax over [k,1] scores within each segment id.
  NodeId segment_softmax(NodeId scores, std::vector<int> seg, int num_segments);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  // Mean cross-entropy over rows: softmax over columns, -log p[label].
  NodeId cross_entropy_mean(NodeId logits, std::vector<int> labels);
  NodeId sum_all(NodeId a);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  // Gradient w.r.t. a node (valid after backward; empty if none reached it).
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and runs the adjoints in reverse order.
  // loss must be 1x1. Parameter gradients are ADDED to Param::grad.
  void backward(NodeId loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    Param* bound = nullptr;
    std::function<void(Tape&, const Node&)> backprop;
  };

  NodeId push(Tensor value, bool needs_grad,
              std::function<void(Tape&, const Node&)> backprop);
  Tensor& grad_buffer(NodeId id);
  bool wants_grad(NodeId id) const { return nodes_[id].needs_grad; }

  std::vector<Node> nodes_;
};

// Central-difference gradient verification. loss_fn(true) must run a fresh
// forward + backward pass (accumulating into the store's grads) and return
// the loss; loss_fn(false) runs forward only. At most max_coords coordinates
// per parameter are probed (evenly strided). Returns the max relative error
// |fd - ad| / max(|fd|, |ad|, 1e-3).
double grad_check(ParamStore& params,
                  const std::function<double(bool with_grad)>& loss_fn,
                  double eps = 1e-5, int max_coords = 200);

}  // namespace hgnn::diff
