#include "hgnn/tape.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "hgnn/manifold.hpp"

namespace hgnn::diff {

namespace {

constexpr double kSqrtFloor = 1e-14;
constexpr double kAcoshFloor = 1e-15;

#ifndef NDEBUG
void assert_finite(const Tensor& t) {
  for (double v : t.data()) assert(std::isfinite(v) && "non-finite forward value");
}
#else
void assert_finite(const Tensor&) {}
#endif

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) throw InvalidInput(std::string(op) + ": shape mismatch");
}

}  // namespace

Param& ParamStore::add(const std::string& name, Tensor init) {
  if (has(name)) throw InvalidInput("duplicate parameter name: " + name);
  Param p;
  p.name = name;
  p.grad = Tensor(init.rows(), init.cols(), 0.0);
  p.moment1 = Tensor(init.rows(), init.cols(), 0.0);
  p.moment2 = Tensor(init.rows(), init.cols(), 0.0);
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return params_.back();
}

Param& ParamStore::get(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw InvalidInput("unknown parameter: " + name);
}

const Param& ParamStore::get(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p;
  throw InvalidInput("unknown parameter: " + name);
}

bool ParamStore::has(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return true;
  return false;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) std::fill(p.grad.data().begin(), p.grad.data().end(), 0.0);
}

std::vector<Tensor> ParamStore::snapshot_values() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void ParamStore::restore_values(const std::vector<Tensor>& values) {
  if (values.size() != params_.size())
    throw InvalidInput("snapshot size does not match parameter count");
  for (std::size_t i = 0; i < values.size(); ++i) params_[i].value = values[i];
}

Tape::NodeId Tape::push(Tensor value, bool needs_grad,
                        std::function<void(Tape&, const Node&)> backprop) {
  assert_finite(value);
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backprop = needs_grad ? std::move(backprop) : nullptr;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buffer(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.rows(), n.value.cols(), 0.0);
  return n.grad;
}

Tape::NodeId Tape::input(Tensor t) { return push(std::move(t), false, nullptr); }

Tape::NodeId Tape::param(Param& p) {
  NodeId id = push(p.value, true, nullptr);
  nodes_[id].bound = &p;
  return id;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows()) throw InvalidInput("matmul: inner dims differ");
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor C(n, m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) C.at(i, j) += aip * B.at(p, j);
    }
  bool ng = wants_grad(a) || wants_grad(b);
  return push(std::move(C), ng, [a, b, n, k, m](Tape& t, const Node& self) {
    const Tensor& G = self.grad;
    const Tensor& A2 = t.value(a);
    const Tensor& B2 = t.value(b);
    if (t.wants_grad(a)) {
      Tensor& dA = t.grad_buffer(a);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double g = G.at(i, j);
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) dA.at(i, p) += g * B2.at(p, j);
        }
    }
    if (t.wants_grad(b)) {
      Tensor& dB = t.grad_buffer(b);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A2.at(i, p);
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < m; ++j) dB.at(p, j) += aip * G.at(i, j);
        }
    }
  });
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "add");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
  bool ng = wants_grad(a) || wants_grad(b);
  return push(std::move(C), ng, [a, b](Tape& t, const Node& self) {
    if (t.wants_grad(a)) {
      Tensor& dA = t.grad_buffer(a);
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[i];
    }
    if (t.wants_grad(b)) {
      Tensor& dB = t.grad_buffer(b);
      for (std::size_t i = 0; i < dB.size(); ++i) dB[i] += self.grad[i];
    }
  });
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "sub");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] -= B[i];
  bool ng = wants_grad(a) || wants_grad(b);
  return push(std::move(C), ng, [a, b](Tape& t, const Node& self) {
    if (t.wants_grad(a)) {
      Tensor& dA = t.grad_buffer(a);
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[i];
    }
    if (t.wants_grad(b)) {
      Tensor& dB = t.grad_buffer(b);
      for (std::size_t i = 0; i < dB.size(); ++i) dB[i] -= self.grad[i];
    }
  });
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "mul");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
  bool ng = wants_grad(a) || wants_grad(b);
  return push(std::move(C), ng, [a, b](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    const Tensor& B2 = t.value(b);
    if (t.wants_grad(a)) {
      Tensor& dA = t.grad_buffer(a);
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[i] * B2[i];
    }
    if (t.wants_grad(b)) {
      Tensor& dB = t.grad_buffer(b);
      for (std::size_t i = 0; i < dB.size(); ++i) dB[i] += self.grad[i] * A2[i];
    }
  });
}

Tape::NodeId Tape::div(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_shape(A, B, "div");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] /= B[i];
  bool ng = wants_grad(a) || wants_grad(b);
  return push(std::move(C), ng, [a, b](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    const Tensor& B2 = t.value(b);
    if (t.wants_grad(a)) {
      Tensor& dA = t.grad_buffer(a);
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[i] / B2[i];
    }
    if (t.wants_grad(b)) {
      Tensor& dB = t.grad_buffer(b);
      for (std::size_t i = 0; i < dB.size(); ++i)
        dB[i] -= self.grad[i] * A2[i] / (B2[i] * B2[i]);
    }
  });
}

Tape::NodeId Tape::scale(NodeId a, double s) {
  Tensor C = value(a);
  for (double& v : C.data()) v *= s;
  return push(std::move(C), wants_grad(a), [a, s](Tape& t, const Node& self) {
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += s * self.grad[i];
  });
}

Tape::NodeId Tape::add_scalar(NodeId a, double s) {
  Tensor C = value(a);
  for (double& v : C.data()) v += s;
  return push(std::move(C), wants_grad(a), [a](Tape& t, const Node& self) {
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[i];
  });
}

Tape::NodeId Tape::relu(NodeId a) {
  Tensor C = value(a);
  for (double& v : C.data()) v = v > 0.0 ? v : 0.0;
  return push(std::move(C), wants_grad(a), [a](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i)
      if (A2[i] > 0.0) dA[i] += self.grad[i];
  });
}

Tape::NodeId Tape::leaky_relu(NodeId a, double slope) {
  Tensor C = value(a);
  for (double& v : C.data()) v = v > 0.0 ? v : slope * v;
  return push(std::move(C), wants_grad(a), [a, slope](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i)
      dA[i] += self.grad[i] * (A2[i] > 0.0 ? 1.0 : slope);
  });
}

Tape::NodeId Tape::tanh(NodeId a) {
  Tensor C = value(a);
  for (double& v : C.data()) v = std::tanh(v);
  NodeId out = push(Tensor(C), wants_grad(a), nullptr);
  nodes_[out].backprop = [a, out](Tape& t, const Node& self) {
    const Tensor& Y = t.value(out);
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i)
      dA[i] += self.grad[i] * (1.0 - Y[i] * Y[i]);
  };
  return out;
}

Tape::NodeId Tape::atanh_clamped(NodeId a) {
  const double limit = 1.0 - manifold::kAtanhEps;
  const Tensor& A = value(a);
  Tensor C = A;
  for (double& v : C.data()) v = std::atanh(std::clamp(v, -limit, limit));
  return push(std::move(C), wants_grad(a), [a, limit](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i) {
      const double x = A2[i];
      if (x > -limit && x < limit) dA[i] += self.grad[i] / (1.0 - x * x);
    }
  });
}

Tape::NodeId Tape::sqrt_clamped(NodeId a) {
  Tensor C = value(a);
  for (double& v : C.data()) v = std::sqrt(std::max(v, kSqrtFloor));
  return push(std::move(C), wants_grad(a), [a](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i)
      if (A2[i] > kSqrtFloor)
        dA[i] += self.grad[i] * 0.5 / std::sqrt(A2[i]);
  });
}

Tape::NodeId Tape::acosh1p(NodeId a) {
  Tensor C = value(a);
  for (double& v : C.data()) {
    const double u = std::max(v, 0.0);
    v = std::log1p(u + std::sqrt(u * (u + 2.0)));
  }
  return push(std::move(C), wants_grad(a), [a](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i) {
      const double u = std::max(A2[i], kAcoshFloor);
      dA[i] += self.grad[i] / std::sqrt(u * (u + 2.0));
    }
  });
}

Tape::NodeId Tape::row_norm(NodeId a) {
  const Tensor& A = value(a);
  const std::size_t n = A.rows(), m = A.cols();
  Tensor C(n, 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += A.at(i, j) * A.at(i, j);
    C.at(i, 0) = std::max(std::sqrt(acc), manifold::kZeroEps);
  }
  NodeId out = push(std::move(C), wants_grad(a), nullptr);
  nodes_[out].backprop = [a, out, n, m](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    const Tensor& R = t.value(out);
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = self.grad.at(i, 0) / R.at(i, 0);
      for (std::size_t j = 0; j < m; ++j) dA.at(i, j) += g * A2.at(i, j);
    }
  };
  return out;
}

Tape::NodeId Tape::row_scale(NodeId a, NodeId s) {
  const Tensor& A = value(a);
  const Tensor& S = value(s);
  if (S.rows() != A.rows() || S.cols() != 1)
    throw InvalidInput("row_scale: scale must be [rows,1]");
  const std::size_t n = A.rows(), m = A.cols();
  Tensor C = A;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) C.at(i, j) *= S.at(i, 0);
  bool ng = wants_grad(a) || wants_grad(s);
  return push(std::move(C), ng, [a, s, n, m](Tape& t, const Node& self) {
    const Tensor& A2 = t.value(a);
    const Tensor& S2 = t.value(s);
    if (t.wants_grad(a)) {
      Tensor& dA = t.grad_buffer(a);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
          dA.at(i, j) += self.grad.at(i, j) * S2.at(i, 0);
    }
    if (t.wants_grad(s)) {
      Tensor& dS = t.grad_buffer(s);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j)
          acc += self.grad.at(i, j) * A2.at(i, j);
        dS.at(i, 0) += acc;
      }
    }
  });
}

Tape::NodeId Tape::ball_clamp(NodeId a, double curvature) {
  const Tensor& A = value(a);
  const std::size_t n = A.rows(), m = A.cols();
  const double limit = (1.0 - manifold::kBallEps) / std::sqrt(curvature);
  Tensor C = A;
  std::vector<double> factors(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += A.at(i, j) * A.at(i, j);
    const double r = std::sqrt(acc);
    if (r >= limit && r > 0.0) {
      factors[i] = limit / r;
      for (std::size_t j = 0; j < m; ++j) C.at(i, j) *= factors[i];
    }
  }
  return push(std::move(C), wants_grad(a),
              [a, n, m, factors = std::move(factors)](Tape& t, const Node& self) {
                Tensor& dA = t.grad_buffer(a);
                for (std::size_t i = 0; i < n; ++i)
                  for (std::size_t j = 0; j < m; ++j)
                    dA.at(i, j) += self.grad.at(i, j) * factors[i];
              });
}

Tape::NodeId Tape::dropout(NodeId a, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw InvalidInput("dropout: rate must be in [0,1)");
  if (!training || rate == 0.0) return a;
  const Tensor& A = value(a);
  const double inv_keep = 1.0 / (1.0 - rate);
  std::vector<double> mask(A.size());
  for (auto& v : mask) v = rng.uniform() < rate ? 0.0 : inv_keep;
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= mask[i];
  return push(std::move(C), wants_grad(a),
              [a, mask = std::move(mask)](Tape& t, const Node& self) {
                Tensor& dA = t.grad_buffer(a);
                for (std::size_t i = 0; i < dA.size(); ++i)
                  dA[i] += self.grad[i] * mask[i];
              });
}

Tape::NodeId Tape::gather_rows(NodeId a, std::vector<int> idx) {
  const Tensor& A = value(a);
  const std::size_t m = A.cols();
  Tensor C(idx.size(), m, 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || static_cast<std::size_t>(idx[k]) >= A.rows())
      throw InvalidInput("gather_rows: index out of range");
    for (std::size_t j = 0; j < m; ++j) C.at(k, j) = A.at(idx[k], j);
  }
  return push(std::move(C), wants_grad(a),
              [a, m, idx = std::move(idx)](Tape& t, const Node& self) {
                Tensor& dA = t.grad_buffer(a);
                for (std::size_t k = 0; k < idx.size(); ++k)
                  for (std::size_t j = 0; j < m; ++j)
                    dA.at(idx[k], j) += self.grad.at(k, j);
              });
}

Tape::NodeId Tape::segment_sum(NodeId a, std::vector<int> seg, int num_segments) {
  const Tensor& A = value(a);
  if (seg.size() != A.rows()) throw InvalidInput("segment_sum: segment ids per row");
  const std::size_t m = A.cols();
  Tensor C(num_segments, m, 0.0);
  for (std::size_t k = 0; k < seg.size(); ++k) {
    if (seg[k] < 0 || seg[k] >= num_segments)
      throw InvalidInput("segment_sum: segment id out of range");
    for (std::size_t j = 0; j < m; ++j) C.at(seg[k], j) += A.at(k, j);
  }
  return push(std::move(C), wants_grad(a),
              [a, m, seg = std::move(seg)](Tape& t, const Node& self) {
                Tensor& dA = t.grad_buffer(a);
                for (std::size_t k = 0; k < seg.size(); ++k)
                  for (std::size_t j = 0; j < m; ++j)
                    dA.at(k, j) += self.grad.at(seg[k], j);
              });
}

Tape::NodeId Tape::segment_softmax(NodeId scores, std::vector<int> seg,
                                   int num_segments) {
  const Tensor& S = value(scores);
  if (S.cols() != 1) throw InvalidInput("segment_softmax: scores must be [k,1]");
  if (seg.size() != S.rows()) throw InvalidInput("segment_softmax: segment ids per row");
  const std::size_t k = S.rows();
  std::vector<double> seg_max(num_segments, -1e300);
  for (std::size_t i = 0; i < k; ++i) {
    if (seg[i] < 0 || seg[i] >= num_segments)
      throw InvalidInput("segment_softmax: segment id out of range");
    seg_max[seg[i]] = std::max(seg_max[seg[i]], S.at(i, 0));
  }
  std::vector<double> seg_sum(num_segments, 0.0);
  Tensor C(k, 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    C.at(i, 0) = std::exp(S.at(i, 0) - seg_max[seg[i]]);
    seg_sum[seg[i]] += C.at(i, 0);
  }
  for (std::size_t i = 0; i < k; ++i) C.at(i, 0) /= seg_sum[seg[i]];
  NodeId out = push(std::move(C), wants_grad(scores), nullptr);
  nodes_[out].backprop = [scores, out, num_segments,
                          seg = std::move(seg)](Tape& t, const Node& self) {
    const Tensor& Y = t.value(out);
    Tensor& dS = t.grad_buffer(scores);
    std::vector<double> dot(num_segments, 0.0);
    for (std::size_t i = 0; i < seg.size(); ++i)
      dot[seg[i]] += self.grad.at(i, 0) * Y.at(i, 0);
    for (std::size_t i = 0; i < seg.size(); ++i)
      dS.at(i, 0) += Y.at(i, 0) * (self.grad.at(i, 0) - dot[seg[i]]);
  };
  return out;
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw InvalidInput("concat_cols: no inputs");
  const std::size_t n = value(parts[0]).rows();
  std::size_t total = 0;
  bool ng = false;
  for (NodeId p : parts) {
    if (value(p).rows() != n) throw InvalidInput("concat_cols: row mismatch");
    total += value(p).cols();
    ng = ng || wants_grad(p);
  }
  Tensor C(n, total, 0.0);
  std::size_t off = 0;
  for (NodeId p : parts) {
    const Tensor& A = value(p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) C.at(i, off + j) = A.at(i, j);
    off += A.cols();
  }
  return push(std::move(C), ng, [parts, n](Tape& t, const Node& self) {
    std::size_t off2 = 0;
    for (NodeId p : parts) {
      const std::size_t w = t.value(p).cols();
      if (t.wants_grad(p)) {
        Tensor& dP = t.grad_buffer(p);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < w; ++j)
            dP.at(i, j) += self.grad.at(i, off2 + j);
      }
      off2 += w;
    }
  });
}

Tape::NodeId Tape::cross_entropy_mean(NodeId logits, std::vector<int> labels) {
  const Tensor& L = value(logits);
  if (labels.size() != L.rows())
    throw InvalidInput("cross_entropy_mean: one label per row");
  const std::size_t n = L.rows(), m = L.cols();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= m)
      throw InvalidInput("cross_entropy_mean: label out of range");
    double mx = L.at(i, 0);
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, L.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += std::exp(L.at(i, j) - mx);
    loss += mx + std::log(sum) - L.at(i, labels[i]);
  }
  loss /= static_cast<double>(n);
  return push(Tensor::scalar(loss), wants_grad(logits),
              [logits, n, m, labels = std::move(labels)](Tape& t, const Node& self) {
                const Tensor& L2 = t.value(logits);
                Tensor& dL = t.grad_buffer(logits);
                const double g = self.grad[0] / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i) {
                  double mx = L2.at(i, 0);
                  for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, L2.at(i, j));
                  double sum = 0.0;
                  for (std::size_t j = 0; j < m; ++j) sum += std::exp(L2.at(i, j) - mx);
                  for (std::size_t j = 0; j < m; ++j) {
                    const double p = std::exp(L2.at(i, j) - mx) / sum;
                    const double target = (static_cast<int>(j) == labels[i]) ? 1.0 : 0.0;
                    dL.at(i, j) += g * (p - target);
                  }
                }
              });
}

Tape::NodeId Tape::sum_all(NodeId a) {
  const Tensor& A = value(a);
  double acc = 0.0;
  for (double v : A.data()) acc += v;
  return push(Tensor::scalar(acc), wants_grad(a), [a](Tape& t, const Node& self) {
    Tensor& dA = t.grad_buffer(a);
    for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[0];
  });
}

void Tape::backward(NodeId loss) {
  if (value(loss).size() != 1)
    throw InvalidInput("backward: loss must be a scalar");
  for (auto& n : nodes_) n.grad = Tensor();
  grad_buffer(loss)[0] = 1.0;
  for (NodeId i = loss; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.backprop) n.backprop(*this, n);
    if (n.bound) {
      Tensor& g = n.bound->grad;
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
    }
  }
}

double grad_check(ParamStore& params,
                  const std::function<double(bool)>& loss_fn, double eps,
                  int max_coords) {
  params.zero_grads();
  loss_fn(true);
  // Analytic gradients are snapshotted before probing so that the perturbed
  // forward passes cannot disturb them.
  std::vector<Tensor> analytic;
  analytic.reserve(params.all().size());
  for (const auto& p : params.all()) analytic.push_back(p.grad);

  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.all().size(); ++pi) {
    Param& p = params.all()[pi];
    const std::size_t total = p.value.size();
    const std::size_t stride =
        std::max<std::size_t>(1, total / static_cast<std::size_t>(max_coords));
    for (std::size_t k = 0; k < total; k += stride) {
      const double saved = p.value[k];
      p.value[k] = saved + eps;
      const double fp = loss_fn(false);
      p.value[k] = saved - eps;
      const double fm = loss_fn(false);
      p.value[k] = saved;
      const double fd = (fp - fm) / (2.0 * eps);
      const double ad = analytic[pi][k];
      const double rel =
          std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-3});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace hgnn::diff
