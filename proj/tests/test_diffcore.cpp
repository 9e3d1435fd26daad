#include <doctest.h>

#include <cmath>

#include "hgnn/rng.hpp"
#include "hgnn/tape.hpp"

using namespace hgnn;
using diff::Param;
using diff::ParamStore;
using diff::Tape;
using diff::Tensor;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t(r, c, 0.0);
  for (auto& v : t.data()) v = scale * rng.normal();
  return t;
}

}  // namespace

TEST_CASE("forward primitives basic values") {
  Tape t;
  auto x = t.input(Tensor::from_rows(1, 3, {-1.0, 0.0, 2.0}));
  CHECK(t.value(t.relu(x)).data() == std::vector<double>{0.0, 0.0, 2.0});
  auto lr = t.leaky_relu(x, 0.2);
  CHECK(t.value(lr)[0] == doctest::Approx(-0.2));
  CHECK(t.value(lr)[2] == doctest::Approx(2.0));

  auto s = t.input(Tensor::from_rows(3, 1, {4.0, 4.0, 4.0}));
  auto sm = t.segment_softmax(s, {0, 0, 0}, 1);
  for (int i = 0; i < 3; ++i)
    CHECK(t.value(sm)[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // segment softmax rows sum to one per segment
  Rng rng(7);
  Tape t2;
  auto scores = t2.input(random_tensor(rng, 10, 1, 3.0));
  std::vector<int> seg = {0, 0, 0, 1, 1, 2, 2, 2, 2, 3};
  auto soft = t2.segment_softmax(scores, seg, 4);
  std::vector<double> sums(4, 0.0);
  for (int i = 0; i < 10; ++i) sums[seg[i]] += t2.value(soft)[i];
  for (double v : sums) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("shape mismatches are rejected") {
  Tape t;
  auto a = t.input(Tensor(2, 3, 1.0));
  auto b = t.input(Tensor(3, 2, 1.0));
  CHECK_THROWS_AS(t.add(a, b), InvalidInput);
  CHECK_THROWS_AS(t.matmul(a, a), InvalidInput);
  CHECK_THROWS_AS(t.backward(a), InvalidInput);  // non-scalar loss
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(42);
  ParamStore store;
  store.add("A", random_tensor(rng, 3, 4));
  store.add("B", random_tensor(rng, 4, 2));
  auto loss_fn = [&](bool with_grad) {
    Tape t;
    auto a = t.param(store.get("A"));
    auto b = t.param(store.get("B"));
    auto loss = t.sum_all(t.tanh(t.matmul(a, b)));
    if (with_grad) t.backward(loss);
    return t.value(loss)[0];
  };
  CHECK(diff::grad_check(store, loss_fn, 1e-5) <= 1e-6);
}

TEST_CASE("pure linear model gradient is exact") {
  Rng rng(3);
  ParamStore store;
  store.add("W", random_tensor(rng, 4, 3));
  const Tensor x = random_tensor(rng, 3, 4);
  auto loss_fn = [&](bool with_grad) {
    Tape t;
    auto w = t.param(store.get("W"));
    auto loss = t.sum_all(t.matmul(t.input(x), w));
    if (with_grad) t.backward(loss);
    return t.value(loss)[0];
  };
  CHECK(diff::grad_check(store, loss_fn, 1e-5) <= 1e-9);
  // d(sum(XW))/dW_ij = sum_i X[i, row]
  store.zero_grads();
  loss_fn(true);
  const Tensor& g = store.get("W").grad;
  for (std::size_t i = 0; i < 4; ++i) {
    double expect = 0.0;
    for (std::size_t r = 0; r < 3; ++r) expect += x.at(r, i);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(g.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("disconnected parameters receive zero gradient") {
  Rng rng(4);
  ParamStore store;
  store.add("used", random_tensor(rng, 2, 2));
  store.add("unused", random_tensor(rng, 2, 2));
  Tape t;
  auto w = t.param(store.get("used"));
  t.param(store.get("unused"));
  auto loss = t.sum_all(w);
  store.zero_grads();
  t.backward(loss);
  for (double v : store.get("unused").grad.data()) CHECK(v == 0.0);
  for (double v : store.get("used").grad.data()) CHECK(v == 1.0);
}

TEST_CASE("composite op gradients match finite differences") {
  Rng rng(11);
  ParamStore store;
  store.add("W", random_tensor(rng, 5, 5, 0.4));
  const Tensor x = random_tensor(rng, 6, 5, 0.4);
  std::vector<int> idx = {0, 2, 4, 1, 1, 5};
  std::vector<int> seg = {0, 0, 1, 1, 2, 2};
  auto loss_fn = [&](bool with_grad) {
    Tape t;
    auto w = t.param(store.get("W"));
    auto h = t.matmul(t.input(x), w);
    auto r = t.row_norm(h);
    auto scaled = t.row_scale(h, t.div(t.tanh(r), r));
    auto gathered = t.gather_rows(scaled, idx);
    auto pooled = t.segment_sum(gathered, seg, 3);
    auto att = t.segment_softmax(t.row_norm(pooled), {0, 0, 0}, 1);
    auto weighted = t.row_scale(pooled, att);
    auto cat = t.concat_cols({weighted, t.leaky_relu(pooled, 0.2)});
    auto loss = t.sum_all(t.tanh(cat));
    if (with_grad) t.backward(loss);
    return t.value(loss)[0];
  };
  CHECK(diff::grad_check(store, loss_fn, 1e-5) <= 1e-5);
}

TEST_CASE("atanh and sqrt clamp regions have zero gradient") {
  ParamStore store;
  store.add("x", Tensor::from_rows(1, 2, {0.9999999999, 0.5}));
  auto loss_fn = [&](bool with_grad) {
    Tape t;
    auto x = t.param(store.get("x"));
    auto loss = t.sum_all(t.atanh_clamped(x));
    if (with_grad) t.backward(loss);
    return t.value(loss)[0];
  };
  store.zero_grads();
  loss_fn(true);
  CHECK(store.get("x").grad[0] == 0.0);  // clamped coordinate
  CHECK(store.get("x").grad[1] == doctest::Approx(1.0 / 0.75).epsilon(1e-12));
}

TEST_CASE("cross entropy of uniform logits is ln(K)") {
  Tape t;
  auto logits = t.input(Tensor(2, 7, 0.0));
  auto loss = t.cross_entropy_mean(logits, {3, 5});
  CHECK(t.value(loss)[0] == doctest::Approx(1.9459101490553133).epsilon(1e-12));

  // a large correct-class margin drives the loss toward zero
  Tensor strong(1, 7, 0.0);
  strong.at(0, 2) = 50.0;
  Tape t2;
  auto l2 = t2.cross_entropy_mean(t2.input(strong), {2});
  CHECK(t2.value(l2)[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cross entropy gradient matches finite differences") {
  Rng rng(17);
  ParamStore store;
  store.add("W", random_tensor(rng, 4, 7, 0.5));
  const Tensor x = random_tensor(rng, 5, 4);
  const std::vector<int> labels = {0, 3, 6, 2, 2};
  auto loss_fn = [&](bool with_grad) {
    Tape t;
    auto logits = t.matmul(t.input(x), t.param(store.get("W")));
    auto loss = t.cross_entropy_mean(logits, labels);
    if (with_grad) t.backward(loss);
    return t.value(loss)[0];
  };
  CHECK(diff::grad_check(store, loss_fn, 1e-5) <= 1e-6);
}

TEST_CASE("dropout") {
  Rng rng(99);
  Tape t;
  auto x = t.input(Tensor(1, 8, 1.0));
  // eval mode is the identity (same node comes back)
  CHECK(t.dropout(x, 0.5, false, rng) == x);

  // inverted scaling keeps the expectation at one
  const std::size_t width = 64;
  const int draws = 10000;
  std::vector<double> acc(width, 0.0);
  Rng drop_rng(123);
  for (int rep = 0; rep < draws; ++rep) {
    Tape ti;
    auto ones = ti.input(Tensor(1, width, 1.0));
    auto d = ti.dropout(ones, 0.1, true, drop_rng);
    for (std::size_t j = 0; j < width; ++j) acc[j] += ti.value(d)[j];
  }
  double mean_of_means = 0.0;
  for (std::size_t j = 0; j < width; ++j) {
    acc[j] /= draws;
    mean_of_means += acc[j];
    CHECK(acc[j] == doctest::Approx(1.0).epsilon(0.011));
  }
  CHECK(mean_of_means / width == doctest::Approx(1.0).epsilon(0.002));
}

TEST_CASE("forward and gradients are deterministic across runs") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    ParamStore store;
    store.add("W", random_tensor(rng, 3, 3));
    Tape t;
    Rng drop(seed + 1);
    auto h = t.dropout(t.tanh(t.matmul(t.input(random_tensor(rng, 4, 3)),
                                       t.param(store.get("W")))),
                       0.1, true, drop);
    auto loss = t.sum_all(h);
    store.zero_grads();
    t.backward(loss);
    std::vector<double> out{t.value(loss)[0]};
    for (double g : store.get("W").grad.data()) out.push_back(g);
    return out;
  };
  CHECK(run(555) == run(555));
}
