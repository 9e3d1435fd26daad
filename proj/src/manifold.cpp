#include "hgnn/manifold.hpp"

#include <cmath>
#include <string>

namespace hgnn::manifold {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw InvalidInput(std::string(what) + ": non-finite coordinate");
}

// Checks c||x||^2 < 1 up to a small slack; returns sqrt(c)*||x|| clamped for
// atanh-style use.
double ball_radius_checked(const PoincarePoint& p, const char* what) {
  const double r = norm(p.coords);
  const double s = std::sqrt(p.curv.c) * r;
  if (s > 1.0 + 1e-9)
    throw DomainError(std::string(what) + ": point outside the ball");
  return s;
}

}  // namespace

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

PoincarePoint exp_map0(const TangentVector& v) {
  require_finite(v.coords, "exp_map0");
  const double sc = std::sqrt(v.curv.c);
  const double r = norm(v.coords);
  if (r < kZeroEps)
    return PoincarePoint{std::vector<double>(v.coords.size(), 0.0), v.curv};
  const double factor = std::tanh(sc * r) / (sc * r);
  std::vector<double> out(v.coords.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * v.coords[i];
  return project_to_ball(std::move(out), v.curv);
}

TangentVector log_map0(const PoincarePoint& x) {
  const double s = ball_radius_checked(x, "log_map0");
  if (s < kZeroEps)
    return TangentVector{std::vector<double>(x.coords.size(), 0.0), x.curv};
  const double clamped = std::min(s, 1.0 - kAtanhEps);
  const double factor = std::atanh(clamped) / s;
  std::vector<double> out(x.coords.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x.coords[i];
  return TangentVector{std::move(out), x.curv};
}

KleinPoint poincare_to_klein(const PoincarePoint& x) {
  ball_radius_checked(x, "poincare_to_klein");
  const double r = norm(x.coords);
  const double factor = 2.0 / (1.0 + x.curv.c * r * r);
  std::vector<double> out(x.coords.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x.coords[i];
  return KleinPoint{std::move(out), x.curv};
}

PoincarePoint klein_to_poincare(const KleinPoint& x) {
  const double r = norm(x.coords);
  const double s2 = x.curv.c * r * r;
  if (s2 > 1.0 + 1e-9)
    throw DomainError("klein_to_poincare: point outside the Klein ball");
  const double factor = 1.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - s2)));
  std::vector<double> out(x.coords.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x.coords[i];
  return project_to_ball(std::move(out), x.curv);
}

PoincarePoint klein_mean(std::span<const PoincarePoint> points, MeanMode mode) {
  if (points.empty()) throw InvalidInput("klein_mean: empty point list");
  const double c = points.front().curv.c;
  const std::size_t dim = points.front().coords.size();
  for (const auto& p : points) {
    if (p.curv.c != c) throw InvalidInput("klein_mean: mixed curvatures");
    if (p.coords.size() != dim) throw InvalidInput("klein_mean: mixed dimensions");
  }
  std::vector<double> acc(dim, 0.0);
  double weight_sum = 0.0;
  for (const auto& p : points) {
    KleinPoint k = poincare_to_klein(p);
    double w = 1.0;
    if (mode == MeanMode::kLorentzWeighted) {
      const double rk = norm(k.coords);
      w = 1.0 / std::sqrt(std::max(kZeroEps, 1.0 - c * rk * rk));
    }
    for (std::size_t i = 0; i < dim; ++i) acc[i] += w * k.coords[i];
    weight_sum += w;
  }
  for (double& v : acc) v /= weight_sum;
  return klein_to_poincare(KleinPoint{std::move(acc), points.front().curv});
}

double hyperbolic_distance(const PoincarePoint& x, const PoincarePoint& y) {
  if (x.curv.c != y.curv.c)
    throw InvalidInput("hyperbolic_distance: mixed curvatures");
  ball_radius_checked(x, "hyperbolic_distance");
  ball_radius_checked(y, "hyperbolic_distance");
  const double c = x.curv.c;
  double diff2 = 0.0;
  for (std::size_t i = 0; i < x.coords.size(); ++i) {
    const double d = x.coords[i] - y.coords[i];
    diff2 += d * d;
  }
  const double nx = norm(x.coords);
  const double ny = norm(y.coords);
  const double denom =
      std::max(kZeroEps, (1.0 - c * nx * nx) * (1.0 - c * ny * ny));
  const double u = 2.0 * c * diff2 / denom;  // acosh argument minus one, >= 0
  // acosh(1+u) = log1p(u + sqrt(u*(u+2))), stable for small u
  const double d = std::log1p(u + std::sqrt(u * (u + 2.0)));
  return d / std::sqrt(c);
}

PoincarePoint project_to_ball(std::vector<double> x, Curvature c) {
  require_finite(x, "project_to_ball");
  const double r = norm(x);
  const double limit = (1.0 - kBallEps) / std::sqrt(c.c);
  if (r >= limit && r > 0.0) {
    const double factor = limit / r;
    for (double& v : x) v *= factor;
  }
  return PoincarePoint{std::move(x), c};
}

}  // namespace hgnn::manifold
