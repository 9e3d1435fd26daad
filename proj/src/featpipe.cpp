#include "hgnn/featpipe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace hgnn::feat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDegenerate = 1e-12;

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNaN;
  if (sorted.size() == 1) return sorted[0];
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

int find_column(const std::vector<std::string>& names, const std::string& want) {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == want) return static_cast<int>(j);
  return -1;
}

}  // namespace

double lower_anchor(const FeatureStats& f) {
  if (f.value_type && f.q95 - f.q5 > kDegenerate) return f.q5;
  return f.q0;
}

NormalizationStats normalize_fit(const diff::Tensor& train_features,
                                 const std::vector<std::string>& names,
                                 const std::vector<bool>& value_type) {
  if (names.size() != train_features.cols() || value_type.size() != names.size())
    throw InvalidInput("normalize_fit: names/flags must match feature count");
  NormalizationStats stats;
  stats.per_feature.resize(names.size());
  std::vector<double> logs;
  for (std::size_t j = 0; j < names.size(); ++j) {
    FeatureStats& f = stats.per_feature[j];
    f.name = names[j];
    f.value_type = value_type[j];
    logs.clear();
    for (std::size_t i = 0; i < train_features.rows(); ++i) {
      const double x = train_features.at(i, j);
      if (std::isfinite(x) && x > 0.0) logs.push_back(std::log(x));
    }
    if (logs.empty()) {
      f.constant = true;
      continue;
    }
    std::sort(logs.begin(), logs.end());
    f.q0 = logs.front();
    f.q5 = quantile(logs, 0.05);
    f.q95 = quantile(logs, 0.95);
    if (f.q95 - lower_anchor(f) <= kDegenerate) f.constant = true;
  }
  return stats;
}

diff::Tensor normalize_apply(const diff::Tensor& features,
                             const NormalizationStats& stats,
                             std::size_t* negative_count) {
  if (features.cols() != stats.per_feature.size())
    throw InvalidInput("normalize_apply: stats do not match feature count");
  diff::Tensor out(features.rows(), features.cols(), 0.0);
  std::size_t negatives = 0;
  for (std::size_t j = 0; j < features.cols(); ++j) {
    const FeatureStats& f = stats.per_feature[j];
    if (f.constant) continue;  // already zero
    const double anchor = lower_anchor(f);
    const double span = f.q95 - anchor;
    for (std::size_t i = 0; i < features.rows(); ++i) {
      const double x = features.at(i, j);
      if (!std::isfinite(x) || x == 0.0) continue;  // missing path -> 0
      if (x < 0.0) {
        ++negatives;  // corrupted magnitude, treated as missing
        continue;
      }
      const double y = (std::log(x) - anchor) / span;
      out.at(i, j) = std::clamp(y, 0.0, 1.0);
    }
  }
  if (negative_count) *negative_count += negatives;
  return out;
}

const std::vector<std::string> kDerivedFeatureNames = {
    "derived_avg_sent",      "derived_avg_received", "derived_in_ratio",
    "derived_out_ratio",     "derived_cluster_ratio", "derived_node_age",
    "derived_activity_rate"};

namespace {

std::vector<double> derive_row(const diff::Tensor& feats,
                               const std::vector<std::string>& names,
                               double in_deg, double out_deg,
                               std::uint32_t node) {
  auto raw = [&](const char* name) -> double {
    const int j = find_column(names, name);
    if (j < 0 || feats.empty()) return kNaN;
    return feats.at(node, static_cast<std::size_t>(j));
  };
  const double total_sent = raw("total_sent");
  const double total_received = raw("total_received");
  const double in_count = raw("in_count");
  const double out_count = raw("out_count");
  const double first_ts = raw("first_ts");
  const double last_ts = raw("last_ts");

  std::vector<double> d(kDerivedFeatureNames.size(), kNaN);
  d[0] = total_sent / std::max(1.0, out_count);
  d[1] = total_received / std::max(1.0, in_count);
  d[2] = in_deg / (in_deg + out_deg + 1.0);
  d[3] = out_deg / (in_deg + out_deg + 1.0);
  d[4] = 0.0;  // cluster composition slot; no cluster data at this scale
  d[5] = last_ts - first_ts;
  d[6] = (in_count + out_count) / std::max(1.0, last_ts - first_ts);
  return d;
}

}  // namespace

std::vector<double> derive_features(const graph::TransactionGraph& g,
                                    std::uint32_t node) {
  if (node >= g.num_nodes) throw InvalidInput("derive_features: node out of range");
  return derive_row(g.features, g.feature_names,
                    static_cast<double>(g.in_degree(node)),
                    static_cast<double>(g.out_degree(node)), node);
}

RateTable RateTable::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open rate table: " + path);
  RateTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("date,", 0) == 0) continue;
    int y = 0, m = 0, d = 0;
    double rate = 0.0;
    if (std::sscanf(line.c_str(), "%d-%d-%d,%lf", &y, &m, &d, &rate) != 4)
      throw InvalidInput("rate table: bad line " + std::to_string(line_no) +
                         " in " + path);
    // Civil date -> days since 1970-01-01 (Howard Hinnant's algorithm).
    const int yy = y - (m <= 2 ? 1 : 0);
    const int era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy =
        (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
        static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    const std::int64_t days =
        static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) -
        719468;
    t.add(days * 86400, rate);
  }
  return t;
}

void RateTable::add(std::int64_t ts, double rate) {
  rows_.emplace_back(ts, rate);
  std::sort(rows_.begin(), rows_.end());
}

double RateTable::median_over(double t0, double t1) const {
  if (rows_.empty()) return 1.0;
  std::vector<double> in_window;
  for (const auto& [ts, rate] : rows_)
    if (static_cast<double>(ts) >= t0 && static_cast<double>(ts) <= t1)
      in_window.push_back(rate);
  if (in_window.empty())
    for (const auto& [ts, rate] : rows_) in_window.push_back(rate);
  std::sort(in_window.begin(), in_window.end());
  const std::size_t n = in_window.size();
  return n % 2 ? in_window[n / 2]
               : 0.5 * (in_window[n / 2 - 1] + in_window[n / 2]);
}

AssembledFeatures assemble_features(const graph::TransactionGraph& g,
                                    const std::vector<std::string>& value_type_names,
                                    const RateTable* rates) {
  AssembledFeatures out;
  const std::size_t raw_cols = g.features.empty() ? 0 : g.features.cols();
  out.names = g.feature_names;
  out.names.insert(out.names.end(), kDerivedFeatureNames.begin(),
                   kDerivedFeatureNames.end());
  out.value_type.assign(out.names.size(), false);
  for (std::size_t j = 0; j < out.names.size(); ++j)
    for (const auto& want : value_type_names)
      if (out.names[j] == want) out.value_type[j] = true;

  const int first_col = find_column(g.feature_names, "first_ts");
  const int last_col = find_column(g.feature_names, "last_ts");
  out.matrix = diff::Tensor(std::max<std::size_t>(1, g.num_nodes),
                            out.names.size(), kNaN);

  // Raw columns are rate-converted first so the derived features see
  // converted magnitudes.
  diff::Tensor converted = g.features;
  if (rates && !rates->empty() && raw_cols > 0) {
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
      double t0 = -std::numeric_limits<double>::infinity();
      double t1 = std::numeric_limits<double>::infinity();
      if (first_col >= 0) t0 = g.features.at(v, static_cast<std::size_t>(first_col));
      if (last_col >= 0) t1 = g.features.at(v, static_cast<std::size_t>(last_col));
      if (!std::isfinite(t0)) t0 = -std::numeric_limits<double>::infinity();
      if (!std::isfinite(t1)) t1 = std::numeric_limits<double>::infinity();
      const double rate = rates->median_over(t0, t1);
      for (std::size_t j = 0; j < raw_cols; ++j)
        if (out.value_type[j]) converted.at(v, j) *= rate;
    }
  }

  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    for (std::size_t j = 0; j < raw_cols; ++j)
      out.matrix.at(v, j) = converted.at(v, j);
    const auto derived = derive_row(converted, g.feature_names,
                                    static_cast<double>(g.in_degree(static_cast<std::uint32_t>(v))),
                                    static_cast<double>(g.out_degree(static_cast<std::uint32_t>(v))),
                                    static_cast<std::uint32_t>(v));
    for (std::size_t j = 0; j < derived.size(); ++j)
      out.matrix.at(v, raw_cols + j) = derived[j];
  }
  return out;
}

std::vector<std::uint32_t> SplitAssignment::seeds_in(Split s) const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (split[i] == s) out.push_back(seeds[i]);
  return out;
}

SplitAssignment stratified_split(
    const std::vector<std::pair<std::uint32_t, int>>& labeled,
    std::uint64_t split_seed) {
  SplitAssignment out;
  std::map<int, std::vector<std::uint32_t>> by_class;
  for (const auto& [id, cls] : labeled) {
    if (cls < 0) throw InvalidInput("stratified_split: unlabeled seed");
    by_class[cls].push_back(id);
  }
  for (auto& [cls, ids] : by_class) {
    std::sort(ids.begin(), ids.end());  // independent of input order
    Rng rng(Rng::derive(split_seed, /*stream=*/0xC1A55u,
                        static_cast<std::uint64_t>(cls)));
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      const std::size_t j = i + rng.uniform_int(ids.size() - i);
      std::swap(ids[i], ids[j]);
    }
    const std::size_t n = ids.size();
    std::size_t counts[3];
    if (n < 3) {
      counts[0] = n;
      counts[1] = counts[2] = 0;
      out.warnings.push_back("class " + std::string(graph::kClassNames[cls]) +
                             " has fewer than 3 members; all assigned to train");
    } else {
      const double frac[3] = {0.4, 0.3, 0.3};
      double quota[3];
      std::size_t assigned = 0;
      for (int s = 0; s < 3; ++s) {
        quota[s] = frac[s] * static_cast<double>(n);
        counts[s] = static_cast<std::size_t>(quota[s]);
        assigned += counts[s];
      }
      // Largest-remainder rounding; ties resolved in train/val/test order.
      while (assigned < n) {
        int best = 0;
        double best_rem = -1.0;
        for (int s = 0; s < 3; ++s) {
          const double rem = quota[s] - static_cast<double>(counts[s]);
          if (rem > best_rem + 1e-12) {
            best_rem = rem;
            best = s;
          }
        }
        ++counts[best];
        ++assigned;
      }
    }
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s)
      for (std::size_t k = 0; k < counts[s]; ++k, ++pos) {
        out.seeds.push_back(ids[pos]);
        out.label.push_back(cls);
        out.split.push_back(static_cast<Split>(s));
      }
  }
  return out;
}

std::vector<std::uint32_t> oversample_train(const SplitAssignment& assignment,
                                            int target, Rng& rng) {
  if (target <= 0) throw InvalidInput("oversample target must be positive");
  std::map<int, std::vector<std::uint32_t>> train_by_class;
  std::map<int, std::size_t> class_totals;
  for (std::size_t i = 0; i < assignment.seeds.size(); ++i) {
    ++class_totals[assignment.label[i]];
    if (assignment.split[i] == Split::kTrain)
      train_by_class[assignment.label[i]].push_back(assignment.seeds[i]);
  }
  std::vector<std::uint32_t> out;
  for (const auto& [cls, total] : class_totals) {
    auto it = train_by_class.find(cls);
    if (it == train_by_class.end() || it->second.empty())
      throw InvalidInput("oversample_train: class " +
                         std::string(graph::kClassNames[cls]) +
                         " has no training members");
    const auto& members = it->second;
    out.insert(out.end(), members.begin(), members.end());
    for (std::size_t k = members.size(); k < static_cast<std::size_t>(target); ++k)
      out.push_back(members[rng.uniform_int(members.size())]);
  }
  return out;
}

void save_stats(const std::string& path, const NormalizationStats& stats) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  os << "hgnn-stats v1\n";
  char buf[512];
  for (const auto& f : stats.per_feature) {
    std::snprintf(buf, sizeof(buf), "%s\t%.17g\t%.17g\t%.17g\t%d\t%d\n",
                  f.name.c_str(), f.q0, f.q5, f.q95, f.value_type ? 1 : 0,
                  f.constant ? 1 : 0);
    os << buf;
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

NormalizationStats load_stats(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open stats file: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "hgnn-stats v1")
    throw InvalidInput("stats file: bad header in " + path);
  NormalizationStats stats;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    FeatureStats f;
    int vt = 0, cst = 0;
    if (!(ss >> f.name >> f.q0 >> f.q5 >> f.q95 >> vt >> cst))
      throw InvalidInput("stats file: bad record in " + path);
    f.value_type = vt != 0;
    f.constant = cst != 0;
    stats.per_feature.push_back(std::move(f));
  }
  return stats;
}

}  // namespace hgnn::feat
