#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hgnn/graph.hpp"
#include "hgnn/rng.hpp"
#include "hgnn/tensor.hpp"

namespace hgnn::feat {

// Log-domain normalization constants for one feature. Computed on the
// training split only.
struct FeatureStats {
  std::string name;
  double q0 = 0.0;   // log of the minimum positive value
  double q5 = 0.0;   // log-domain 5th percentile
  double q95 = 0.0;  // log-domain 95th percentile
  bool value_type = false;  // use q5 as the lower anchor
  bool constant = false;    // no positive support or degenerate range -> 0
};

struct NormalizationStats {
  std::vector<FeatureStats> per_feature;
};

// Fits the five-stage pipeline's constants: zeros/negatives are treated as
// missing, quantiles are taken over log(x) of the remaining positive values
// with linear interpolation between order statistics.
NormalizationStats normalize_fit(const diff::Tensor& train_features,
                                 const std::vector<std::string>& names,
                                 const std::vector<bool>& value_type);

// Applies: zeros -> missing, log, affine map by (anchor, q95), clip to [0,1],
// missing -> 0. Negative inputs take the missing path; their count is added
// to *negative_count when provided. Output is NaN-free and within [0,1].
diff::Tensor normalize_apply(const diff::Tensor& features,
                             const NormalizationStats& stats,
                             std::size_t* negative_count = nullptr);

// Effective lower anchor for one feature (q5 for value-type features unless
// that collapses the range, else q0).
double lower_anchor(const FeatureStats& f);

extern const std::vector<std::string> kDerivedFeatureNames;

// Derived transactional features for one node:
// avg_sent, avg_received, in_ratio, out_ratio, cluster_ratio (reserved,
// always 0), node_age, activity_rate. Missing raw fields yield NaN entries.
std::vector<double> derive_features(const graph::TransactionGraph& g,
                                    std::uint32_t node);

// Optional historical conversion-rate table (date,usd_per_btc).
class RateTable {
 public:
  static RateTable load(const std::string& path);
  bool empty() const { return rows_.empty(); }
  // Median rate among dates within [t0, t1] (unix seconds); falls back to the
  // median of the whole table when the window is empty, and to 1.0 when the
  // table itself is empty.
  double median_over(double t0, double t1) const;
  void add(std::int64_t ts, double rate);

 private:
  std::vector<std::pair<std::int64_t, double>> rows_;  // sorted by ts
};

// Full feature assembly for every node: value-type raw columns are scaled by
// the node's lifetime median rate (when a table is given), then the derived
// columns are appended. Returns the combined names and matrix.
struct AssembledFeatures {
  std::vector<std::string> names;
  std::vector<bool> value_type;
  diff::Tensor matrix;
};
AssembledFeatures assemble_features(const graph::TransactionGraph& g,
                                    const std::vector<std::string>& value_type_names,
                                    const RateTable* rates);

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

struct SplitAssignment {
  std::vector<std::uint32_t> seeds;
  std::vector<int> label;
  std::vector<Split> split;
  std::vector<std::string> warnings;

  std::vector<std::uint32_t> seeds_in(Split s) const;
};

// Per class: seeded shuffle then a contiguous 40/30/30 cut with
// largest-remainder rounding. Classes with fewer than 3 members go entirely
// to train (with a warning).
SplitAssignment stratified_split(
    const std::vector<std::pair<std::uint32_t, int>>& labeled,
    std::uint64_t split_seed);

// Training-split oversampling: every class below `target` is resampled with
// replacement up to exactly `target` entries (originals kept once); classes
// at or above target keep their original multiplicity.
std::vector<std::uint32_t> oversample_train(const SplitAssignment& assignment,
                                            int target, Rng& rng);

void save_stats(const std::string& path, const NormalizationStats& stats);
NormalizationStats load_stats(const std::string& path);

}  // namespace hgnn::feat
