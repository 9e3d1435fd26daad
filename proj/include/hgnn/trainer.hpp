#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hgnn/models.hpp"

namespace hgnn::train {

struct TrainConfig {
  double lr = 1e-3;
  std::vector<double> lr_grid = {1e-4, 3e-4, 1e-3, 3e-3};
  std::vector<double> curvature_grid = {0.1, 0.3, 0.5, 0.75, 1.0, 1.25, 1.5};
  int max_epochs = 200;
  int patience = 20;  // epochs without validation macro-F1 improvement
  int batch_size = 32;
  int oversample_target = 300;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct AdamState {
  int step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update over every parameter in the store. Throws
// GradientError naming the parameter if a non-finite gradient is seen.
void adam_step(diff::ParamStore& params, AdamState& state, double lr);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool present = false;  // class has true instances in the eval set
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<int>> confusion;  // [true][pred]
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<int> absent_classes;  // excluded from the macro averages
};

MetricsReport compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred, int classes);

// Argmax over seed logits per subgraph, dropout disabled. Side-effect free.
MetricsReport evaluate(const models::GnnModel& model,
                       std::span<const graph::EgoSubgraph> eval_set,
                       int batch_size = 64);

struct TrainResult {
  std::string status = "ok";  // "ok" or "diverged@epochN"
  int epochs_run = 0;
  int best_epoch = -1;
  double best_val_f1 = 0.0;
  std::vector<double> loss_history;    // mean train loss per epoch
  std::vector<double> val_f1_history;  // validation macro-F1 per epoch
};

// Epochs over shuffled batches with early stopping on validation macro-F1.
// The model is left at its best-validation parameters. Divergence is recorded
// in the result status, not thrown.
TrainResult train_model(models::GnnModel& model, const TrainConfig& tcfg,
                        const std::vector<const graph::EgoSubgraph*>& train_set,
                        std::span<const graph::EgoSubgraph> val_set);

struct GridCell {
  double curvature = 0.0;  // 0 marks a Euclidean (lr-only) cell
  double lr = 0.0;
  double val_macro_f1 = 0.0;
  double test_macro_f1 = 0.0;
  int epochs = 0;
  std::string status = "ok";
};

struct GridResult {
  std::vector<GridCell> cells;
  // max - min of val_macro_f1 over the lr axis, per curvature.
  std::vector<std::pair<double, double>> spread_by_curvature;
};

// One independent training run per (curvature, lr) cell, each deterministically
// seeded from (master_seed, cell identity) so execution order and worker count
// do not affect results. Euclidean configs sweep the lr grid only.
GridResult grid_search(const models::ModelConfig& base, const TrainConfig& tcfg,
                       const std::vector<const graph::EgoSubgraph*>& train_set,
                       std::span<const graph::EgoSubgraph> val_set,
                       std::span<const graph::EgoSubgraph> test_set,
                       int workers = 1);

// Identity of one evaluation run for the metrics CSV.
struct RunInfo {
  std::string arch;
  std::string geometry;
  int layers = 0;
  int subgraph_depth = 0;
  bool hyperbolic = false;
  double curvature = 0.0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  std::string split;
};

void write_metrics_csv(
    const std::string& path,
    const std::vector<std::pair<RunInfo, MetricsReport>>& rows);
void write_grid_csv(const std::string& path, const GridResult& grid);
// Fig-3-style chart: one polyline per curvature, log-scale lr on x.
void write_grid_svg(const std::string& path, const GridResult& grid);

}  // namespace hgnn::train
