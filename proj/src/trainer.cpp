#include "hgnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "hgnn/common.hpp"

namespace hgnn::train {

using diff::Tape;
using graph::EgoSubgraph;
using models::BatchGraph;
using models::GnnModel;
using models::ModelConfig;

void TrainConfig::validate() const {
  if (lr <= 0.0) throw InvalidInput("learning rate must be positive");
  if (max_epochs <= 0) throw InvalidInput("max_epochs must be positive");
  if (patience <= 0 || patience >= max_epochs)
    throw InvalidInput("patience must be in (0, max_epochs)");
  if (batch_size <= 0) throw InvalidInput("batch_size must be positive");
  if (lr_grid.empty() || curvature_grid.empty())
    throw InvalidInput("sweep grids must not be empty");
  for (double c : curvature_grid)
    if (!(c > 0.0)) throw InvalidInput("curvature grid values must be positive");
}

void adam_step(diff::ParamStore& params, AdamState& state, double lr) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (auto& p : params.all()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      if (!std::isfinite(g))
        throw GradientError("non-finite gradient in parameter " + p.name);
      p.moment1[i] = state.beta1 * p.moment1[i] + (1.0 - state.beta1) * g;
      p.moment2[i] = state.beta2 * p.moment2[i] + (1.0 - state.beta2) * g * g;
      const double mhat = p.moment1[i] / bc1;
      const double vhat = p.moment2[i] / bc2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

MetricsReport compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred, int classes) {
  if (y_true.size() != y_pred.size())
    throw InvalidInput("compute_metrics: label/prediction size mismatch");
  MetricsReport r;
  r.per_class.resize(classes);
  r.confusion.assign(classes, std::vector<int>(classes, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= classes || y_pred[i] < 0 ||
        y_pred[i] >= classes)
      throw InvalidInput("compute_metrics: class index out of range");
    ++r.confusion[y_true[i]][y_pred[i]];
  }
  int present = 0;
  for (int cls = 0; cls < classes; ++cls) {
    int tp = r.confusion[cls][cls];
    int fp = 0, fn = 0;
    for (int other = 0; other < classes; ++other) {
      if (other == cls) continue;
      fp += r.confusion[other][cls];
      fn += r.confusion[cls][other];
    }
    ClassMetrics& m = r.per_class[cls];
    m.present = (tp + fn) > 0;
    if (!m.present) {
      r.absent_classes.push_back(cls);
      continue;
    }
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = static_cast<double>(tp) / (tp + fn);
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
    ++present;
  }
  if (present > 0) {
    r.macro_precision /= present;
    r.macro_recall /= present;
    r.macro_f1 /= present;
  }
  return r;
}

MetricsReport evaluate(const GnnModel& model,
                       std::span<const EgoSubgraph> eval_set, int batch_size) {
  if (eval_set.empty()) throw InvalidInput("evaluate: empty eval set");
  std::vector<int> y_true, y_pred;
  for (std::size_t start = 0; start < eval_set.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop =
        std::min(eval_set.size(), start + static_cast<std::size_t>(batch_size));
    BatchGraph bg = models::make_batch(eval_set.subspan(start, stop - start));
    Tape tape;
    const auto logits = model.forward(tape, bg, /*training=*/false, nullptr);
    const diff::Tensor& out = tape.value(logits);
    for (std::size_t b = 0; b < bg.seed_rows.size(); ++b) {
      const int row = bg.seed_rows[b];
      int best = 0;
      for (std::size_t j = 1; j < out.cols(); ++j)
        if (out.at(row, j) > out.at(row, best)) best = static_cast<int>(j);
      y_pred.push_back(best);
      y_true.push_back(bg.labels[b]);
    }
  }
  return compute_metrics(y_true, y_pred, model.config().classes);
}

TrainResult train_model(GnnModel& model, const TrainConfig& tcfg,
                        const std::vector<const EgoSubgraph*>& train_set,
                        std::span<const EgoSubgraph> val_set) {
  tcfg.validate();
  if (train_set.empty()) throw InvalidInput("train_model: empty training set");
  if (val_set.empty()) throw InvalidInput("train_model: empty validation set");

  TrainResult result;
  AdamState adam;
  std::vector<diff::Tensor> best_params = model.params().snapshot_values();
  double best_f1 = -1.0;
  int since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const EgoSubgraph*> batch;

  for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    Rng shuffle_rng(Rng::derive(tcfg.master_seed, /*stream=*/0x5affe1u, epoch));
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + shuffle_rng.uniform_int(order.size() - i);
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    std::size_t steps = 0;
    bool diverged = false;
    for (std::size_t start = 0; start < order.size() && !diverged;
         start += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train_set[order[k]]);
      std::vector<EgoSubgraph> copies;
      copies.reserve(batch.size());
      for (const auto* sg : batch) copies.push_back(*sg);
      BatchGraph bg = models::make_batch(copies);

      Rng dropout_rng(Rng::derive(tcfg.master_seed, /*stream=*/0xd70u,
                                  static_cast<std::uint64_t>(epoch) * 1000003ull +
                                      steps));
      Tape tape;
      const auto logits = model.forward(tape, bg, /*training=*/true, &dropout_rng);
      const auto loss_id = models::seed_masked_loss(tape, logits, bg);
      const double loss = tape.value(loss_id)[0];
      if (!std::isfinite(loss)) {
        result.status = "diverged@epoch" + std::to_string(epoch);
        diverged = true;
        break;
      }
      model.params().zero_grads();
      tape.backward(loss_id);
      try {
        adam_step(model.params(), adam, tcfg.lr);
      } catch (const GradientError&) {
        result.status = "diverged@epoch" + std::to_string(epoch);
        diverged = true;
        break;
      }
      epoch_loss += loss;
      ++steps;
    }
    if (diverged) {
      result.epochs_run = epoch;
      break;
    }
    result.loss_history.push_back(steps ? epoch_loss / static_cast<double>(steps)
                                        : 0.0);
    const MetricsReport val = evaluate(model, val_set, tcfg.batch_size);
    result.val_f1_history.push_back(val.macro_f1);
    result.epochs_run = epoch;
    if (val.macro_f1 > best_f1) {
      best_f1 = val.macro_f1;
      best_params = model.params().snapshot_values();
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= tcfg.patience) break;
  }

  if (best_f1 >= 0.0) {
    model.params().restore_values(best_params);
    result.best_val_f1 = best_f1;
  }
  return result;
}

namespace {

// Cell identity hash; independent of grid enumeration order.
std::uint64_t cell_key(double curvature, double lr) {
  std::uint64_t cb = 0, lb = 0;
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&cb, &curvature, sizeof(double));
  std::memcpy(&lb, &lr, sizeof(double));
  return Rng::derive(cb, 0x911dull ^ lb);
}

}  // namespace

GridResult grid_search(const ModelConfig& base, const TrainConfig& tcfg,
                       const std::vector<const EgoSubgraph*>& train_set,
                       std::span<const EgoSubgraph> val_set,
                       std::span<const EgoSubgraph> test_set, int workers) {
  tcfg.validate();
  const bool hyperbolic = base.geometry == models::Geometry::kHyperbolic;
  std::vector<GridCell> cells;
  if (hyperbolic) {
    for (double c : tcfg.curvature_grid)
      for (double lr : tcfg.lr_grid) cells.push_back({c, lr});
  } else {
    for (double lr : tcfg.lr_grid) cells.push_back({0.0, lr});
  }

  GridResult result;
  result.cells = cells;
  parallel_for(result.cells.size(), workers, [&](std::size_t i) {
    GridCell& cell = result.cells[i];
    ModelConfig cfg = base;
    if (hyperbolic) cfg.curvature = cell.curvature;
    TrainConfig cell_cfg = tcfg;
    cell_cfg.lr = cell.lr;
    const std::uint64_t key = cell_key(cell.curvature, cell.lr);
    cell_cfg.master_seed = Rng::derive(tcfg.master_seed, 0xce11ull, key);
    try {
      GnnModel model(cfg, Rng::derive(tcfg.master_seed, 0x1417ull, key));
      const TrainResult tr =
          train_model(model, cell_cfg, train_set, val_set);
      cell.val_macro_f1 = tr.best_val_f1;
      cell.epochs = tr.epochs_run;
      cell.status = tr.status;
      if (!test_set.empty())
        cell.test_macro_f1 = evaluate(model, test_set, tcfg.batch_size).macro_f1;
    } catch (const std::exception& e) {
      cell.status = std::string("failed: ") + e.what();
    }
  });

  std::map<double, std::pair<double, double>> ranges;  // c -> (min, max)
  for (const auto& cell : result.cells) {
    auto [it, inserted] = ranges.emplace(
        cell.curvature, std::make_pair(cell.val_macro_f1, cell.val_macro_f1));
    if (!inserted) {
      it->second.first = std::min(it->second.first, cell.val_macro_f1);
      it->second.second = std::max(it->second.second, cell.val_macro_f1);
    }
  }
  for (const auto& [c, mm] : ranges)
    result.spread_by_curvature.emplace_back(c, mm.second - mm.first);
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(
    const std::string& path,
    const std::vector<std::pair<RunInfo, MetricsReport>>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  os << "arch,geometry,layers,subgraph_depth,curvature,lr,seed,split,class,"
        "precision,recall,f1,macro_f1\n";
  for (const auto& [info, report] : rows) {
    const std::string prefix =
        info.arch + "," + info.geometry + "," + std::to_string(info.layers) +
        "," + std::to_string(info.subgraph_depth) + "," +
        (info.hyperbolic ? fmt_short(info.curvature) : std::string()) + "," +
        fmt_short(info.lr) + "," + std::to_string(info.seed) + "," + info.split +
        ",";
    for (std::size_t cls = 0; cls < report.per_class.size(); ++cls) {
      const auto& m = report.per_class[cls];
      os << prefix << graph::kClassNames[cls] << ",";
      if (m.present)
        os << fmt(m.precision) << "," << fmt(m.recall) << "," << fmt(m.f1);
      else
        os << ",,";
      os << "," << fmt(report.macro_f1) << "\n";
    }
    os << prefix << "ALL," << fmt(report.macro_precision) << ","
       << fmt(report.macro_recall) << "," << fmt(report.macro_f1) << ","
       << fmt(report.macro_f1) << "\n";
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

void write_grid_csv(const std::string& path, const GridResult& grid) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  os << "curvature,lr,val_macro_f1,test_macro_f1,epochs,status\n";
  for (const auto& cell : grid.cells) {
    os << (cell.curvature > 0.0 ? fmt_short(cell.curvature) : std::string())
       << "," << fmt_short(cell.lr) << "," << fmt(cell.val_macro_f1) << ","
       << fmt(cell.test_macro_f1) << "," << cell.epochs << "," << cell.status
       << "\n";
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

void write_grid_svg(const std::string& path, const GridResult& grid) {
  // Fixed palette; cycled when more curvatures than colors are swept.
  static const char* kColors[] = {"#d62728", "#ff7f0e", "#bcbd22", "#2ca02c",
                                  "#17becf", "#1f77b4", "#9467bd", "#8c564b"};
  std::map<double, std::vector<std::pair<double, double>>> series;  // c -> (lr,f1)
  double lr_min = std::numeric_limits<double>::max(), lr_max = 0.0;
  for (const auto& cell : grid.cells) {
    series[cell.curvature].emplace_back(cell.lr, cell.val_macro_f1);
    lr_min = std::min(lr_min, cell.lr);
    lr_max = std::max(lr_max, cell.lr);
  }
  for (auto& [c, pts] : series) std::sort(pts.begin(), pts.end());
  if (series.empty() || lr_min <= 0.0)
    throw InvalidInput("write_grid_svg: no plottable cells");

  const double W = 640, H = 440, L = 70, R = 150, T = 30, B = 60;
  const double plot_w = W - L - R, plot_h = H - T - B;
  const double lx0 = std::log10(lr_min), lx1 = std::log10(lr_max);
  auto X = [&](double lr) {
    const double f = lx1 > lx0 ? (std::log10(lr) - lx0) / (lx1 - lx0) : 0.5;
    return L + f * plot_w;
  };
  auto Y = [&](double f1) { return T + (1.0 - std::clamp(f1, 0.0, 1.0)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T + plot_h << "\" x2=\"" << L + plot_w
      << "\" y2=\"" << T + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
      << T + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f1 = i * 0.25;
    svg << "<line x1=\"" << L - 4 << "\" y1=\"" << Y(f1) << "\" x2=\"" << L
        << "\" y2=\"" << Y(f1) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << L - 8 << "\" y=\"" << Y(f1) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_short(f1)
        << "</text>\n";
  }
  std::vector<double> lr_ticks;
  for (const auto& cell : grid.cells) lr_ticks.push_back(cell.lr);
  std::sort(lr_ticks.begin(), lr_ticks.end());
  lr_ticks.erase(std::unique(lr_ticks.begin(), lr_ticks.end()), lr_ticks.end());
  for (double lr : lr_ticks) {
    svg << "<line x1=\"" << X(lr) << "\" y1=\"" << T + plot_h << "\" x2=\""
        << X(lr) << "\" y2=\"" << T + plot_h + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << X(lr) << "\" y=\"" << T + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_short(lr)
        << "</text>\n";
  }
  svg << "<text x=\"" << L + plot_w / 2 << "\" y=\"" << H - 18
      << "\" text-anchor=\"middle\" font-size=\"13\">learning rate</text>\n";
  svg << "<text x=\"18\" y=\"" << T + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << T + plot_h / 2 << ")\">macro-F1</text>\n";

  int idx = 0;
  for (const auto& [c, pts] : series) {
    const char* color = kColors[idx % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& [lr, f1] : pts) svg << X(lr) << "," << Y(f1) << " ";
    svg << "\"/>\n";
    for (const auto& [lr, f1] : pts)
      svg << "<circle cx=\"" << X(lr) << "\" cy=\"" << Y(f1)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = T + 14 + idx * 16;
    svg << "<line x1=\"" << L + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
        << L + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << L + plot_w + 40 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\">"
        << (c > 0.0 ? "c=" + fmt_short(c) : std::string("euclidean"))
        << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  os << svg.str();
  if (!os) throw InvalidInput("write failed: " + path);
}

}  // namespace hgnn::train
