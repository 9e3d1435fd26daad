#include "hgnn/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace hgnn::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string hash_file(const std::string& path) {
  const std::string bytes = read_file(path);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv64:%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Partial outputs land under a temp name and are promoted atomically.
void write_text_atomic(const std::string& path, const std::string& content) {
  ensure_parent_dir(path);
  const std::string tmp = path + ".partial";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InvalidInput("cannot open for writing: " + tmp);
    os << content;
    if (!os) throw InvalidInput("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

template <typename WriteFn>
void write_atomic_via(const std::string& path, WriteFn&& fn) {
  ensure_parent_dir(path);
  const std::string tmp = path + ".partial";
  fn(tmp);
  fs::rename(tmp, path);
}

std::string iso_now() {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_echo(const RunConfig& cfg) {
  json j;
  j["out"] = cfg.out_dir;
  j["master_seed"] = cfg.master_seed;
  j["split_seed"] = cfg.split_seed;
  j["workers"] = cfg.workers;
  j["fanout"] = cfg.fanout;
  j["oversample_target"] = cfg.oversample_target;
  j["model"] = {{"arch", models::arch_name(cfg.model.arch)},
                {"geometry", models::geometry_name(cfg.model.geometry)},
                {"layers", cfg.model.layers},
                {"hidden_dim", cfg.model.hidden_dim},
                {"heads", cfg.model.heads},
                {"head_dim", cfg.model.head_dim},
                {"dropout", cfg.model.dropout},
                {"curvature", cfg.model.curvature},
                {"classes", cfg.model.classes}};
  j["train"] = {{"lr", cfg.train.lr},
                {"lr_grid", cfg.train.lr_grid},
                {"curvature_grid", cfg.train.curvature_grid},
                {"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience},
                {"batch_size", cfg.train.batch_size}};
  return j;
}

void write_manifest(const RunConfig& cfg, const std::string& stage,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    json extra = json::object()) {
  json j;
  j["stage"] = stage;
  j["created_at"] = iso_now();
  j["config"] = config_echo(cfg);
  json in = json::object();
  for (const auto& p : inputs) in[p] = hash_file(p);
  j["inputs"] = in;
  j["outputs"] = outputs;
  if (!extra.empty()) j["run"] = extra;
  const OutPaths paths{cfg.out_dir};
  write_text_atomic(paths.manifest(stage), j.dump(2) + "\n");
}

// Default per-column value-type policy when the config does not name one:
// totals, their derived averages, and the val* signal columns.
std::vector<std::string> default_value_flags(
    const std::vector<std::string>& names) {
  std::vector<std::string> out = {"total_sent", "total_received",
                                  "derived_avg_sent", "derived_avg_received"};
  for (const auto& n : names)
    if (n.rfind("val", 0) == 0) out.push_back(n);
  return out;
}

feat::Split parse_split(const std::string& s) {
  if (s == "train") return feat::Split::kTrain;
  if (s == "val" || s == "validation") return feat::Split::kVal;
  if (s == "test") return feat::Split::kTest;
  throw InvalidInput("unknown split: " + s);
}

const char* split_name(feat::Split s) {
  switch (s) {
    case feat::Split::kTrain: return "train";
    case feat::Split::kVal: return "val";
    case feat::Split::kTest: return "test";
  }
  return "?";
}

}  // namespace

std::string RunConfig::resolved_edges() const {
  return edges_path.empty() ? out_dir + "/edges.tsv" : edges_path;
}
std::string RunConfig::resolved_features() const {
  return features_path.empty() ? out_dir + "/features.csv" : features_path;
}
std::string RunConfig::resolved_labels() const {
  return labels_path.empty() ? out_dir + "/labels.csv" : labels_path;
}

std::string OutPaths::checkpoint(const models::ModelConfig& cfg) const {
  return dir + "/checkpoints/" + models::arch_name(cfg.arch) + "_" +
         models::geometry_name(cfg.geometry) + "_" +
         std::to_string(cfg.layers) + "L.ckpt";
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.split_seed = j.value("split_seed", cfg.split_seed);
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("data")) {
    const auto& d = j["data"];
    cfg.edges_path = d.value("edges", "");
    cfg.features_path = d.value("features", "");
    cfg.labels_path = d.value("labels", "");
    cfg.rates_path = d.value("rates", "");
  }
  if (j.contains("fanout")) cfg.fanout = j["fanout"].get<std::vector<int>>();
  if (j.contains("normalize"))
    cfg.value_type_features = j["normalize"].value(
        "value_type_features", std::vector<std::string>{});
  cfg.oversample_target = j.value("oversample_target", cfg.oversample_target);

  if (j.contains("model")) {
    const auto& m = j["model"];
    cfg.model.arch = models::parse_arch(m.value("arch", "gcn"));
    cfg.model.geometry = models::parse_geometry(m.value("geometry", "euclidean"));
    cfg.model.layers = m.value("layers", cfg.model.layers);
    cfg.model.hidden_dim = m.value("hidden_dim", cfg.model.hidden_dim);
    cfg.model.heads = m.value("heads", cfg.model.heads);
    cfg.model.head_dim = m.value("head_dim", cfg.model.head_dim);
    cfg.model.dropout = m.value("dropout", cfg.model.dropout);
    cfg.model.curvature = m.value("curvature", cfg.model.curvature);
    cfg.model.classes = m.value("classes", cfg.model.classes);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train.lr = t.value("lr", cfg.train.lr);
    if (t.contains("lr_grid"))
      cfg.train.lr_grid = t["lr_grid"].get<std::vector<double>>();
    if (t.contains("curvature_grid"))
      cfg.train.curvature_grid = t["curvature_grid"].get<std::vector<double>>();
    cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
    cfg.train.patience = t.value("patience", cfg.train.patience);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
  }

  cfg.synth = synth::default_spec(cfg.master_seed);
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    cfg.synth.seeds_per_class = s.value("seeds_per_class", cfg.synth.seeds_per_class);
    cfg.synth.depth = s.value("depth", cfg.synth.depth);
    cfg.synth.inter_tree_edge_rate =
        s.value("inter_tree_edge_rate", cfg.synth.inter_tree_edge_rate);
    cfg.synth.noise = s.value("noise", cfg.synth.noise);
    if (s.contains("classes")) {
      cfg.synth.classes.clear();
      for (const auto& c : s["classes"]) {
        synth::ClassProfile cp;
        cp.name = c.at("name").get<std::string>();
        if (c.contains("branching")) {
          cp.branching.clear();
          for (const auto& b : c["branching"])
            cp.branching.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
        }
        if (c.contains("value_log_mean"))
          cp.value_log_mean = c["value_log_mean"].get<std::vector<double>>();
        cp.value_log_sigma = c.value("value_log_sigma", cp.value_log_sigma);
        cp.amount_log_mean = c.value("amount_log_mean", cp.amount_log_mean);
        cp.cross_link_prob = c.value("cross_link_prob", cp.cross_link_prob);
        cfg.synth.classes.push_back(std::move(cp));
      }
      cfg.synth_from_config = true;
    }
  }
  cfg.synth.master_seed = cfg.master_seed;

  if (j.contains("eval")) {
    cfg.eval_checkpoint = j["eval"].value("checkpoint", "");
    cfg.eval_split = j["eval"].value("split", cfg.eval_split);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config(read_file(path));
}

void run_synth(const RunConfig& cfg) {
  synth::SynthSpec spec = cfg.synth;
  spec.master_seed = cfg.master_seed;
  const synth::SynthOutput out = synth::generate(spec);
  const std::string edges = cfg.resolved_edges();
  const std::string features = cfg.resolved_features();
  const std::string labels = cfg.resolved_labels();
  for (const auto& p : {edges, features, labels}) ensure_parent_dir(p);
  synth::write_graph_files(out.graph, edges + ".partial", features + ".partial",
                           labels + ".partial");
  for (const auto& p : {edges, features, labels}) fs::rename(p + ".partial", p);
  write_manifest(cfg, "synth", {}, {edges, features, labels},
                 {{"nodes", out.graph.num_nodes},
                  {"edges", out.graph.edges.size()},
                  {"seeds", out.seeds.size()}});
}

void run_sample(const RunConfig& cfg) {
  const std::string edges = cfg.resolved_edges();
  const std::string features = cfg.resolved_features();
  const std::string labels = cfg.resolved_labels();
  graph::TransactionGraph g = graph::load_graph(edges, features, labels);

  std::vector<std::pair<std::uint32_t, int>> labeled;
  for (std::uint32_t v : g.labeled_nodes()) labeled.emplace_back(v, g.labels[v]);
  if (labeled.empty()) throw InvalidInput("sample: no labeled seeds in graph");
  const feat::SplitAssignment assignment =
      feat::stratified_split(labeled, cfg.split_seed);
  for (const auto& w : assignment.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());

  // Attach assembled (rate-converted raw + derived) features before sampling
  // so caches are self-contained.
  feat::RateTable rates;
  if (!cfg.rates_path.empty()) rates = feat::RateTable::load(cfg.rates_path);
  const std::vector<std::string> value_flags =
      cfg.value_type_features.empty() ? default_value_flags(g.feature_names)
                                      : cfg.value_type_features;
  feat::AssembledFeatures assembled = feat::assemble_features(
      g, value_flags, cfg.rates_path.empty() ? nullptr : &rates);
  g.feature_names = assembled.names;
  g.features = std::move(assembled.matrix);

  const graph::FanoutSpec spec(cfg.fanout);
  const OutPaths paths{cfg.out_dir};
  std::vector<std::string> outputs;
  for (const feat::Split s :
       {feat::Split::kTrain, feat::Split::kVal, feat::Split::kTest}) {
    const auto seeds = assignment.seeds_in(s);
    const auto subgraphs =
        graph::sample_all_seeds(g, seeds, spec, cfg.master_seed, cfg.workers);
    const std::string path = paths.raw_cache(split_name(s));
    write_atomic_via(path, [&](const std::string& tmp) {
      graph::save_subgraphs(tmp, subgraphs, g.feature_names);
    });
    outputs.push_back(path);
  }

  std::ostringstream split_csv;
  split_csv << "node_id,class,split\n";
  for (std::size_t i = 0; i < assignment.seeds.size(); ++i)
    split_csv << assignment.seeds[i] << ','
              << graph::kClassNames[assignment.label[i]] << ','
              << split_name(assignment.split[i]) << '\n';
  write_text_atomic(paths.split_csv(), split_csv.str());
  outputs.push_back(paths.split_csv());

  write_manifest(cfg, "sample", {edges, features, labels}, outputs);
}

void run_normalize(const RunConfig& cfg) {
  const OutPaths paths{cfg.out_dir};
  std::vector<std::string> names;
  auto train_sgs = graph::load_subgraphs(paths.raw_cache("train"), &names);
  if (train_sgs.empty())
    throw InvalidInput("normalize: train cache is empty; stats must be fit on "
                       "the training split only");

  // Fit matrix: unique node rows across the training subgraphs.
  std::unordered_map<std::uint32_t, std::size_t> seen;
  std::vector<const graph::EgoSubgraph*> row_src;
  std::vector<std::size_t> row_idx;
  for (const auto& sg : train_sgs)
    for (std::size_t i = 0; i < sg.num_nodes(); ++i)
      if (seen.emplace(sg.nodes[i], row_src.size()).second) {
        row_src.push_back(&sg);
        row_idx.push_back(i);
      }
  diff::Tensor train_matrix(row_src.size(), names.size(), 0.0);
  for (std::size_t r = 0; r < row_src.size(); ++r)
    for (std::size_t j = 0; j < names.size(); ++j)
      train_matrix.at(r, j) = row_src[r]->features.at(row_idx[r], j);

  const std::vector<std::string> value_flag_names =
      cfg.value_type_features.empty() ? default_value_flags(names)
                                      : cfg.value_type_features;
  std::vector<bool> value_type(names.size(), false);
  for (std::size_t j = 0; j < names.size(); ++j)
    for (const auto& want : value_flag_names)
      if (names[j] == want) value_type[j] = true;

  const feat::NormalizationStats stats =
      feat::normalize_fit(train_matrix, names, value_type);
  write_atomic_via(paths.stats_file(), [&](const std::string& tmp) {
    feat::save_stats(tmp, stats);
  });

  std::vector<std::string> outputs{paths.stats_file()};
  std::size_t negatives = 0;
  for (const char* split : {"train", "val", "test"}) {
    std::vector<std::string> cache_names;
    auto sgs = graph::load_subgraphs(paths.raw_cache(split), &cache_names);
    for (auto& sg : sgs)
      sg.features = feat::normalize_apply(sg.features, stats, &negatives);
    const std::string path = paths.norm_cache(split);
    write_atomic_via(path, [&](const std::string& tmp) {
      graph::save_subgraphs(tmp, sgs, cache_names);
    });
    outputs.push_back(path);
  }
  if (negatives > 0)
    std::fprintf(stderr,
                 "warning: %zu negative raw values routed to the missing path\n",
                 negatives);

  write_manifest(cfg, "normalize",
                 {paths.raw_cache("train"), paths.raw_cache("val"),
                  paths.raw_cache("test")},
                 outputs);
}

namespace {

struct LoadedData {
  std::vector<graph::EgoSubgraph> train, val, test;
  std::vector<const graph::EgoSubgraph*> oversampled_train;
  int input_dim = 0;
};

LoadedData load_training_data(const RunConfig& cfg) {
  const OutPaths paths{cfg.out_dir};
  LoadedData data;
  std::vector<std::string> names;
  data.train = graph::load_subgraphs(paths.norm_cache("train"), &names);
  data.val = graph::load_subgraphs(paths.norm_cache("val"));
  data.test = graph::load_subgraphs(paths.norm_cache("test"));
  if (data.train.empty() || data.val.empty())
    throw InvalidInput("train: empty train or val cache");
  data.input_dim = static_cast<int>(data.train.front().features.cols());

  // Oversampling applies to the training split only.
  feat::SplitAssignment assignment;
  for (const auto& sg : data.train) {
    assignment.seeds.push_back(sg.seed);
    assignment.label.push_back(sg.label);
    assignment.split.push_back(feat::Split::kTrain);
  }
  for (const auto& sg : data.val) {
    assignment.seeds.push_back(sg.seed);
    assignment.label.push_back(sg.label);
    assignment.split.push_back(feat::Split::kVal);
  }
  Rng rng(Rng::derive(cfg.master_seed, /*stream=*/0x05a17u));
  const auto multiset =
      feat::oversample_train(assignment, cfg.oversample_target, rng);
  std::unordered_map<std::uint32_t, const graph::EgoSubgraph*> by_seed;
  for (const auto& sg : data.train) by_seed[sg.seed] = &sg;
  for (std::uint32_t seed : multiset)
    data.oversampled_train.push_back(by_seed.at(seed));
  return data;
}

train::RunInfo make_run_info(const RunConfig& cfg, const std::string& split,
                             double lr, double curvature) {
  train::RunInfo info;
  info.arch = models::arch_name(cfg.model.arch);
  info.geometry = models::geometry_name(cfg.model.geometry);
  info.layers = cfg.model.layers;
  info.subgraph_depth = static_cast<int>(cfg.fanout.size());
  info.hyperbolic = cfg.model.geometry == models::Geometry::kHyperbolic;
  info.curvature = curvature;
  info.lr = lr;
  info.seed = cfg.master_seed;
  info.split = split;
  return info;
}

}  // namespace

void run_train(const RunConfig& cfg) {
  const OutPaths paths{cfg.out_dir};
  LoadedData data = load_training_data(cfg);

  models::ModelConfig mcfg = cfg.model;
  mcfg.input_dim = data.input_dim;
  mcfg.validate();
  train::TrainConfig tcfg = cfg.train;
  tcfg.master_seed = Rng::derive(cfg.master_seed, /*stream=*/0x741aull);

  models::GnnModel model(mcfg, Rng::derive(cfg.master_seed, 0x1417ull));
  const train::TrainResult result =
      train::train_model(model, tcfg, data.oversampled_train, data.val);

  const std::string ckpt = paths.checkpoint(mcfg);
  write_atomic_via(ckpt, [&](const std::string& tmp) { model.save(tmp); });

  std::vector<std::pair<train::RunInfo, train::MetricsReport>> rows;
  rows.emplace_back(make_run_info(cfg, "val", tcfg.lr, mcfg.curvature),
                    train::evaluate(model, data.val, tcfg.batch_size));
  if (!data.test.empty())
    rows.emplace_back(make_run_info(cfg, "test", tcfg.lr, mcfg.curvature),
                      train::evaluate(model, data.test, tcfg.batch_size));
  const std::string metrics = paths.metrics_csv(
      "train_" + models::arch_name(mcfg.arch) + "_" +
      models::geometry_name(mcfg.geometry) + "_" + std::to_string(mcfg.layers) +
      "L");
  write_atomic_via(metrics, [&](const std::string& tmp) {
    train::write_metrics_csv(tmp, rows);
  });

  write_manifest(cfg, "train",
                 {paths.norm_cache("train"), paths.norm_cache("val")},
                 {ckpt, metrics},
                 {{"status", result.status},
                  {"epochs_run", result.epochs_run},
                  {"best_epoch", result.best_epoch},
                  {"best_val_macro_f1", result.best_val_f1}});
}

void run_eval(const RunConfig& cfg) {
  const OutPaths paths{cfg.out_dir};
  const std::string ckpt = cfg.eval_checkpoint.empty()
                               ? paths.checkpoint(cfg.model)
                               : cfg.eval_checkpoint;
  models::GnnModel model = models::GnnModel::load(ckpt);
  const std::string split = cfg.eval_split;
  parse_split(split);  // validates
  const auto sgs = graph::load_subgraphs(paths.norm_cache(split));
  if (sgs.empty()) throw InvalidInput("eval: empty cache for split " + split);
  const train::MetricsReport report =
      train::evaluate(model, sgs, cfg.train.batch_size);
  for (int cls : report.absent_classes)
    std::fprintf(stderr, "note: class %s absent from %s; excluded from macro\n",
                 std::string(graph::kClassNames[cls]).c_str(), split.c_str());

  std::vector<std::pair<train::RunInfo, train::MetricsReport>> rows;
  RunConfig effective = cfg;
  effective.model = model.config();
  rows.emplace_back(
      make_run_info(effective, split, cfg.train.lr, model.config().curvature),
      report);
  const std::string metrics = paths.metrics_csv("eval_" + split);
  write_atomic_via(metrics, [&](const std::string& tmp) {
    train::write_metrics_csv(tmp, rows);
  });
  write_manifest(cfg, "eval", {ckpt, paths.norm_cache(split)}, {metrics},
                 {{"macro_f1", report.macro_f1}});
}

void run_grid(const RunConfig& cfg) {
  const OutPaths paths{cfg.out_dir};
  LoadedData data = load_training_data(cfg);

  models::ModelConfig mcfg = cfg.model;
  mcfg.input_dim = data.input_dim;
  mcfg.validate();
  train::TrainConfig tcfg = cfg.train;
  tcfg.master_seed = Rng::derive(cfg.master_seed, /*stream=*/0x9217ull);

  const train::GridResult grid =
      train::grid_search(mcfg, tcfg, data.oversampled_train, data.val,
                         data.test, cfg.workers);
  write_atomic_via(paths.grid_csv(), [&](const std::string& tmp) {
    train::write_grid_csv(tmp, grid);
  });
  write_atomic_via(paths.grid_svg(), [&](const std::string& tmp) {
    train::write_grid_svg(tmp, grid);
  });

  json spreads = json::object();
  for (const auto& [c, spread] : grid.spread_by_curvature) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", c);
    spreads[key] = spread;
  }
  write_manifest(cfg, "grid",
                 {paths.norm_cache("train"), paths.norm_cache("val"),
                  paths.norm_cache("test")},
                 {paths.grid_csv(), paths.grid_svg()},
                 {{"val_f1_spread_by_curvature", spreads}});
}

std::string render_report(const std::vector<std::string>& metrics_csvs) {
  // model key -> (class/ALL -> metrics); grouped per (depth, split).
  struct Cell {
    std::string precision, recall, f1;
  };
  std::map<std::string, std::map<std::string, std::map<std::string, Cell>>> tables;
  std::map<std::string, std::vector<std::string>> model_order;

  for (const auto& path : metrics_csvs) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot open metrics csv: " + path);
    std::string line;
    if (!std::getline(is, line))
      throw InvalidInput("empty metrics csv: " + path);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) f.push_back(field);
      while (f.size() < 13) f.push_back("");
      const std::string model =
          f[0] + "-" + f[1] + "-" + f[2] + "L" +
          (f[4].empty() ? "" : " c=" + f[4]);
      const std::string table_key = "depth-" + f[3] + " split=" + f[7];
      auto& order = model_order[table_key];
      if (std::find(order.begin(), order.end(), model) == order.end())
        order.push_back(model);
      tables[table_key][f[8]][model] = {f[9], f[10], f[11]};
    }
  }

  std::ostringstream out;
  for (const auto& [table_key, classes] : tables) {
    out << "== " << table_key << " ==\n";
    const auto& order = model_order[table_key];
    out << "class         metric     ";
    for (const auto& m : order) {
      out << m;
      for (std::size_t pad = m.size(); pad < 26; ++pad) out << ' ';
    }
    out << "\n";
    auto print_row = [&](const std::string& cls, const char* metric,
                         auto getter) {
      out << cls;
      for (std::size_t pad = cls.size(); pad < 14; ++pad) out << ' ';
      out << metric;
      for (std::size_t pad = std::strlen(metric); pad < 11; ++pad) out << ' ';
      for (const auto& m : order) {
        auto it = classes.find(cls);
        std::string v = "-";
        if (it != classes.end()) {
          auto mit = it->second.find(m);
          if (mit != it->second.end()) {
            v = getter(mit->second);
            if (v.empty()) v = "-";
          }
        }
        if (v.size() > 8) v = v.substr(0, 8);
        out << v;
        for (std::size_t pad = v.size(); pad < 26; ++pad) out << ' ';
      }
      out << "\n";
    };
    for (const auto& cls_name : graph::kClassNames) {
      const std::string cls(cls_name);
      if (!classes.count(cls)) continue;
      print_row(cls, "precision", [](const Cell& c) { return c.precision; });
      print_row(cls, "recall", [](const Cell& c) { return c.recall; });
      print_row(cls, "f1", [](const Cell& c) { return c.f1; });
    }
    if (classes.count("ALL")) {
      print_row("ALL", "precision", [](const Cell& c) { return c.precision; });
      print_row("ALL", "recall", [](const Cell& c) { return c.recall; });
      print_row("ALL", "macro_f1", [](const Cell& c) { return c.f1; });
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace hgnn::pipeline
