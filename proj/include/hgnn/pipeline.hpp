#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgnn/featpipe.hpp"
#include "hgnn/models.hpp"
#include "hgnn/synthgen.hpp"
#include "hgnn/trainer.hpp"

namespace hgnn::pipeline {

// Declarative run configuration; one file drives every stage. Flags may
// override the scalar fields after parsing.
struct RunConfig {
  std::string out_dir = "out";
  std::uint64_t master_seed = 42;
  std::uint64_t split_seed = 7;
  int workers = 1;

  std::string edges_path;     // default: <out>/edges.tsv
  std::string features_path;  // default: <out>/features.csv
  std::string labels_path;    // default: <out>/labels.csv
  std::string rates_path;     // optional conversion-rate table

  std::vector<int> fanout = {5, 10};
  std::vector<std::string> value_type_features;  // default: synth columns
  int oversample_target = 300;

  models::ModelConfig model;
  train::TrainConfig train;
  synth::SynthSpec synth;
  bool synth_from_config = false;  // true when the config carried profiles

  std::string eval_checkpoint;  // eval stage
  std::string eval_split = "test";

  std::string resolved_edges() const;
  std::string resolved_features() const;
  std::string resolved_labels() const;
};

RunConfig load_config(const std::string& path);
// Parses a config from JSON text (tests drive this directly).
RunConfig parse_config(const std::string& json_text);

// Paths of the artifacts each stage produces under out_dir.
struct OutPaths {
  std::string dir;
  std::string split_csv() const { return dir + "/split.csv"; }
  std::string raw_cache(const std::string& split) const {
    return dir + "/subgraphs/" + split + ".sgc";
  }
  std::string norm_cache(const std::string& split) const {
    return dir + "/subgraphs/" + split + "_norm.sgc";
  }
  std::string stats_file() const { return dir + "/stats"; }
  std::string checkpoint(const models::ModelConfig& cfg) const;
  std::string metrics_csv(const std::string& tag) const {
    return dir + "/metrics/" + tag + ".csv";
  }
  std::string grid_csv() const { return dir + "/metrics/grid.csv"; }
  std::string grid_svg() const { return dir + "/charts/grid.svg"; }
  std::string manifest(const std::string& stage) const {
    return dir + "/manifest_" + stage + ".json";
  }
};

// Stage entry points. Each validates inputs, writes its artifacts atomically
// (temp name + rename) and emits a manifest echoing the resolved config,
// seeds, and input-file hashes.
void run_synth(const RunConfig& cfg);
void run_sample(const RunConfig& cfg);
void run_normalize(const RunConfig& cfg);
void run_train(const RunConfig& cfg);
void run_eval(const RunConfig& cfg);
void run_grid(const RunConfig& cfg);
// Renders per-class metric tables from one or more metrics CSVs.
std::string render_report(const std::vector<std::string>& metrics_csvs);

}  // namespace hgnn::pipeline
