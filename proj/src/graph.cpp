#include "hgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hgnn/rng.hpp"

namespace hgnn::graph {

namespace {

constexpr std::uint32_t kCacheMagic = 0x47534748u;  // "HGSG"
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidInput("subgraph cache: truncated file");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_u32(const std::string& s, std::uint32_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return false;
  if (v > std::numeric_limits<std::uint32_t>::max()) return false;
  out = static_cast<std::uint32_t>(v);
  return true;
}

}  // namespace

int class_index(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == name) return i;
  return -1;
}

std::vector<std::uint32_t> TransactionGraph::labeled_nodes() const {
  std::vector<std::uint32_t> out;
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v] >= 0) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

void TransactionGraph::build_indexes() {
  out_offset.assign(num_nodes + 1, 0);
  in_offset.assign(num_nodes + 1, 0);
  for (const auto& [s, d] : edges) {
    ++out_offset[s + 1];
    ++in_offset[d + 1];
  }
  for (std::size_t v = 0; v < num_nodes; ++v) {
    out_offset[v + 1] += out_offset[v];
    in_offset[v + 1] += in_offset[v];
  }
  out_targets.assign(edges.size(), 0);
  in_sources.assign(edges.size(), 0);
  std::vector<std::size_t> ocur(out_offset.begin(), out_offset.end() - 1);
  std::vector<std::size_t> icur(in_offset.begin(), in_offset.end() - 1);
  for (const auto& [s, d] : edges) {
    out_targets[ocur[s]++] = d;
    in_sources[icur[d]++] = s;
  }
  // Sorted deduplicated neighbor union.
  nbr_offset.assign(num_nodes + 1, 0);
  nbr.clear();
  std::vector<std::uint32_t> scratch;
  for (std::size_t v = 0; v < num_nodes; ++v) {
    scratch.clear();
    for (std::size_t e = out_offset[v]; e < out_offset[v + 1]; ++e)
      scratch.push_back(out_targets[e]);
    for (std::size_t e = in_offset[v]; e < in_offset[v + 1]; ++e)
      scratch.push_back(in_sources[e]);
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    nbr.insert(nbr.end(), scratch.begin(), scratch.end());
    nbr_offset[v + 1] = nbr.size();
  }
}

TransactionGraph load_graph(const std::string& edge_path,
                            const std::string& feature_path,
                            const std::string& label_path) {
  TransactionGraph g;
  std::vector<std::string> offenders;
  auto offend = [&](std::size_t line_no, const std::string& file,
                    const std::string& why) {
    offenders.push_back(file + ":" + std::to_string(line_no) + ": " + why);
  };

  std::ifstream ef(edge_path);
  if (!ef) throw IngestError("cannot open edge file: " + edge_path, {});
  std::string line;
  std::size_t line_no = 0;
  std::uint32_t max_id = 0;
  bool any_node = false;
  while (std::getline(ef, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::uint32_t s = 0, d = 0;
    if (tab == std::string::npos || !parse_u32(line.substr(0, tab), s) ||
        !parse_u32(line.substr(tab + 1), d)) {
      offend(line_no, edge_path, "expected 'src<TAB>dst' with decimal ids");
      continue;
    }
    g.edges.emplace_back(s, d);
    max_id = std::max({max_id, s, d});
    any_node = true;
  }

  std::size_t feature_rows = 0;
  std::vector<std::pair<std::uint32_t, std::vector<double>>> feat_rows;
  if (!feature_path.empty()) {
    std::ifstream ff(feature_path);
    if (!ff) throw IngestError("cannot open feature file: " + feature_path, {});
    line_no = 0;
    std::unordered_set<std::uint32_t> seen;
    while (std::getline(ff, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (line_no == 1) {
        if (fields.empty() || fields[0] != "node_id") {
          offend(line_no, feature_path, "header must start with node_id");
          continue;
        }
        g.feature_names.assign(fields.begin() + 1, fields.end());
        continue;
      }
      std::uint32_t id = 0;
      if (!parse_u32(fields[0], id)) {
        offend(line_no, feature_path, "bad node id '" + fields[0] + "'");
        continue;
      }
      if (!seen.insert(id).second) {
        offend(line_no, feature_path,
               "duplicate feature row for node " + std::to_string(id));
        continue;
      }
      if (fields.size() != g.feature_names.size() + 1) {
        offend(line_no, feature_path, "wrong field count");
        continue;
      }
      std::vector<double> row(g.feature_names.size());
      for (std::size_t j = 0; j < row.size(); ++j) {
        const std::string& f = fields[j + 1];
        if (f.empty()) {
          row[j] = std::numeric_limits<double>::quiet_NaN();
        } else {
          char* end = nullptr;
          row[j] = std::strtod(f.c_str(), &end);
          if (end != f.c_str() + f.size()) {
            offend(line_no, feature_path, "bad numeric value '" + f + "'");
            row[j] = std::numeric_limits<double>::quiet_NaN();
          }
        }
      }
      max_id = std::max(max_id, id);
      any_node = true;
      feat_rows.emplace_back(id, std::move(row));
    }
    feature_rows = feat_rows.size();
  }

  g.num_nodes = any_node ? static_cast<std::size_t>(max_id) + 1 : 0;
  if (!feature_path.empty()) {
    // With a feature file, feature rows define the node universe.
    if (feature_rows < g.num_nodes) {
      // Some edge endpoint has no feature row: report every such id.
      std::vector<std::uint8_t> has_row(g.num_nodes, 0);
      for (const auto& [id, row] : feat_rows) has_row[id] = 1;
      for (const auto& [s, d] : g.edges) {
        if (!has_row[s])
          offenders.push_back(edge_path + ": edge references node " +
                              std::to_string(s) + " with no feature row");
        if (!has_row[d])
          offenders.push_back(edge_path + ": edge references node " +
                              std::to_string(d) + " with no feature row");
        if (offenders.size() > 50) break;
      }
    }
    g.features = diff::Tensor(std::max<std::size_t>(1, g.num_nodes),
                              std::max<std::size_t>(1, g.feature_names.size()),
                              std::numeric_limits<double>::quiet_NaN());
    for (const auto& [id, row] : feat_rows)
      for (std::size_t j = 0; j < row.size(); ++j) g.features.at(id, j) = row[j];
  }

  g.labels.assign(g.num_nodes, -1);
  if (!label_path.empty()) {
    std::ifstream lf(label_path);
    if (!lf) throw IngestError("cannot open label file: " + label_path, {});
    line_no = 0;
    while (std::getline(lf, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (line_no == 1 && fields.size() >= 2 && fields[0] == "node_id") continue;
      if (fields.size() != 2) {
        offend(line_no, label_path, "expected 'node_id,class'");
        continue;
      }
      std::uint32_t id = 0;
      if (!parse_u32(fields[0], id) || id >= g.num_nodes) {
        offend(line_no, label_path, "label for unknown node '" + fields[0] + "'");
        continue;
      }
      const int cls = class_index(fields[1]);
      if (cls < 0) {
        offend(line_no, label_path, "unknown class name '" + fields[1] + "'");
        continue;
      }
      g.labels[id] = cls;
    }
  }

  if (!offenders.empty())
    throw IngestError("graph ingestion failed with " +
                          std::to_string(offenders.size()) + " error(s)",
                      std::move(offenders));
  g.build_indexes();
  return g;
}

std::size_t FanoutSpec::node_bound() const {
  std::size_t bound = 1, layer = 1;
  for (int f : fanouts) {
    layer *= static_cast<std::size_t>(f);
    bound += layer;
  }
  return bound;
}

EgoSubgraph sample_ego(const TransactionGraph& g, std::uint32_t seed,
                       const FanoutSpec& spec, std::uint64_t master_seed) {
  if (seed >= g.num_nodes) throw InvalidInput("sample_ego: seed id out of range");
  Rng rng(Rng::derive(master_seed, /*stream=*/0x5a3u, seed));

  EgoSubgraph sg;
  sg.seed = seed;
  sg.nodes.push_back(seed);
  sg.hop.push_back(0);
  std::unordered_set<std::uint32_t> visited{seed};
  std::vector<std::uint32_t> frontier{seed};
  std::vector<std::uint32_t> candidates;

  for (int hop = 1; hop <= spec.depth() && !frontier.empty(); ++hop) {
    const std::size_t cap = static_cast<std::size_t>(spec.fanouts[hop - 1]);
    std::vector<std::uint32_t> next;
    for (std::uint32_t u : frontier) {
      candidates.clear();
      for (std::size_t e = g.nbr_offset[u]; e < g.nbr_offset[u + 1]; ++e)
        if (!visited.count(g.nbr[e])) candidates.push_back(g.nbr[e]);
      const std::size_t take = std::min(cap, candidates.size());
      // Partial Fisher-Yates: the first `take` entries are a uniform sample
      // without replacement.
      for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.uniform_int(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
        const std::uint32_t v = candidates[i];
        visited.insert(v);
        sg.nodes.push_back(v);
        sg.hop.push_back(hop);
        next.push_back(v);
      }
    }
    frontier = std::move(next);
  }

  // Induce all original directed edges among the sampled set (edge
  // multiplicity preserved; grouped by source, each original edge once).
  std::unordered_map<std::uint32_t, int> local;
  local.reserve(sg.nodes.size() * 2);
  for (std::size_t i = 0; i < sg.nodes.size(); ++i)
    local.emplace(sg.nodes[i], static_cast<int>(i));
  for (std::size_t i = 0; i < sg.nodes.size(); ++i) {
    const std::uint32_t u = sg.nodes[i];
    for (std::size_t e = g.out_offset[u]; e < g.out_offset[u + 1]; ++e) {
      auto it = local.find(g.out_targets[e]);
      if (it != local.end()) sg.edges.emplace_back(static_cast<int>(i), it->second);
    }
  }

  sg.seed_mask.assign(sg.nodes.size(), 0);
  sg.seed_mask[0] = 1;
  if (!g.features.empty()) {
    sg.features = diff::Tensor(sg.nodes.size(), g.features.cols(), 0.0);
    for (std::size_t i = 0; i < sg.nodes.size(); ++i)
      for (std::size_t j = 0; j < g.features.cols(); ++j)
        sg.features.at(i, j) = g.features.at(sg.nodes[i], j);
  }
  if (seed < g.labels.size()) sg.label = g.labels[seed];
  return sg;
}

std::vector<EgoSubgraph> sample_all_seeds(const TransactionGraph& g,
                                          const std::vector<std::uint32_t>& seeds,
                                          const FanoutSpec& spec,
                                          std::uint64_t master_seed, int workers) {
  std::vector<EgoSubgraph> out(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    out[i] = sample_ego(g, seeds[i], spec, master_seed);
  });
  return out;
}

void save_subgraphs(const std::string& path,
                    const std::vector<EgoSubgraph>& subgraphs,
                    const std::vector<std::string>& feature_names) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidInput("cannot open for writing: " + path);
  write_pod(os, kCacheMagic);
  write_pod(os, kCacheVersion);
  write_pod(os, static_cast<std::uint32_t>(feature_names.size()));
  for (const auto& name : feature_names) {
    write_pod(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  write_pod(os, static_cast<std::uint64_t>(subgraphs.size()));
  for (const auto& sg : subgraphs) {
    write_pod(os, sg.seed);
    write_pod(os, static_cast<std::uint32_t>(sg.nodes.size()));
    write_pod(os, static_cast<std::uint32_t>(sg.features.empty() ? 0 : sg.features.cols()));
    write_pod(os, static_cast<std::int32_t>(sg.label));
    write_pod(os, static_cast<std::uint64_t>(sg.edges.size()));
    os.write(reinterpret_cast<const char*>(sg.nodes.data()),
             static_cast<std::streamsize>(sg.nodes.size() * sizeof(std::uint32_t)));
    for (int h : sg.hop) write_pod(os, static_cast<std::int32_t>(h));
    for (const auto& [s, d] : sg.edges) {
      write_pod(os, static_cast<std::int32_t>(s));
      write_pod(os, static_cast<std::int32_t>(d));
    }
    if (!sg.features.empty())
      os.write(reinterpret_cast<const char*>(sg.features.data().data()),
               static_cast<std::streamsize>(sg.features.size() * sizeof(double)));
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

std::vector<EgoSubgraph> load_subgraphs(const std::string& path,
                                        std::vector<std::string>* feature_names) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open subgraph cache: " + path);
  if (read_pod<std::uint32_t>(is) != kCacheMagic)
    throw InvalidInput("subgraph cache: bad magic in " + path);
  if (read_pod<std::uint32_t>(is) != kCacheVersion)
    throw InvalidInput("subgraph cache: unsupported version in " + path);
  const auto name_count = read_pod<std::uint32_t>(is);
  std::vector<std::string> names(name_count);
  for (auto& name : names) {
    const auto len = read_pod<std::uint32_t>(is);
    name.assign(len, '\0');
    is.read(name.data(), len);
    if (!is) throw InvalidInput("subgraph cache: truncated file " + path);
  }
  if (feature_names) *feature_names = std::move(names);
  const auto count = read_pod<std::uint64_t>(is);
  std::vector<EgoSubgraph> out(count);
  for (auto& sg : out) {
    sg.seed = read_pod<std::uint32_t>(is);
    const auto n = read_pod<std::uint32_t>(is);
    const auto fdim = read_pod<std::uint32_t>(is);
    sg.label = read_pod<std::int32_t>(is);
    const auto ne = read_pod<std::uint64_t>(is);
    sg.nodes.resize(n);
    is.read(reinterpret_cast<char*>(sg.nodes.data()),
            static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
    sg.hop.resize(n);
    for (auto& h : sg.hop) h = read_pod<std::int32_t>(is);
    sg.edges.resize(ne);
    for (auto& [s, d] : sg.edges) {
      s = read_pod<std::int32_t>(is);
      d = read_pod<std::int32_t>(is);
    }
    sg.seed_mask.assign(n, 0);
    if (n > 0) sg.seed_mask[0] = 1;
    if (fdim > 0) {
      sg.features = diff::Tensor(n, fdim, 0.0);
      is.read(reinterpret_cast<char*>(sg.features.data().data()),
              static_cast<std::streamsize>(sg.features.size() * sizeof(double)));
    }
    if (!is) throw InvalidInput("subgraph cache: truncated file " + path);
  }
  return out;
}

}  // namespace hgnn::graph
