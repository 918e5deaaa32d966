#include "gabo/data/jsonl.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace gabo::data {

using nlohmann::json;

namespace {

MolGraph parse_graph(const json& rec, const Vocab& vocab) {
  static const std::vector<std::string> kKeys{"n", "x", "edges", "y", "scaffold"};
  for (const auto& [key, _] : rec.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) throw DataError("unknown key '" + key + "'");
  }
  for (const char* key : {"n", "x", "edges", "y"}) {
    if (!rec.contains(key)) throw DataError(std::string("missing key '") + key + "'");
  }
  MolGraph g;
  g.num_fields = vocab.num_fields();
  const auto n = rec.at("n").get<std::int64_t>();
  if (n < 0) throw DataError("negative node count");
  g.num_nodes = static_cast<std::size_t>(n);
  const auto& x = rec.at("x");
  if (!x.is_array() || x.size() != g.num_nodes) {
    throw DataError("'x' must hold one row per node (" + std::to_string(g.num_nodes) + ")");
  }
  g.node_feats.reserve(g.num_nodes * g.num_fields);
  for (const auto& row : x) {
    if (!row.is_array() || row.size() != g.num_fields) {
      throw DataError("node feature rows must have " + std::to_string(g.num_fields) + " entries");
    }
    for (const auto& code : row) g.node_feats.push_back(code.get<int>());
  }
  for (const auto& e : rec.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw DataError("edges must be [u, v] pairs");
    const auto u = e[0].get<std::int64_t>();
    const auto v = e[1].get<std::int64_t>();
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw DataError("edge [" + std::to_string(u) + ", " + std::to_string(v) + "] has an endpoint outside " +
                      std::to_string(n) + " nodes");
    }
    add_edge(g, static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }
  g.label = rec.at("y").get<int>();
  if (rec.contains("scaffold") && !rec.at("scaffold").is_null()) g.scaffold_id = rec.at("scaffold").get<std::int64_t>();
  validate(g, vocab);
  return g;
}

}  // namespace

Dataset parse_jsonl(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json rec = json::parse(line);
      if (!rec.is_object()) throw DataError("record is not a JSON object");
      if (rec.contains("header")) {
        if (!first_record) throw DataError("header must be the first record");
        const auto& h = rec.at("header");
        ds.vocab.sizes = h.at("vocab_sizes").get<std::vector<int>>();
        if (h.contains("num_node_fields") && h.at("num_node_fields").get<std::size_t>() != ds.vocab.sizes.size()) {
          throw DataError("num_node_fields disagrees with vocab_sizes");
        }
        first_record = false;
        continue;
      }
      first_record = false;
      ds.graphs.push_back(parse_graph(rec, ds.vocab));
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(line_no) + " (graph " + std::to_string(ds.graphs.size()) +
                      "): " + e.what());
    }
  }
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_jsonl(in);
}

void write_jsonl(std::ostream& out, const Dataset& dataset) {
  using ojson = nlohmann::ordered_json;
  ojson header = {{"header", {{"num_node_fields", dataset.vocab.num_fields()}, {"vocab_sizes", dataset.vocab.sizes}}}};
  out << header.dump() << '\n';
  for (const auto& g : dataset.graphs) {
    ojson rec;
    rec["n"] = g.num_nodes;
    ojson x = ojson::array();
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
      x.push_back(std::vector<int>(g.node_feats.begin() + static_cast<std::ptrdiff_t>(i * g.num_fields),
                                   g.node_feats.begin() + static_cast<std::ptrdiff_t>((i + 1) * g.num_fields)));
    }
    rec["x"] = std::move(x);
    ojson edges = ojson::array();
    for (std::size_t e = 0; e < g.edges.size(); e += 2) edges.push_back({g.edges[e].first, g.edges[e].second});
    rec["edges"] = std::move(edges);
    rec["y"] = g.label;
    if (g.scaffold_id) rec["scaffold"] = *g.scaffold_id;
    out << rec.dump() << '\n';
  }
}

void save_jsonl(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_jsonl(out, dataset);
}

}  // namespace gabo::data
