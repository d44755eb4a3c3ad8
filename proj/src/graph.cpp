#include "sbcm/graph.hpp"

#include "sbcm/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace sbcm {

namespace {

std::string edge_name(NodeId i, NodeId j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

// Connected components of the subgraph induced by nodes where keep[v] is true.
std::vector<std::vector<NodeId>> components_of(const Graph& g, const std::vector<bool>& keep) {
  std::vector<std::vector<NodeId>> out;
  std::vector<bool> seen(static_cast<std::size_t>(g.node_count()), false);
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (!keep[s] || seen[s]) continue;
    std::vector<NodeId> comp;
    std::vector<NodeId> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (NodeId w : g.neighbors(v)) {
        if (keep[w] && !seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

bool Graph::adjacent(NodeId i, NodeId j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

int Graph::zealot_degree(NodeId i) const {
  int count = 0;
  for (NodeId j : neighbors(i))
    if (is_zealot(j)) ++count;
  return count;
}

OpinionState Graph::pinned(OpinionState x) const {
  if (x.size() != node_count_)
    throw ValidationError("state has " + std::to_string(x.size()) + " entries, graph has " +
                          std::to_string(node_count_) + " nodes");
  for (const auto& [id, op] : zealots_) x[id] = op;
  return x;
}

OpinionState Graph::uniform_state(double fill) const {
  return pinned(OpinionState::Constant(node_count_, fill));
}

std::optional<std::pair<double, double>> Graph::zealot_range() const {
  if (zealots_.empty()) return std::nullopt;
  double lo = zealots_.begin()->second, hi = lo;
  for (const auto& [id, op] : zealots_) {
    lo = std::min(lo, op);
    hi = std::max(hi, op);
  }
  return std::make_pair(lo, hi);
}

Graph build_graph(int node_count, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                  const std::vector<std::pair<NodeId, double>>& zealot_assignments) {
  if (node_count < 0) throw ValidationError("negative node count");
  Graph g;
  g.node_count_ = node_count;
  std::set<Edge> edges;
  for (auto [a, b] : edge_list) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count)
      throw ValidationError("out-of-range endpoint in edge " + edge_name(a, b) + " for " +
                            std::to_string(node_count) + " nodes");
    if (a == b) throw ValidationError("self-edge " + edge_name(a, b));
    edges.insert(Edge{std::min(a, b), std::max(a, b)});
  }
  g.edges_.assign(edges.begin(), edges.end());
  g.adjacency_.assign(static_cast<std::size_t>(node_count), {});
  for (const Edge& e : g.edges_) {
    g.adjacency_[e.first].push_back(e.second);
    g.adjacency_[e.second].push_back(e.first);
  }
  for (auto& nb : g.adjacency_) std::sort(nb.begin(), nb.end());

  g.zealot_flag_.assign(static_cast<std::size_t>(node_count), false);
  for (auto [id, op] : zealot_assignments) {
    if (id < 0 || id >= node_count)
      throw ValidationError("zealot id " + std::to_string(id) + " out of range");
    if (!std::isfinite(op))
      throw ValidationError("zealot " + std::to_string(id) + " has non-finite opinion");
    if (!g.zealots_.emplace(id, op).second)
      throw ValidationError("duplicate zealot id " + std::to_string(id));
    g.zealot_flag_[id] = true;
  }
  g.persuadable_index_.assign(static_cast<std::size_t>(node_count), -1);
  for (NodeId i = 0; i < node_count; ++i) {
    if (g.zealot_flag_[i]) continue;
    g.persuadable_index_[i] = static_cast<int>(g.persuadable_.size());
    g.persuadable_.push_back(i);
  }
  return g;
}

Graph path_graph(int n_persuadable) {
  if (n_persuadable < 1) throw ValidationError("path graph needs at least one persuadable node");
  const int n = n_persuadable;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i <= n; ++i) edges.emplace_back(i, i + 1);
  const double end = (n + 1) / 2.0;
  return build_graph(n + 2, edges, {{0, -end}, {n + 1, end}});
}

PairedCliques paired_cliques(int clique_size, Alignment alignment) {
  const int k = clique_size;
  if (k < 1) throw ValidationError("clique size must be positive");
  if (k % 2 != 0)
    throw ValidationError("clique size must be even so classes split evenly, got " +
                          std::to_string(k));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) edges.emplace_back(c * k + i, c * k + j);
  for (int i = 0; i < k; ++i) edges.emplace_back(i, k + i);
  const NodeId zneg = 2 * k, zpos = 2 * k + 1;
  for (NodeId i = 0; i < 2 * k; ++i) {
    edges.emplace_back(i, zneg);
    edges.emplace_back(i, zpos);
  }

  PairedCliques pc;
  pc.graph = build_graph(2 * k + 2, edges, {{zneg, -1.0}, {zpos, 1.0}});
  pc.clique_size = k;
  pc.alignment = alignment;
  pc.negative_zealot = zneg;
  pc.positive_zealot = zpos;
  if (alignment == Alignment::aligned) {
    for (int i = 0; i < k; ++i) {
      pc.first_class.push_back(i);
      pc.second_class.push_back(k + i);
    }
  } else {
    // Matched pairs share a class and each clique is halved, so every node
    // sees k/2 neighbors from each class.
    for (int i = 0; i < k; ++i) {
      auto& cls = i < k / 2 ? pc.first_class : pc.second_class;
      cls.push_back(i);
      cls.push_back(k + i);
    }
    std::sort(pc.first_class.begin(), pc.first_class.end());
    std::sort(pc.second_class.begin(), pc.second_class.end());
  }
  return pc;
}

Graph karate_club() {
  static const std::vector<std::pair<NodeId, NodeId>> edges = {
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
      {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
      {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
      {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
      {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
      {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
      {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
      {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
      {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
      {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
  return build_graph(34, edges, {{0, -1.0}, {33, 1.0}});
}

bool is_balanced_exposure(const Graph& g) {
  if (g.zealots().size() != 2) throw ValidationError("BE defined for two zealots");
  for (NodeId i : g.persuadable()) {
    int zd = g.zealot_degree(i);
    if (zd != 0 && zd != 2) return false;
  }
  return true;
}

PersuadablePartition persuadable_components(const Graph& g) {
  std::vector<bool> keep(static_cast<std::size_t>(g.node_count()));
  for (NodeId i = 0; i < g.node_count(); ++i) keep[i] = !g.is_zealot(i);
  return {components_of(g, keep)};
}

bool is_connected(const Graph& g) {
  if (g.node_count() == 0) return true;
  std::vector<bool> keep(static_cast<std::size_t>(g.node_count()), true);
  return components_of(g, keep).size() == 1;
}

std::vector<GatewayBlock> single_gateway_blocks(const Graph& g) {
  if (!is_connected(g)) throw ValidationError("single_gateway_blocks requires a connected graph");
  std::vector<GatewayBlock> candidates;
  if (g.zealots().empty()) return candidates;
  std::vector<bool> keep(static_cast<std::size_t>(g.node_count()), true);
  for (NodeId gate = 0; gate < g.node_count(); ++gate) {
    keep[gate] = false;
    for (auto& comp : components_of(g, keep)) {
      bool has_zealot = std::any_of(comp.begin(), comp.end(),
                                    [&](NodeId v) { return g.is_zealot(v); });
      if (!has_zealot) candidates.push_back({gate, std::move(comp)});
    }
    keep[gate] = true;
  }
  std::vector<GatewayBlock> out;
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    bool contained = false;
    for (std::size_t b = 0; b < candidates.size() && !contained; ++b) {
      if (a == b) continue;
      const auto& small = candidates[a].block;
      const auto& big = candidates[b].block;
      if (big.size() > small.size() &&
          std::includes(big.begin(), big.end(), small.begin(), small.end()))
        contained = true;
    }
    if (!contained) out.push_back(candidates[a]);
  }
  std::sort(out.begin(), out.end(), [](const GatewayBlock& x, const GatewayBlock& y) {
    return x.block.front() < y.block.front();
  });
  return out;
}

Subgraph component_subgraph(const Graph& g, const std::vector<NodeId>& component) {
  std::set<NodeId> nodes(component.begin(), component.end());
  for (NodeId v : component)
    for (NodeId w : g.neighbors(v))
      if (g.is_zealot(w)) nodes.insert(w);
  Subgraph sub;
  sub.original_ids.assign(nodes.begin(), nodes.end());
  std::vector<int> local(static_cast<std::size_t>(g.node_count()), -1);
  for (std::size_t k = 0; k < sub.original_ids.size(); ++k)
    local[sub.original_ids[k]] = static_cast<int>(k);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::pair<NodeId, double>> zealots;
  for (const Edge& e : g.edges()) {
    if (local[e.first] < 0 || local[e.second] < 0) continue;
    // Zealot-zealot edges carry no dynamics; keep them anyway for fidelity.
    edges.emplace_back(local[e.first], local[e.second]);
  }
  for (NodeId v : sub.original_ids)
    if (g.is_zealot(v)) zealots.emplace_back(local[v], g.zealot_opinion(v));
  sub.graph = build_graph(static_cast<int>(sub.original_ids.size()), edges, zealots);
  return sub;
}

Graph parse_graph(std::istream& edges_in, std::istream& zealots_in,
                  const std::string& edge_source, const std::string& zealot_source) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::pair<NodeId, double>> zealots;
  long long declared = -1;
  long long max_id = -1;

  auto to_id = [&](std::string_view tok, const std::string& src, int line) {
    try {
      long long v = parse_integer(tok);
      if (v < 0 || v > 100'000'000) throw ValidationError("node id out of range");
      return static_cast<NodeId>(v);
    } catch (const ValidationError& e) {
      throw ParseError(src, line, e.what());
    }
  };

  std::string line;
  int lineno = 0;
  while (std::getline(edges_in, line)) {
    ++lineno;
    std::string_view body(line);
    if (auto hash = body.find('#'); hash != std::string_view::npos) {
      auto comment = split_whitespace(body.substr(hash + 1));
      if (comment.size() == 2 && comment[0] == "nodes:") {
        try {
          declared = parse_integer(comment[1]);
        } catch (const ValidationError& e) {
          throw ParseError(edge_source, lineno, e.what());
        }
      }
      body = body.substr(0, hash);
    }
    auto tok = split_whitespace(body);
    if (tok.empty()) continue;
    if (tok.size() != 2) throw ParseError(edge_source, lineno, "expected 'i j', got '" + line + "'");
    NodeId a = to_id(tok[0], edge_source, lineno);
    NodeId b = to_id(tok[1], edge_source, lineno);
    edges.emplace_back(a, b);
    max_id = std::max<long long>(max_id, std::max(a, b));
  }

  lineno = 0;
  while (std::getline(zealots_in, line)) {
    ++lineno;
    std::string_view body(line);
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    auto tok = split_whitespace(body);
    if (tok.empty()) continue;
    if (tok.size() != 2)
      throw ParseError(zealot_source, lineno, "expected 'i opinion', got '" + line + "'");
    NodeId id = to_id(tok[0], zealot_source, lineno);
    double op = 0.0;
    try {
      op = parse_double(tok[1]);
    } catch (const ValidationError& e) {
      throw ParseError(zealot_source, lineno, e.what());
    }
    zealots.emplace_back(id, op);
    max_id = std::max<long long>(max_id, id);
  }

  long long n = declared >= 0 ? declared : max_id + 1;
  return build_graph(static_cast<int>(n), edges, zealots);
}

Graph load_graph(const std::filesystem::path& edge_file,
                 const std::filesystem::path& zealot_file) {
  std::ifstream ein(edge_file);
  if (!ein) throw Error("cannot open edge file " + edge_file.string());
  std::ifstream zin;
  std::istringstream empty;
  std::istream* zs = &empty;
  if (!zealot_file.empty()) {
    zin.open(zealot_file);
    if (!zin) throw Error("cannot open zealot file " + zealot_file.string());
    zs = &zin;
  }
  return parse_graph(ein, *zs, edge_file.string(), zealot_file.string());
}

void write_edges(std::ostream& out, const Graph& g) {
  out << "# nodes: " << g.node_count() << '\n';
  for (const Edge& e : g.edges()) out << e.first << ' ' << e.second << '\n';
}

void write_zealots(std::ostream& out, const Graph& g) {
  for (const auto& [id, op] : g.zealots()) out << id << ' ' << format_double(op) << '\n';
}

std::string graph_to_json(const Graph& g) {
  nlohmann::ordered_json j;
  j["n"] = g.node_count();
  auto edges = nlohmann::json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.first, e.second});
  j["edges"] = edges;
  auto z = nlohmann::ordered_json::object();
  for (const auto& [id, op] : g.zealots()) z[std::to_string(id)] = op;
  j["zealots"] = z;
  return j.dump();
}

Graph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("<json>", 1, e.what());
  }
  try {
    int n = j.at("n").get<int>();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    std::vector<std::pair<NodeId, double>> zealots;
    if (j.contains("zealots"))
      for (const auto& [key, val] : j.at("zealots").items())
        zealots.emplace_back(static_cast<NodeId>(parse_integer(key)), val.get<double>());
    return build_graph(n, edges, zealots);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace sbcm
