#pragma once

#include "sbcm/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sbcm {

/// Undirected edge stored with first < second.
struct Edge {
  NodeId first = 0;
  NodeId second = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph with a set of zealots carrying fixed opinions.
///
/// Immutable once built; node ids are 0-based and contiguous. Every node not
/// in the zealot map is persuadable.
class Graph {
 public:
  Graph() = default;

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }
  int degree(NodeId i) const { return static_cast<int>(neighbors(i).size()); }
  bool adjacent(NodeId i, NodeId j) const;

  const std::map<NodeId, double>& zealots() const { return zealots_; }
  bool is_zealot(NodeId i) const { return zealot_flag_[static_cast<std::size_t>(i)]; }
  /// Zealot opinion; only valid when is_zealot(i).
  double zealot_opinion(NodeId i) const { return zealots_.at(i); }

  /// Persuadable node ids in increasing order.
  const std::vector<NodeId>& persuadable() const { return persuadable_; }
  /// Position of node i within persuadable(), or -1 for zealots.
  int persuadable_index(NodeId i) const {
    return persuadable_index_[static_cast<std::size_t>(i)];
  }
  /// Number of zealots adjacent to node i.
  int zealot_degree(NodeId i) const;

  /// Copy of `x` with every zealot entry overwritten by its pinned opinion.
  OpinionState pinned(OpinionState x) const;
  /// State with zealots pinned and persuadable entries set to `fill`.
  OpinionState uniform_state(double fill = 0.0) const;

  /// Smallest and largest zealot opinion; nullopt when there are no zealots.
  std::optional<std::pair<double, double>> zealot_range() const;

  friend Graph build_graph(int node_count, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                           const std::vector<std::pair<NodeId, double>>& zealot_assignments);

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_ && a.zealots_ == b.zealots_;
  }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::map<NodeId, double> zealots_;
  std::vector<bool> zealot_flag_;
  std::vector<NodeId> persuadable_;
  std::vector<int> persuadable_index_;
};

/// Validates and normalizes the input; duplicate undirected edges collapse.
/// Throws ValidationError naming the offending edge or zealot.
Graph build_graph(int node_count, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                  const std::vector<std::pair<NodeId, double>>& zealot_assignments);

/// Path on n + 2 nodes whose end nodes are zealots at -(n+1)/2 and (n+1)/2.
Graph path_graph(int n_persuadable);

enum class Alignment { aligned, unaligned };

/// Two cliques joined by a perfect matching, plus zealots -1 and +1 attached
/// to every persuadable node. The class partition splits persuadable nodes
/// into two equal halves: by clique (aligned) or so that every node sees
/// clique_size/2 neighbors of each class (unaligned).
struct PairedCliques {
  Graph graph;
  int clique_size = 0;
  Alignment alignment = Alignment::aligned;
  std::vector<NodeId> first_class;
  std::vector<NodeId> second_class;
  NodeId negative_zealot = 0;
  NodeId positive_zealot = 0;
};

PairedCliques paired_cliques(int clique_size, Alignment alignment);

/// Zachary karate club (34 nodes) with zealots at nodes 0 (-1) and 33 (+1).
Graph karate_club();

bool is_balanced_exposure(const Graph& g);

struct PersuadablePartition {
  std::vector<std::vector<NodeId>> components;
};

PersuadablePartition persuadable_components(const Graph& g);

/// Zealot-free node set whose every route to a zealot passes through `gateway`.
struct GatewayBlock {
  NodeId gateway = 0;
  std::vector<NodeId> block;
};

/// Maximal single-gateway blocks of a connected graph.
std::vector<GatewayBlock> single_gateway_blocks(const Graph& g);

bool is_connected(const Graph& g);

/// The component's nodes plus every zealot adjacent to them, relabelled
/// 0..k-1 in increasing original id. `original_ids[k]` maps back.
struct Subgraph {
  Graph graph;
  std::vector<NodeId> original_ids;
};

Subgraph component_subgraph(const Graph& g, const std::vector<NodeId>& component);

// Text formats. Edge file: "i j" per line, '#' comments, optional
// "# nodes: N" directive. Zealot file: "i opinion" per line.
Graph parse_graph(std::istream& edges, std::istream& zealots,
                  const std::string& edge_source = "<edges>",
                  const std::string& zealot_source = "<zealots>");
Graph load_graph(const std::filesystem::path& edge_file,
                 const std::filesystem::path& zealot_file);
void write_edges(std::ostream& out, const Graph& g);
void write_zealots(std::ostream& out, const Graph& g);

std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

}  // namespace sbcm
