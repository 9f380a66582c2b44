#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qkdnar {

using NodeId = int;
using LinkId = int;

struct Node {
  std::string name;
  int modules = 0;  // QKD module budget (transmitters + receivers)

  bool operator==(const Node&) const = default;
};

// Undirected fiber as declared in topology files.
struct Fiber {
  NodeId a = 0;
  NodeId b = 0;
  double km = 0.0;

  bool operator==(const Fiber&) const = default;
};

struct Link {
  NodeId src = 0;
  NodeId dst = 0;
  double km = 0.0;

  bool operator==(const Link&) const = default;
};

// Unordered node pair; keys are shared by both endpoints regardless of the
// direction a channel was provisioned in.
struct NodePair {
  NodeId lo = 0;
  NodeId hi = 0;

  NodePair() = default;
  NodePair(NodeId u, NodeId v) : lo(u < v ? u : v), hi(u < v ? v : u) {}

  auto operator<=>(const NodePair&) const = default;
};

// Directed physical graph. Every fiber expands to two directed links: link
// 2i is a->b and link 2i+1 is b->a for fiber i.
class Topology {
 public:
  Topology() = default;

  // Validates and expands. Throws ValidationError naming the offending field.
  Topology(std::vector<Node> nodes, std::vector<Fiber> fibers, int channels);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Fiber>& fibers() const { return fibers_; }
  const std::vector<Link>& links() const { return links_; }
  int channels() const { return channels_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }

  const Node& node(NodeId n) const { return nodes_.at(n); }
  const Link& link(LinkId e) const { return links_.at(e); }

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<LinkId> find_link(NodeId src, NodeId dst) const;

  // Outgoing links of n sorted by destination id.
  const std::vector<LinkId>& out_links(NodeId n) const { return out_.at(n); }

  // "u>v" using node names.
  std::string link_label(LinkId e) const;
  std::optional<LinkId> parse_link_label(std::string_view label) const;

  int total_modules() const;

  bool operator==(const Topology& o) const {
    return nodes_ == o.nodes_ && links_ == o.links_ && channels_ == o.channels_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Fiber> fibers_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  int channels_ = 0;
};

}  // namespace qkdnar
