#pragma once

#include <set>

#include "gist/kg.hpp"

namespace gist {

/// Node and edge selection over a KnowledgeGraph. Edges keep their stored
/// direction and type; both endpoints of every edge are in `nodes`.
struct Subgraph {
  std::set<NodeId> nodes;
  std::set<EdgeIndex> edges;

  friend bool operator==(const Subgraph&, const Subgraph&) = default;
};

}  // namespace gist
