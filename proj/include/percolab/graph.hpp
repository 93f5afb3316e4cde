#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace percolab {

using Vertex = std::uint64_t;

// Vertex-transitive host graph. The hypercube {0,1}^m is the flagship and
// is kept implicit (adjacency by bit flips); small explicit graphs are
// supported through an adjacency list for cross-checks.
class TransitiveGraph {
 public:
  enum class Kind { Hypercube, AdjacencyList };

  static TransitiveGraph hypercube(int m) {
    if (m < 1 || m > 40) throw std::invalid_argument("hypercube: m out of range");
    TransitiveGraph g;
    g.kind_ = Kind::Hypercube;
    g.m_ = m;
    g.V_ = Vertex{1} << m;
    return g;
  }

  // adjacency[v] must list exactly m distinct neighbors, symmetric, no loops.
  static TransitiveGraph from_adjacency(std::vector<std::vector<Vertex>> adjacency) {
    TransitiveGraph g;
    g.kind_ = Kind::AdjacencyList;
    g.V_ = adjacency.size();
    if (g.V_ == 0) throw std::invalid_argument("empty adjacency list");
    g.m_ = static_cast<int>(adjacency[0].size());
    for (Vertex v = 0; v < g.V_; ++v) {
      if (static_cast<int>(adjacency[v].size()) != g.m_)
        throw std::invalid_argument("graph is not regular");
      for (Vertex u : adjacency[v]) {
        if (u >= g.V_ || u == v)
          throw std::invalid_argument("bad neighbor entry");
      }
    }
    g.adjacency_ = std::move(adjacency);
    return g;
  }

  Kind kind() const { return kind_; }
  int degree() const { return m_; }
  Vertex vertex_count() const { return V_; }

  void check_vertex(Vertex v) const {
    if (v >= V_)
      throw std::invalid_argument("vertex id " + std::to_string(v) +
                                  " out of range");
  }

  // Neighbors in deterministic order (ascending bit index for the hypercube).
  std::vector<Vertex> neighbors(Vertex v) const {
    check_vertex(v);
    if (kind_ == Kind::Hypercube) {
      std::vector<Vertex> out(static_cast<std::size_t>(m_));
      for (int i = 0; i < m_; ++i) out[i] = v ^ (Vertex{1} << i);
      return out;
    }
    return adjacency_[v];
  }

  Vertex neighbor(Vertex v, int slot) const {
    if (kind_ == Kind::Hypercube) return v ^ (Vertex{1} << slot);
    return adjacency_[v][slot];
  }

  bool is_hypercube() const { return kind_ == Kind::Hypercube; }

 private:
  TransitiveGraph() = default;
  Kind kind_ = Kind::Hypercube;
  int m_ = 0;
  Vertex V_ = 0;
  std::vector<std::vector<Vertex>> adjacency_;
};

inline std::vector<Vertex> neighbors(const TransitiveGraph& g, Vertex v) {
  return g.neighbors(v);
}

}  // namespace percolab
