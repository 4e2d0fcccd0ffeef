#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "flownet/errors.hpp"
#include "flownet/kinematics.hpp"
#include "flownet/piecewise.hpp"

namespace flownet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct EdgeSpec {
  std::string id;
  std::string tail;
  std::string head;
  PiecewiseConstant velocity;     // c, strictly positive
  PiecewiseConstant absorption;   // q
  std::optional<double> weight;   // share of the tail vertex, default 1
};

/// Unvalidated graph description, as read from a file or built in code.
struct GraphDescription {
  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;
  Matrix control;                      // edge-indexed input pattern, m x N
  std::optional<Matrix> allocation;    // optional routing matrix H, m x m
  double kirchhoff_tol = 1e-12;
  int truncation_depth = 0;            // 0 = keep the graph as given
  std::string truncation_root;         // BFS root when depth > 0
};

struct Edge {
  std::string id;
  std::size_t tail = 0;
  std::size_t head = 0;
  PiecewiseConstant velocity;
  PiecewiseConstant absorption;
  EdgeKinematics kinematics;
  double weight = 1.0;
};

/// Validated directed metric graph. Immutable after construction; all
/// accessors are const and the object can be shared freely across threads.
class MetricGraph {
public:
  /// Empty placeholder; every usable graph comes from build().
  MetricGraph() = default;

  static MetricGraph build(const GraphDescription& d) {
    GraphDescription desc = d;
    if (desc.truncation_depth > 0) desc = truncate(desc);
    return MetricGraph(desc);
  }

  std::size_t edge_count() const { return edges_.size(); }
  std::size_t vertex_count() const { return vertex_names_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t j) const { return edges_[j]; }
  const std::vector<std::string>& vertex_names() const { return vertex_names_; }
  const Matrix& control() const { return control_; }
  std::size_t control_count() const {
    return static_cast<std::size_t>(control_.cols());
  }
  const std::optional<Matrix>& allocation() const { return allocation_; }
  double kirchhoff_tol() const { return kirchhoff_tol_; }
  int truncation_depth() const { return truncation_depth_; }

  double gamma1() const { return gamma1_; }
  double gamma2() const { return gamma2_; }
  double gamma3() const { return gamma3_; }
  /// Shortest total transit time over all edges; positive on every valid graph.
  double tau0() const { return tau0_; }
  double max_transit() const { return max_transit_; }

  /// Velocity at the outflow end, diag entries of c(0).
  const Vector& c_out() const { return c0_; }
  /// Velocity at the inflow end, diag entries of c(1).
  const Vector& c_in() const { return c1_; }

  std::optional<std::size_t> edge_index(const std::string& id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Transposed weighted adjacency of the line graph:
  /// B(j,k) = weight of edge j at its tail, when edge k flows into that
  /// vertex; zero otherwise. Columns sum to one wherever the head vertex
  /// has outgoing edges.
  Matrix adjacency_B() const {
    const std::size_t m = edges_.size();
    Matrix B = Matrix::Zero(m, m);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k)
        if (edges_[k].head == edges_[j].tail) B(j, k) = edges_[j].weight;
    return B;
  }

  /// Outgoing and incoming vertex-edge incidence matrices (0/1 entries,
  /// one per column).
  std::pair<SparseMatrix, SparseMatrix> incidence_matrices() const {
    const auto n = static_cast<Eigen::Index>(vertex_count());
    const auto m = static_cast<Eigen::Index>(edges_.size());
    SparseMatrix out(n, m), in(n, m);
    std::vector<Eigen::Triplet<double>> to, ti;
    for (Eigen::Index j = 0; j < m; ++j) {
      to.emplace_back(static_cast<Eigen::Index>(edges_[j].tail), j, 1.0);
      ti.emplace_back(static_cast<Eigen::Index>(edges_[j].head), j, 1.0);
    }
    out.setFromTriplets(to.begin(), to.end());
    in.setFromTriplets(ti.begin(), ti.end());
    return {out, in};
  }

  /// Weighted outgoing incidence (w at the tail of each edge).
  SparseMatrix weighted_outgoing_incidence() const {
    SparseMatrix w(static_cast<Eigen::Index>(vertex_count()),
                   static_cast<Eigen::Index>(edges_.size()));
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t j = 0; j < edges_.size(); ++j)
      t.emplace_back(static_cast<Eigen::Index>(edges_[j].tail),
                     static_cast<Eigen::Index>(j), edges_[j].weight);
    w.setFromTriplets(t.begin(), t.end());
    return w;
  }

  bool vertex_has_outgoing(std::size_t v) const {
    for (const auto& e : edges_)
      if (e.tail == v) return true;
    return false;
  }

private:
  explicit MetricGraph(const GraphDescription& d) {
    if (d.vertices.empty() || d.edges.empty())
      throw EmptyGraph("graph needs at least one vertex and one edge");

    std::map<std::string, std::size_t> vid;
    for (const auto& name : d.vertices) {
      if (vid.count(name))
        throw ValidationError("Graph", "duplicate vertex id '" + name + "'");
      vid[name] = vertex_names_.size();
      vertex_names_.push_back(name);
    }

    for (const auto& es : d.edges) {
      if (edge_index_.count(es.id))
        throw ValidationError("Graph", "duplicate edge id '" + es.id + "'");
      auto t = vid.find(es.tail);
      auto h = vid.find(es.head);
      if (t == vid.end() || h == vid.end())
        throw ValidationError("Graph", "edge '" + es.id +
                                           "' references unknown vertex");
      Edge e;
      e.id = es.id;
      e.tail = t->second;
      e.head = h->second;
      e.velocity = es.velocity;
      e.absorption = es.absorption;
      if (e.velocity.min_value() <= 0.0)
        throw NonPositiveVelocity("edge '" + es.id +
                                  "' has non-positive velocity");
      e.kinematics = EdgeKinematics(e.velocity, e.absorption);
      e.weight = es.weight.value_or(1.0);
      if (e.weight < 0.0)
        throw ValidationError("Graph",
                              "negative weight on edge '" + es.id + "'");
      edge_index_[e.id] = edges_.size();
      edges_.push_back(std::move(e));
    }

    kirchhoff_tol_ = d.kirchhoff_tol;
    truncation_depth_ = d.truncation_depth;

    // Kirchhoff condition at every vertex that has outgoing edges.
    std::vector<double> wsum(vertex_names_.size(), 0.0);
    std::vector<bool> has_out(vertex_names_.size(), false);
    for (const auto& e : edges_) {
      wsum[e.tail] += e.weight;
      has_out[e.tail] = true;
    }
    for (std::size_t v = 0; v < vertex_names_.size(); ++v) {
      if (has_out[v] && std::abs(wsum[v] - 1.0) > kirchhoff_tol_)
        throw KirchhoffViolation("outgoing weights at vertex '" +
                                 vertex_names_[v] + "' sum to " +
                                 std::to_string(wsum[v]));
    }

    const std::size_t m = edges_.size();
    gamma1_ = edges_[0].velocity.min_value();
    gamma2_ = edges_[0].absorption.max_value();
    gamma3_ = edges_[0].velocity.max_value();
    tau0_ = edges_[0].kinematics.total_transit();
    max_transit_ = tau0_;
    c0_.resize(static_cast<Eigen::Index>(m));
    c1_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const Edge& e = edges_[j];
      gamma1_ = std::min(gamma1_, e.velocity.min_value());
      gamma2_ = std::max(gamma2_, e.absorption.max_value());
      gamma3_ = std::max(gamma3_, e.velocity.max_value());
      tau0_ = std::min(tau0_, e.kinematics.total_transit());
      max_transit_ = std::max(max_transit_, e.kinematics.total_transit());
      c0_[static_cast<Eigen::Index>(j)] = e.velocity(0.0);
      c1_[static_cast<Eigen::Index>(j)] = e.velocity(1.0);
    }
    if (!(tau0_ > 0.0))
      throw ValidationError("Graph", "minimum transit time must be positive");

    if (d.control.size() == 0) {
      control_ = Matrix::Zero(static_cast<Eigen::Index>(m), 0);
    } else {
      if (static_cast<std::size_t>(d.control.rows()) != m)
        throw DimensionMismatch("control pattern must have one row per edge");
      control_ = d.control;
    }

    if (d.allocation) {
      const Matrix& H = *d.allocation;
      if (H.rows() != static_cast<Eigen::Index>(m) ||
          H.cols() != static_cast<Eigen::Index>(m))
        throw AllocationViolation("allocation matrix must be m x m");
      const Matrix B = adjacency_B();
      for (Eigen::Index j = 0; j < H.rows(); ++j)
        for (Eigen::Index k = 0; k < H.cols(); ++k) {
          if (H(j, k) < 0.0 || H(j, k) > 1.0)
            throw AllocationViolation("allocation entries must lie in [0,1]");
          if (B(j, k) == 0.0 && H(j, k) != 0.0)
            throw AllocationViolation(
                "allocation must vanish outside the line-graph adjacency");
        }
      for (Eigen::Index k = 0; k < H.cols(); ++k) {
        const double s = H.col(k).sum();
        if (B.col(k).sum() > 0.0 && std::abs(s - 1.0) > kirchhoff_tol_ * 1e3)
          throw AllocationViolation("allocation column " + std::to_string(k) +
                                    " sums to " + std::to_string(s));
      }
      allocation_ = H;
    }
  }

  /// Breadth-first truncation: keep vertices within `depth` hops of the
  /// root along edge direction. Frontier vertices become sinks (their
  /// outgoing edges are dropped), so the Kirchhoff condition survives at
  /// every retained interior vertex.
  static GraphDescription truncate(const GraphDescription& d) {
    std::map<std::string, int> dist;
    if (!d.truncation_root.empty()) {
      dist[d.truncation_root] = 0;
    } else if (!d.vertices.empty()) {
      dist[d.vertices.front()] = 0;
    }
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& e : d.edges) {
        auto it = dist.find(e.tail);
        if (it == dist.end() || it->second >= d.truncation_depth) continue;
        const int nd = it->second + 1;
        auto h = dist.find(e.head);
        if (h == dist.end() || h->second > nd) {
          dist[e.head] = nd;
          grew = true;
        }
      }
    }
    GraphDescription out;
    out.kirchhoff_tol = d.kirchhoff_tol;
    out.truncation_depth = d.truncation_depth;
    out.truncation_root = d.truncation_root;
    std::vector<std::size_t> kept_edge_rows;
    for (const auto& v : d.vertices)
      if (dist.count(v)) out.vertices.push_back(v);
    for (std::size_t j = 0; j < d.edges.size(); ++j) {
      const auto& e = d.edges[j];
      auto it = dist.find(e.tail);
      if (it != dist.end() && it->second < d.truncation_depth) {
        out.edges.push_back(e);
        kept_edge_rows.push_back(j);
      }
    }
    if (d.control.size() > 0) {
      out.control = Matrix::Zero(
          static_cast<Eigen::Index>(out.edges.size()), d.control.cols());
      for (std::size_t r = 0; r < kept_edge_rows.size(); ++r)
        out.control.row(static_cast<Eigen::Index>(r)) =
            d.control.row(static_cast<Eigen::Index>(kept_edge_rows[r]));
    }
    if (d.allocation) {
      Matrix H = Matrix::Zero(static_cast<Eigen::Index>(out.edges.size()),
                              static_cast<Eigen::Index>(out.edges.size()));
      for (std::size_t r = 0; r < kept_edge_rows.size(); ++r)
        for (std::size_t c = 0; c < kept_edge_rows.size(); ++c)
          H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              (*d.allocation)(static_cast<Eigen::Index>(kept_edge_rows[r]),
                              static_cast<Eigen::Index>(kept_edge_rows[c]));
      out.allocation = H;
    }
    return out;
  }

  std::vector<std::string> vertex_names_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> edge_index_;
  Matrix control_;
  std::optional<Matrix> allocation_;
  Vector c0_, c1_;
  double kirchhoff_tol_ = 1e-12;
  int truncation_depth_ = 0;
  double gamma1_ = 0.0, gamma2_ = 0.0, gamma3_ = 0.0;
  double tau0_ = 0.0, max_transit_ = 0.0;
};

} // namespace flownet
