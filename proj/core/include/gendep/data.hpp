#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gendep {

/// Features-by-samples real matrix with unique row and column identifiers.
/// The universal data carrier between modules; values are always finite.
struct ExpressionMatrix {
  Eigen::MatrixXd values;  // feature_ids.size() x sample_ids.size()
  std::vector<std::string> feature_ids;
  std::vector<std::string> sample_ids;

  Eigen::Index n_features() const { return values.rows(); }
  Eigen::Index n_samples() const { return values.cols(); }

  /// Row index of a feature id, -1 if absent.
  Eigen::Index feature_index(const std::string& id) const;
  /// Column index of a sample id, -1 if absent.
  Eigen::Index sample_index(const std::string& id) const;

  /// Rows for the given feature ids, in the given order; throws on unknown id.
  Eigen::MatrixXd rows(const std::vector<std::string>& ids) const;

  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;
};

/// Undirected interaction graph over string node ids. Edges are stored with
/// endpoints ordered lexicographically; no self-loops, no duplicates.
struct InteractionNetwork {
  std::vector<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;
  int skipped_self_loops = 0;  // load-time warning count

  static std::pair<std::string, std::string> edge_key(std::string a, std::string b);

  bool has_node(const std::string& id) const;
  bool has_edge(const std::string& a, const std::string& b) const;
  void add_node(const std::string& id);
  /// Adds an undirected edge, creating endpoints as needed. Self-loops are
  /// counted in skipped_self_loops and otherwise ignored.
  void add_edge(const std::string& a, const std::string& b);
  std::vector<std::string> neighbors(const std::string& id) const;
};

/// Genomic coordinates for features: feature id -> (chromosome, position).
struct PositionTable {
  struct Position {
    std::string chromosome;
    std::int64_t coordinate = 0;  // non-negative
  };
  std::map<std::string, Position> entries;

  bool contains(const std::string& id) const { return entries.count(id) > 0; }
};

}  // namespace gendep
