#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssvm {

using Labeling = Eigen::VectorXi;

/// Thrown on malformed inputs (dimension mismatches, invalid graphs, bad labelings).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One training example: node/edge structure plus unary and pairwise features.
/// Edges are canonicalized to (min, max) and must be unique; features are stored
/// column-per-node (d_u x n) and column-per-edge (d_p x m).
struct FactorGraphInstance {
  int node_count = 0;
  int num_labels = 0;
  std::vector<std::pair<int, int>> edges;
  Eigen::MatrixXd unary_features;  // d_u x node_count
  Eigen::MatrixXd edge_features;   // d_p x edges.size()

  int unary_dim() const { return static_cast<int>(unary_features.rows()); }
  int pairwise_dim() const { return static_cast<int>(edge_features.rows()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  void validate() const;
};

/// Learned weights, partitioned into an L x d_u unary block and a P x d_p
/// pairwise block. When symmetric, label pairs (a,b) and (b,a) share one row
/// (P = L(L+1)/2), otherwise P = L^2.
struct ParameterVector {
  Eigen::MatrixXd unary;     // L x d_u
  Eigen::MatrixXd pairwise;  // P x d_p
  bool symmetric = true;

  int num_labels() const { return static_cast<int>(unary.rows()); }
  int unary_dim() const { return static_cast<int>(unary.cols()); }
  int pairwise_dim() const { return static_cast<int>(pairwise.cols()); }
  int pair_block_count() const { return static_cast<int>(pairwise.rows()); }
  int dimension() const {
    return static_cast<int>(unary.size() + pairwise.size());
  }

  static int pair_blocks(int num_labels, bool symmetric) {
    return symmetric ? num_labels * (num_labels + 1) / 2 : num_labels * num_labels;
  }
  /// Row of the pairwise block holding the parameters of label pair (a, b).
  static int pair_index(int a, int b, int num_labels, bool symmetric);

  static ParameterVector zero(int num_labels, int d_u, int d_p, bool symmetric);

  Eigen::VectorXd flat() const;
  static ParameterVector from_flat(const Eigen::VectorXd& v, int num_labels,
                                   int d_u, int d_p, bool symmetric);

  void validate() const;
};

/// Per-node weights of the Hamming loss. An empty weight vector means unit weights.
struct LossSpec {
  Eigen::VectorXd node_weights;

  static LossSpec unit(int node_count) {
    LossSpec s;
    s.node_weights = Eigen::VectorXd::Ones(node_count);
    return s;
  }
  double weight(int node) const {
    return node_weights.size() == 0 ? 1.0 : node_weights[node];
  }
};

void validate_labeling(const FactorGraphInstance& instance, const Labeling& labeling);

/// Joint feature map: accumulates each node's unary feature into its label's
/// block and each edge's feature into the block of its (canonicalized) label pair.
Eigen::VectorXd joint_feature(const FactorGraphInstance& instance,
                              const Labeling& labeling, bool symmetric);

/// Compatibility f(x, y, theta), computed as the direct sum over factor
/// potentials. Equals <theta, joint_feature(x, y)> for all theta.
double score(const FactorGraphInstance& instance, const Labeling& labeling,
             const ParameterVector& params);

/// Weighted Hamming distance between two labelings.
double loss(const Labeling& truth, const Labeling& candidate, const LossSpec& spec);

/// Table representation of all factor potentials at fixed parameters.
/// Node potentials are L x n; each edge has an L x L table.
struct Potentials {
  Eigen::MatrixXd node;  // L x n
  std::vector<Eigen::MatrixXd> edge;
  std::vector<std::pair<int, int>> edges;

  int node_count() const { return static_cast<int>(node.cols()); }
  int num_labels() const { return static_cast<int>(node.rows()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  double value(const Labeling& labeling) const;
};

Potentials make_potentials(const FactorGraphInstance& instance,
                           const ParameterVector& params);

/// An instance paired with a per-node, per-label additive unary offset, such
/// that the offset of label l at node i equals weight(i) * [l != truth(i)].
/// For every labeling y and parameters theta:
///   augmented_score(y, theta) = score(y, theta) + loss(truth, y).
struct LossAugmentedInstance {
  const FactorGraphInstance* instance = nullptr;
  Eigen::MatrixXd unary_offset;  // L x n
};

LossAugmentedInstance loss_augment(const FactorGraphInstance& instance,
                                   const Labeling& truth, const LossSpec& spec);

double augmented_score(const LossAugmentedInstance& aug, const Labeling& labeling,
                       const ParameterVector& params);

Potentials make_potentials(const LossAugmentedInstance& aug,
                           const ParameterVector& params);

}  // namespace ssvm
