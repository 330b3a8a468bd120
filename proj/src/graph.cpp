#include "ssvm/graph.hpp"

#include <cmath>
#include <set>

namespace ssvm {

void FactorGraphInstance::validate() const {
  if (node_count <= 0) throw ValidationError("instance: node_count must be positive");
  if (num_labels <= 0) throw ValidationError("instance: num_labels must be positive");
  if (unary_features.cols() != node_count)
    throw ValidationError("instance: unary feature count != node_count");
  if (edge_features.cols() != static_cast<Eigen::Index>(edges.size()))
    throw ValidationError("instance: edge feature count != edge count");
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= node_count || j >= node_count)
      throw ValidationError("instance: edge endpoint out of range");
    if (i == j) throw ValidationError("instance: self-loop");
    auto canon = std::minmax(i, j);
    if (!seen.insert({canon.first, canon.second}).second)
      throw ValidationError("instance: duplicate edge");
  }
  if (!unary_features.allFinite() || !edge_features.allFinite())
    throw ValidationError("instance: non-finite feature");
}

int ParameterVector::pair_index(int a, int b, int num_labels, bool symmetric) {
  if (!symmetric) return a * num_labels + b;
  if (a > b) std::swap(a, b);
  // row-major upper triangle: (a, b) with a <= b
  return a * num_labels - a * (a - 1) / 2 + (b - a);
}

ParameterVector ParameterVector::zero(int num_labels, int d_u, int d_p, bool symmetric) {
  ParameterVector p;
  p.unary = Eigen::MatrixXd::Zero(num_labels, d_u);
  p.pairwise = Eigen::MatrixXd::Zero(pair_blocks(num_labels, symmetric), d_p);
  p.symmetric = symmetric;
  return p;
}

Eigen::VectorXd ParameterVector::flat() const {
  Eigen::VectorXd v(dimension());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < unary.rows(); ++r)
    for (Eigen::Index c = 0; c < unary.cols(); ++c) v[k++] = unary(r, c);
  for (Eigen::Index r = 0; r < pairwise.rows(); ++r)
    for (Eigen::Index c = 0; c < pairwise.cols(); ++c) v[k++] = pairwise(r, c);
  return v;
}

ParameterVector ParameterVector::from_flat(const Eigen::VectorXd& v, int num_labels,
                                           int d_u, int d_p, bool symmetric) {
  const int P = pair_blocks(num_labels, symmetric);
  if (v.size() != static_cast<Eigen::Index>(num_labels) * d_u + static_cast<Eigen::Index>(P) * d_p)
    throw ValidationError("from_flat: dimension mismatch");
  ParameterVector p;
  p.symmetric = symmetric;
  p.unary.resize(num_labels, d_u);
  p.pairwise.resize(P, d_p);
  Eigen::Index k = 0;
  for (int r = 0; r < num_labels; ++r)
    for (int c = 0; c < d_u; ++c) p.unary(r, c) = v[k++];
  for (int r = 0; r < P; ++r)
    for (int c = 0; c < d_p; ++c) p.pairwise(r, c) = v[k++];
  return p;
}

void ParameterVector::validate() const {
  if (!unary.allFinite() || !pairwise.allFinite())
    throw ValidationError("params: non-finite entry");
  if (pairwise.rows() != pair_blocks(num_labels(), symmetric))
    throw ValidationError("params: pairwise block count inconsistent with L and symmetry");
}

void validate_labeling(const FactorGraphInstance& instance, const Labeling& labeling) {
  if (labeling.size() != instance.node_count)
    throw ValidationError("labeling: length != node_count");
  for (Eigen::Index i = 0; i < labeling.size(); ++i)
    if (labeling[i] < 0 || labeling[i] >= instance.num_labels)
      throw ValidationError("labeling: label out of range");
}

Eigen::VectorXd joint_feature(const FactorGraphInstance& instance,
                              const Labeling& labeling, bool symmetric) {
  validate_labeling(instance, labeling);
  const int L = instance.num_labels;
  const int d_u = instance.unary_dim();
  const int d_p = instance.pairwise_dim();
  const int P = ParameterVector::pair_blocks(L, symmetric);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L) * d_u +
                                            static_cast<Eigen::Index>(P) * d_p);
  for (int i = 0; i < instance.node_count; ++i)
    v.segment(static_cast<Eigen::Index>(labeling[i]) * d_u, d_u) += instance.unary_features.col(i);
  const Eigen::Index pair_base = static_cast<Eigen::Index>(L) * d_u;
  for (int e = 0; e < instance.edge_count(); ++e) {
    const auto& [i, j] = instance.edges[e];
    const int p = ParameterVector::pair_index(labeling[i], labeling[j], L, symmetric);
    v.segment(pair_base + static_cast<Eigen::Index>(p) * d_p, d_p) += instance.edge_features.col(e);
  }
  return v;
}

double score(const FactorGraphInstance& instance, const Labeling& labeling,
             const ParameterVector& params) {
  validate_labeling(instance, labeling);
  if (params.num_labels() != instance.num_labels ||
      params.unary_dim() != instance.unary_dim() ||
      params.pairwise_dim() != instance.pairwise_dim())
    throw ValidationError("score: parameter/instance dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < instance.node_count; ++i)
    s += params.unary.row(labeling[i]).dot(instance.unary_features.col(i));
  for (int e = 0; e < instance.edge_count(); ++e) {
    const auto& [i, j] = instance.edges[e];
    const int p = ParameterVector::pair_index(labeling[i], labeling[j],
                                              instance.num_labels, params.symmetric);
    s += params.pairwise.row(p).dot(instance.edge_features.col(e));
  }
  return s;
}

double loss(const Labeling& truth, const Labeling& candidate, const LossSpec& spec) {
  if (truth.size() != candidate.size())
    throw ValidationError("loss: labeling length mismatch");
  if (spec.node_weights.size() != 0 && spec.node_weights.size() != truth.size())
    throw ValidationError("loss: weight vector length mismatch");
  double l = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i)
    if (truth[i] != candidate[i]) l += spec.weight(static_cast<int>(i));
  return l;
}

double Potentials::value(const Labeling& labeling) const {
  double s = 0.0;
  for (int i = 0; i < node_count(); ++i) s += node(labeling[i], i);
  for (int e = 0; e < edge_count(); ++e)
    s += edge[e](labeling[edges[e].first], labeling[edges[e].second]);
  return s;
}

Potentials make_potentials(const FactorGraphInstance& instance,
                           const ParameterVector& params) {
  if (params.num_labels() != instance.num_labels ||
      params.unary_dim() != instance.unary_dim() ||
      params.pairwise_dim() != instance.pairwise_dim())
    throw ValidationError("make_potentials: dimension mismatch");
  const int L = instance.num_labels;
  Potentials pot;
  pot.node = params.unary * instance.unary_features;  // L x n
  pot.edges = instance.edges;
  pot.edge.reserve(instance.edges.size());
  for (int e = 0; e < instance.edge_count(); ++e) {
    Eigen::MatrixXd t(L, L);
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b)
        t(a, b) = params.pairwise
                      .row(ParameterVector::pair_index(a, b, L, params.symmetric))
                      .dot(instance.edge_features.col(e));
    pot.edge.push_back(std::move(t));
  }
  return pot;
}

LossAugmentedInstance loss_augment(const FactorGraphInstance& instance,
                                   const Labeling& truth, const LossSpec& spec) {
  validate_labeling(instance, truth);
  if (spec.node_weights.size() != 0 && spec.node_weights.size() != truth.size())
    throw ValidationError("loss_augment: weight vector length mismatch");
  LossAugmentedInstance aug;
  aug.instance = &instance;
  aug.unary_offset = Eigen::MatrixXd::Zero(instance.num_labels, instance.node_count);
  for (int i = 0; i < instance.node_count; ++i)
    for (int l = 0; l < instance.num_labels; ++l)
      if (l != truth[i]) aug.unary_offset(l, i) = spec.weight(i);
  return aug;
}

double augmented_score(const LossAugmentedInstance& aug, const Labeling& labeling,
                       const ParameterVector& params) {
  double s = score(*aug.instance, labeling, params);
  for (int i = 0; i < aug.instance->node_count; ++i) s += aug.unary_offset(labeling[i], i);
  return s;
}

Potentials make_potentials(const LossAugmentedInstance& aug,
                           const ParameterVector& params) {
  Potentials pot = make_potentials(*aug.instance, params);
  pot.node += aug.unary_offset;
  return pot;
}

}  // namespace ssvm
