#include "ssvm/metrics.hpp"

#include <cmath>

namespace ssvm {

Metrics metrics_from_confusion(const Eigen::MatrixXi& confusion) {
  const int L = static_cast<int>(confusion.rows());
  Metrics m;
  m.confusion = confusion;
  long total = 0, correct = 0;
  double recall_sum = 0.0;
  int present = 0;
  m.per_class_jaccard = Eigen::VectorXd::Constant(L, std::nan(""));
  for (int k = 0; k < L; ++k) {
    const long tp = confusion(k, k);
    const long truth_k = confusion.row(k).sum();
    const long pred_k = confusion.col(k).sum();
    total += truth_k;
    correct += tp;
    if (truth_k > 0) {
      recall_sum += static_cast<double>(tp) / static_cast<double>(truth_k);
      ++present;
    }
    const long denom = truth_k + pred_k - tp;
    if (denom > 0) m.per_class_jaccard[k] = static_cast<double>(tp) / static_cast<double>(denom);
  }
  m.global_accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  m.average_class_accuracy = present > 0 ? recall_sum / present : 0.0;
  return m;
}

Labeling predict(const FactorGraphInstance& instance, const ParameterVector& params,
                 Tier tier, const OracleConfig& cfg) {
  const Potentials pot = make_potentials(instance, params);
  // unary argmax as the move-making start
  Labeling init(instance.node_count);
  for (int i = 0; i < instance.node_count; ++i) {
    Eigen::Index am = 0;
    pot.node.col(i).maxCoeff(&am);
    init[i] = static_cast<int>(am);
  }
  switch (tier) {
    case Tier::MOVE_MAKING:
      return *move_making(pot, init, cfg.move_restarts, cfg.seed).labeling;
    case Tier::EXACT:
      return *branch_and_bound(pot, cfg.bnb_tol, cfg.bnb_node_budget, cfg.lp_max_pivots)
                  .labeling;
    case Tier::CACHE:
      break;
  }
  throw ValidationError("predict: unsupported inference tier");
}

Metrics evaluate(const ParameterVector& params, const Dataset& dataset, Tier tier,
                 const OracleConfig& cfg) {
  dataset.validate();
  if (params.num_labels() != dataset.num_labels || params.unary_dim() != dataset.d_u ||
      params.pairwise_dim() != dataset.d_p)
    throw ValidationError("evaluate: model/dataset dimension mismatch");
  const int L = dataset.num_labels;
  Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(L, L);
  for (const auto& s : dataset.samples) {
    const Labeling pred = predict(s.instance, params, tier, cfg);
    for (int i = 0; i < s.instance.node_count; ++i) ++confusion(s.truth[i], pred[i]);
  }
  return metrics_from_confusion(confusion);
}

}  // namespace ssvm
