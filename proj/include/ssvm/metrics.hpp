#pragma once

#include "ssvm/trainer.hpp"

namespace ssvm {

/// Node-level evaluation against ground truth. global_accuracy is the overall
/// fraction of correctly labeled nodes; average_class_accuracy is the mean of
/// per-class recalls over classes present in the truth; jaccard is
/// TP / (TP + FP + FN) per class (NaN for classes absent from both truth and
/// prediction).
struct Metrics {
  double global_accuracy = 0.0;
  double average_class_accuracy = 0.0;
  Eigen::VectorXd per_class_jaccard;
  Eigen::MatrixXi confusion;  // rows: truth, cols: prediction
};

Metrics metrics_from_confusion(const Eigen::MatrixXi& confusion);

Labeling predict(const FactorGraphInstance& instance, const ParameterVector& params,
                 Tier tier, const OracleConfig& cfg = {});

Metrics evaluate(const ParameterVector& params, const Dataset& dataset, Tier tier,
                 const OracleConfig& cfg = {});

}  // namespace ssvm
