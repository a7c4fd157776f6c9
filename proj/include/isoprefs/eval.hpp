#pragma once

#include <span>

namespace isoprefs {

// Probability that a random anomaly (label 1) outscores a random genuine
// point (label 0), ties counted half: the Mann-Whitney form of ROC AUC.
// Throws DegenerateLabels when either class is missing.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

} // namespace isoprefs
