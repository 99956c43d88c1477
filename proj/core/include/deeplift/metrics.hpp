#pragma once

#include <span>

namespace deeplift {

// Area under the ROC curve via the Mann-Whitney rank statistic; tied scores count half.
// Labels are 0/1. Throws std::invalid_argument on NaN scores or unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

}  // namespace deeplift
