#include "isoprefs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "isoprefs/common.hpp"

namespace isoprefs {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc_auc: scores and labels differ in length");
    if (scores.empty()) throw DegenerateLabels("roc_auc: empty input");

    std::size_t positives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw std::invalid_argument("roc_auc: non-finite score");
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument("roc_auc: labels must be 0 or 1");
        positives += static_cast<std::size_t>(labels[i]);
    }
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0)
        throw DegenerateLabels("roc_auc: need at least one anomaly and one genuine label");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks over tie groups, summed for the positive class.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) positive_rank_sum += midrank;
        i = j;
    }

    const double n1 = static_cast<double>(positives);
    const double n0 = static_cast<double>(negatives);
    const double u = positive_rank_sum - n1 * (n1 + 1.0) / 2.0;
    return u / (n1 * n0);
}

} // namespace isoprefs
