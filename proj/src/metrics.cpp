#include "cffedsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cffedsr {

int rank_of_target(std::span<const double> scores, int target_index) {
    if (target_index < 0 || static_cast<std::size_t>(target_index) >= scores.size())
        throw std::invalid_argument("rank_of_target: target index out of range");
    const double t = scores[target_index];
    if (!std::isfinite(t)) throw std::invalid_argument("rank_of_target: non-finite score");
    int rank = 1;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw std::invalid_argument("rank_of_target: non-finite score");
        if (static_cast<int>(i) == target_index) continue;
        if (scores[i] >= t) ++rank;
    }
    return rank;
}

std::pair<double, double> hr_ndcg(int rank, int K) {
    if (rank < 1) throw std::invalid_argument("hr_ndcg: rank must be >= 1");
    if (rank > K) return {0.0, 0.0};
    return {1.0, 1.0 / std::log2(static_cast<double>(rank) + 1.0)};
}

double fairness_variance(std::span<const double> scores) {
    if (scores.empty()) throw std::invalid_argument("fairness_variance: empty");
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    return var / static_cast<double>(scores.size());
}

FairnessReport fairness_report(std::vector<double> scores) {
    FairnessReport r;
    r.variance = fairness_variance(scores);
    r.scores = std::move(scores);
    return r;
}

std::optional<int> convergence_round(std::span<const double> history, int patience,
                                     double tol) {
    const int n = static_cast<int>(history.size());
    double best = -std::numeric_limits<double>::infinity();
    for (int r = 0; r + patience < n; ++r) {
        best = std::max(best, history[r]);
        bool improved = false;
        for (int j = r + 1; j <= r + patience; ++j) {
            if (history[j] > best + tol) {
                improved = true;
                break;
            }
        }
        if (!improved) return r;
    }
    return std::nullopt;
}

long long round_bytes(int participants, long long embedding_entries) {
    return static_cast<long long>(participants) * (2 * 8 * embedding_entries + 16);
}

}  // namespace cffedsr
