#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cffedsr {

struct EvalOutcome {
    int client_id = 0;
    int rank = 0;  // in [1, |candidates|]
    double hr5 = 0.0, ndcg5 = 0.0;
    double hr10 = 0.0, ndcg10 = 0.0;
};

struct FairnessReport {
    std::vector<double> scores;  // per-client p_i
    double variance = 0.0;       // population variance
};

// Pessimistic rank of the target among the scored candidates: ties count
// against the target.
int rank_of_target(std::span<const double> scores, int target_index);

// hr = [rank <= K]; ndcg = 1/log2(rank+1) inside the cutoff, else 0.
std::pair<double, double> hr_ndcg(int rank, int K);

// Population variance of the per-client scores.
double fairness_variance(std::span<const double> scores);

FairnessReport fairness_report(std::vector<double> scores);

// First round r such that no later round within the patience window
// improves on the best value seen up to r by more than tol; nullopt if the
// series ends before any such plateau.
std::optional<int> convergence_round(std::span<const double> history, int patience = 5,
                                     double tol = 0.0);

// 8 bytes per embedding entry, down and up, plus 16 bytes of metadata
// (n_k, p_k) per upload.
long long round_bytes(int participants, long long embedding_entries);

}  // namespace cffedsr
