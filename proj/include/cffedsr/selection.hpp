#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cffedsr/matrix.hpp"

namespace cffedsr {

// A client participates once its data size reaches lambda1 samples OR
// lambda2 global rounds have elapsed; the warm-up keeps small clients from
// disturbing the early global model.
bool eligible(long long n_k, int rounds_elapsed, int lambda1, int lambda2);

// Client representation: concat(mean embedding of the recent v1 items,
// mean embedding of the recent v2 items). Requires v2 > v1 >= 1.
std::vector<double> represent(std::span<const int> sequence, const Matrix& embedding, int v1,
                              int v2);

struct Clustering {
    std::vector<int> assignment;                 // point index -> cluster
    std::vector<std::vector<double>> centroids;  // k vectors
    double inertia = 0.0;                        // within-cluster SSE
};

// k-means++ seeding followed by Lloyd iterations until the assignment
// reaches a fixed point or max_iter. Empty clusters are repaired by
// stealing the farthest point from the largest cluster.
Clustering kmeans(const std::vector<std::vector<double>>& points, int k, int max_iter,
                  std::uint64_t seed);

// Largest-remainder apportionment of the budget across clusters, then
// uniform sampling without replacement inside each cluster. Returns ids
// from `client_ids` (parallel to the clustered points).
std::vector<int> proportional_sample(const Clustering& clustering,
                                     const std::vector<int>& client_ids, int budget,
                                     std::uint64_t seed);

}  // namespace cffedsr
