#pragma once

#include <map>
#include <vector>

#include "cffedsr/matrix.hpp"

namespace cffedsr {

// The per-round upload: only the embedding table plus two scalars ever
// leave a client.
struct ClientUpdate {
    int client_id = 0;
    Matrix embedding;
    long long n_k = 1;   // local sample count
    double p_k = 0.0;    // HR@10 + NDCG@10 on the local validation target
};

// client-id -> weight; weights are >= 0 and sum to 1.
using AggregationWeights = std::map<int, double>;

// weight_k = n_k / sum(n_j)
AggregationWeights fedavg_weights(const std::vector<ClientUpdate>& updates);

// Fairness-aware weighting: performance factor through the decreasing
// activation (1/2)^x, size factor through the increasing activation
// sqrt(x), blended by alpha/beta and normalized.
// literal_eq5_eq8 switches the re-normalization numerators from the
// activated values back to the raw ones, for comparison.
AggregationWeights fairness_weights(const std::vector<ClientUpdate>& updates, double alpha,
                                    double beta, bool literal_eq5_eq8 = false);

// Elementwise weighted sum of the uploaded embeddings, accumulated in
// ascending client-id order.
Matrix aggregate(const std::vector<ClientUpdate>& updates, const AggregationWeights& weights);

}  // namespace cffedsr
