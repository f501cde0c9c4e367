#include "cffedsr/aggregation.hpp"

#include <cmath>
#include <stdexcept>

namespace cffedsr {

AggregationWeights fedavg_weights(const std::vector<ClientUpdate>& updates) {
    if (updates.empty()) throw std::invalid_argument("fedavg_weights: no updates");
    double total = 0.0;
    for (const auto& u : updates) {
        if (u.n_k < 1) throw std::invalid_argument("fedavg_weights: n_k must be >= 1");
        total += static_cast<double>(u.n_k);
    }
    AggregationWeights w;
    for (const auto& u : updates) w[u.client_id] = static_cast<double>(u.n_k) / total;
    return w;
}

AggregationWeights fairness_weights(const std::vector<ClientUpdate>& updates, double alpha,
                                    double beta, bool literal_eq5_eq8) {
    if (updates.empty()) throw std::invalid_argument("fairness_weights: no updates");
    if (alpha < 0.0 || beta < 0.0 || alpha + beta <= 0.0)
        throw std::invalid_argument("fairness_weights: need alpha, beta >= 0 and alpha+beta > 0");
    const std::size_t m = updates.size();

    // performance factor
    double p_sum = 0.0;
    for (const auto& u : updates) {
        if (u.p_k < 0.0 || !std::isfinite(u.p_k))
            throw std::invalid_argument("fairness_weights: bad p_k");
        p_sum += u.p_k;
    }
    std::vector<double> p_factor(m);
    if (p_sum <= 0.0) {
        // round one: nobody evaluated yet
        for (auto& v : p_factor) v = 1.0 / static_cast<double>(m);
    } else {
        std::vector<double> p_hat(m);
        double hat_sum = 0.0, raw_sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double p_norm = updates[i].p_k / p_sum;
            p_hat[i] = std::pow(0.5, p_norm);
            hat_sum += p_hat[i];
            raw_sum += updates[i].p_k;
        }
        for (std::size_t i = 0; i < m; ++i)
            p_factor[i] = literal_eq5_eq8 ? updates[i].p_k / raw_sum : p_hat[i] / hat_sum;
    }

    // size factor
    double n_sum = 0.0;
    for (const auto& u : updates) n_sum += static_cast<double>(u.n_k);
    std::vector<double> q_factor(m);
    double q_hat_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        q_factor[i] = std::sqrt(static_cast<double>(updates[i].n_k) / n_sum);
        q_hat_sum += q_factor[i];
    }
    for (std::size_t i = 0; i < m; ++i)
        q_factor[i] = literal_eq5_eq8 ? static_cast<double>(updates[i].n_k) / n_sum
                                      : q_factor[i] / q_hat_sum;

    double o_sum = 0.0;
    std::vector<double> o(m);
    for (std::size_t i = 0; i < m; ++i) {
        o[i] = alpha * p_factor[i] + beta * q_factor[i];
        o_sum += o[i];
    }
    AggregationWeights w;
    for (std::size_t i = 0; i < m; ++i) w[updates[i].client_id] = o[i] / o_sum;
    return w;
}

Matrix aggregate(const std::vector<ClientUpdate>& updates, const AggregationWeights& weights) {
    if (updates.empty()) throw std::invalid_argument("aggregate: no updates");
    if (weights.size() != updates.size())
        throw std::invalid_argument("aggregate: weights do not cover the update set");
    std::map<int, const ClientUpdate*> by_id;
    for (const auto& u : updates) by_id[u.client_id] = &u;
    Matrix out(updates[0].embedding.rows, updates[0].embedding.cols);
    for (const auto& [id, wt] : weights) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw std::invalid_argument("aggregate: weight for unknown client");
        axpy(out, it->second->embedding, wt);
    }
    return out;
}

}  // namespace cffedsr
