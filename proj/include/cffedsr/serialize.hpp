#pragma once

#include <json.hpp>

#include "cffedsr/aggregation.hpp"
#include "cffedsr/fedcore.hpp"

namespace cffedsr {

// Wire forms for everything that crosses the client/server boundary in the
// simulation; a client's raw interaction sequence is deliberately absent.

inline nlohmann::json to_json(const ClientUpdate& u) {
    return {{"client_id", u.client_id},
            {"n_k", u.n_k},
            {"p_k", u.p_k},
            {"embedding", u.embedding.data},
            {"rows", u.embedding.rows},
            {"cols", u.embedding.cols}};
}

inline nlohmann::json to_json(const EvalOutcome& o) {
    return {{"client_id", o.client_id}, {"rank", o.rank},     {"hr5", o.hr5},
            {"ndcg5", o.ndcg5},         {"hr10", o.hr10},     {"ndcg10", o.ndcg10}};
}

inline nlohmann::json to_json(const RoundReport& r) {
    nlohmann::json weights = nlohmann::json::object();
    for (const auto& [id, w] : r.weights) weights[std::to_string(id)] = w;
    return {{"round", r.round},
            {"no_op", r.no_op},
            {"participants", r.participants},
            {"weights", weights},
            {"mean_hr5", r.mean_hr5},
            {"mean_ndcg5", r.mean_ndcg5},
            {"mean_hr10", r.mean_hr10},
            {"mean_ndcg10", r.mean_ndcg10},
            {"fairness_variance", r.fairness_variance},
            {"bytes", r.bytes}};
}

inline nlohmann::json summary_json(const ExperimentResult& res) {
    nlohmann::json j;
    j["hr5"] = res.hr5;
    j["ndcg5"] = res.ndcg5;
    j["hr10"] = res.hr10;
    j["ndcg10"] = res.ndcg10;
    j["fairness_variance"] = res.fairness_variance;
    j["convergence_round"] =
        res.convergence_round ? nlohmann::json(*res.convergence_round) : nlohmann::json();
    j["rounds_executed"] = res.rounds_executed;
    j["total_bytes"] = res.total_bytes;
    j["val_hr10_history"] = res.val_hr10_history;
    nlohmann::json outcomes = nlohmann::json::array();
    for (const auto& o : res.client_outcomes) outcomes.push_back(to_json(o));
    j["client_outcomes"] = outcomes;
    return j;
}

}  // namespace cffedsr
