#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cffedsr/aggregation.hpp"
#include "cffedsr/dataio.hpp"
#include "cffedsr/metrics.hpp"
#include "cffedsr/seqmodel.hpp"

namespace cffedsr {

enum class Algorithm { cf_fedsr, fedavg, central, variation1, variation2, variation3 };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);

struct RunConfig {
    Algorithm algorithm = Algorithm::cf_fedsr;
    int clients_per_round = 128;
    int total_rounds = 200;
    int local_epochs = 1;
    double lr = 0.001;
    double dropout = 0.3;
    int dim = 32;  // embedding size d == hidden size
    int k = 5;     // cluster count
    int lambda1 = 20;
    int lambda2 = 10;
    int v1 = 3;
    int v2 = 10;
    double alpha = 0.5;
    double beta = 0.5;
    double gamma = 0.5;
    int ft_steps = 2;
    double ft_lr = 0.001;
    int patience = 5;
    int conv_patience = 5;
    int kmeans_max_iter = 50;
    int train_negatives = 100;
    bool literal_eq5_eq8 = false;
    bool interpolate_each_round = false;
    bool reset_optimizer_each_round = false;
    int full_eval_every = 0;  // 0 = evaluate participants only
    int threads = 1;
    int central_epochs = 0;  // 0 = derive from the federated budget
    std::uint64_t seed = 1;

    void validate() const;
};

struct ClientState {
    ClientDataset data;
    ModelParams model;  // embedding is overwritten by each broadcast
    OptimizerState opt;
    int rounds_elapsed = 0;
    int rounds_participated = 0;
    double last_p = 0.0;
};

struct ServerState {
    Matrix global_embedding;
    int round = 0;
    std::vector<double> val_hr10_history;
    std::uint64_t root_seed = 0;
};

struct RoundReport {
    int round = 0;
    bool no_op = false;
    std::vector<int> participants;
    AggregationWeights weights;
    double mean_hr5 = 0.0, mean_ndcg5 = 0.0, mean_hr10 = 0.0, mean_ndcg10 = 0.0;
    double fairness_variance = 0.0;  // over participant p_k
    long long bytes = 0;
};

struct ExperimentResult {
    std::vector<RoundReport> rounds;
    std::vector<double> val_hr10_history;
    std::vector<EvalOutcome> client_outcomes;  // final test evaluation
    double hr5 = 0.0, ndcg5 = 0.0, hr10 = 0.0, ndcg10 = 0.0;
    double fairness_variance = 0.0;  // over per-client test HR@10+NDCG@10
    std::optional<int> convergence_round;
    int rounds_executed = 0;
    long long total_bytes = 0;
};

// One federated round: eligibility filter, clustering-based (or uniform)
// sampling, broadcast, local training, validation, upload, aggregation.
RoundReport run_round(ServerState& server, std::vector<ClientState>& clients,
                      const RunConfig& cfg);

std::vector<ClientState> init_clients(const std::vector<ClientDataset>& data,
                                      const RunConfig& cfg, const Matrix& global_embedding);

ExperimentResult run_experiment(const RunConfig& cfg, const std::vector<ClientDataset>& data,
                                int num_items);

// Centralized baseline: all sequences pooled into one model, same
// optimizer and a comparable training budget, evaluated per client.
ExperimentResult run_central(const RunConfig& cfg, const std::vector<ClientDataset>& data,
                             int num_items);

}  // namespace cffedsr
