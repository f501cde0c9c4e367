#include "cffedsr/fedcore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "cffedsr/personalization.hpp"
#include "cffedsr/rng.hpp"
#include "cffedsr/selection.hpp"

namespace cffedsr {

namespace {

// seed-stream tags
constexpr std::uint64_t kGlobalInit = 0x01;
constexpr std::uint64_t kClientInit = 0x02;
constexpr std::uint64_t kTrain = 0x03;
constexpr std::uint64_t kKmeans = 0x04;
constexpr std::uint64_t kSample = 0x05;
constexpr std::uint64_t kFineTune = 0x06;

bool uses_selection(Algorithm a) {
    return a == Algorithm::cf_fedsr || a == Algorithm::variation2 || a == Algorithm::variation3;
}

bool uses_fair_aggregation(Algorithm a) {
    return a == Algorithm::cf_fedsr || a == Algorithm::variation1 || a == Algorithm::variation3;
}

bool uses_personalization(Algorithm a) {
    return a == Algorithm::cf_fedsr || a == Algorithm::variation1 || a == Algorithm::variation2;
}

std::vector<int> sample_negatives(int num_items, int target, int count, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, num_items - 2);
    std::vector<int> negs;
    negs.reserve(count);
    for (int i = 0; i < count; ++i) {
        int v = pick(rng);
        if (v >= target) ++v;
        negs.push_back(v);
    }
    return negs;
}

// One local epoch of next-item Adam training over the client's sequence.
void train_epoch(ModelParams& model, OptimizerState& opt, const ClientDataset& data,
                 const RunConfig& cfg, int round_index) {
    Rng rng(derive_seed(cfg.seed, kTrain, static_cast<std::uint64_t>(round_index),
                        static_cast<std::uint64_t>(data.client_id)));
    const auto& seq = data.train_sequence;
    for (std::size_t t = 1; t < seq.size(); ++t) {
        std::span<const int> prefix(seq.data(), t);
        const int target = seq[t];
        std::vector<int> negs = sample_negatives(model.num_items, target, cfg.train_negatives, rng);
        auto [loss, grads] = loss_and_grad(model, prefix, target, negs, cfg.dropout, rng());
        optimizer_step(model, grads, opt, cfg.lr, OptKind::adam);
    }
}

EvalOutcome evaluate(const ModelParams& model, int client_id, std::span<const int> sequence,
                     int target, const std::vector<int>& negatives) {
    std::vector<double> hidden = forward(model, sequence, 0.0, 0);
    std::vector<int> cands;
    cands.reserve(negatives.size() + 1);
    cands.push_back(target);
    cands.insert(cands.end(), negatives.begin(), negatives.end());
    std::vector<double> scores = score(model, hidden, cands);
    EvalOutcome out;
    out.client_id = client_id;
    out.rank = rank_of_target(scores, 0);
    std::tie(out.hr5, out.ndcg5) = hr_ndcg(out.rank, 5);
    std::tie(out.hr10, out.ndcg10) = hr_ndcg(out.rank, 10);
    return out;
}

EvalOutcome evaluate_validation(const ModelParams& model, const ClientDataset& d) {
    return evaluate(model, d.client_id, d.train_sequence, d.valid_target, d.valid_negatives);
}

EvalOutcome evaluate_test(const ModelParams& model, const ClientDataset& d, int max_len = 50) {
    std::vector<int> seq = d.train_sequence;
    seq.push_back(d.valid_target);
    if (max_len > 0 && static_cast<int>(seq.size()) > max_len)
        seq.erase(seq.begin(), seq.end() - max_len);
    return evaluate(model, d.client_id, seq, d.test_target, d.test_negatives);
}

template <typename F>
void parallel_for(int n, int threads, F&& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(threads, n);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "cf_fedsr") return Algorithm::cf_fedsr;
    if (s == "fedavg") return Algorithm::fedavg;
    if (s == "central") return Algorithm::central;
    if (s == "variation1") return Algorithm::variation1;
    if (s == "variation2") return Algorithm::variation2;
    if (s == "variation3") return Algorithm::variation3;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::cf_fedsr: return "cf_fedsr";
        case Algorithm::fedavg: return "fedavg";
        case Algorithm::central: return "central";
        case Algorithm::variation1: return "variation1";
        case Algorithm::variation2: return "variation2";
        case Algorithm::variation3: return "variation3";
    }
    return "?";
}

void RunConfig::validate() const {
    if (clients_per_round < 1 || total_rounds < 0 || local_epochs < 1 || dim < 1 || k < 1)
        throw std::invalid_argument("config: counts must be positive");
    if (lr <= 0.0 || ft_lr < 0.0) throw std::invalid_argument("config: bad learning rate");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("config: bad dropout");
    if (v1 < 1 || v2 <= v1) throw std::invalid_argument("config: need v2 > v1 >= 1");
    if (alpha < 0.0 || beta < 0.0 || alpha + beta <= 0.0)
        throw std::invalid_argument("config: need alpha, beta >= 0, alpha+beta > 0");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma in [0,1]");
    if (patience < 1 || conv_patience < 1 || threads < 1)
        throw std::invalid_argument("config: bad patience/threads");
}

std::vector<ClientState> init_clients(const std::vector<ClientDataset>& data,
                                      const RunConfig& cfg, const Matrix& global_embedding) {
    std::vector<ClientState> clients;
    clients.reserve(data.size());
    for (const auto& d : data) {
        ClientState c;
        c.data = d;
        c.model = make_params(static_cast<int>(global_embedding.rows), cfg.dim,
                              derive_seed(cfg.seed, kClientInit,
                                          static_cast<std::uint64_t>(d.client_id)));
        c.model.embedding = global_embedding;
        c.opt = OptimizerState(c.model);
        clients.push_back(std::move(c));
    }
    return clients;
}

RoundReport run_round(ServerState& server, std::vector<ClientState>& clients,
                      const RunConfig& cfg) {
    RoundReport report;
    report.round = server.round;

    // 1. eligibility
    std::vector<int> eligible_idx;
    for (int i = 0; i < static_cast<int>(clients.size()); ++i) {
        const auto& c = clients[i];
        if (!uses_selection(cfg.algorithm) ||
            eligible(c.data.n_k, c.rounds_elapsed, cfg.lambda1, cfg.lambda2))
            eligible_idx.push_back(i);
    }

    for (auto& c : clients) ++c.rounds_elapsed;
    ++server.round;

    if (eligible_idx.empty()) {
        report.no_op = true;
        return report;
    }

    // 2. sampling
    std::vector<int> chosen_ids;
    if (uses_selection(cfg.algorithm)) {
        std::vector<std::vector<double>> reps;
        std::vector<int> ids;
        reps.reserve(eligible_idx.size());
        for (int i : eligible_idx) {
            reps.push_back(represent(clients[i].data.train_sequence, server.global_embedding,
                                     cfg.v1, cfg.v2));
            ids.push_back(clients[i].data.client_id);
        }
        const int k = std::min<int>(cfg.k, static_cast<int>(reps.size()));
        Clustering clu = kmeans(reps, k, cfg.kmeans_max_iter,
                                derive_seed(cfg.seed, kKmeans,
                                            static_cast<std::uint64_t>(report.round)));
        chosen_ids = proportional_sample(clu, ids, cfg.clients_per_round,
                                         derive_seed(cfg.seed, kSample,
                                                     static_cast<std::uint64_t>(report.round)));
    } else {
        std::vector<int> ids;
        for (int i : eligible_idx) ids.push_back(clients[i].data.client_id);
        if (static_cast<int>(ids.size()) > cfg.clients_per_round) {
            Rng rng(derive_seed(cfg.seed, kSample, static_cast<std::uint64_t>(report.round)));
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(cfg.clients_per_round);
        }
        std::sort(ids.begin(), ids.end());
        chosen_ids = std::move(ids);
    }

    std::vector<int> chosen_idx;
    {
        std::map<int, int> id_to_idx;
        for (int i = 0; i < static_cast<int>(clients.size()); ++i)
            id_to_idx[clients[i].data.client_id] = i;
        for (int id : chosen_ids) chosen_idx.push_back(id_to_idx.at(id));
    }

    // 3-5. broadcast, local training, validation, upload
    const int m = static_cast<int>(chosen_idx.size());
    std::vector<ClientUpdate> updates(m);
    std::vector<EvalOutcome> outcomes(m);
    parallel_for(m, cfg.threads, [&](int j) {
        ClientState& c = clients[chosen_idx[j]];
        c.model.embedding = server.global_embedding;
        if (cfg.reset_optimizer_each_round) c.opt = OptimizerState(c.model);
        for (int e = 0; e < cfg.local_epochs; ++e)
            train_epoch(c.model, c.opt, c.data, cfg, report.round * cfg.local_epochs + e);
        outcomes[j] = evaluate_validation(c.model, c.data);
        c.last_p = outcomes[j].hr10 + outcomes[j].ndcg10;
        ++c.rounds_participated;
        updates[j] = ClientUpdate{c.data.client_id, c.model.embedding, std::max<long long>(1, c.data.n_k),
                                  c.last_p};
    });

    // 6. aggregation
    report.weights = uses_fair_aggregation(cfg.algorithm)
                         ? fairness_weights(updates, cfg.alpha, cfg.beta, cfg.literal_eq5_eq8)
                         : fedavg_weights(updates);
    server.global_embedding = aggregate(updates, report.weights);

    if (cfg.interpolate_each_round && uses_personalization(cfg.algorithm)) {
        for (int j = 0; j < m; ++j) {
            ClientState& c = clients[chosen_idx[j]];
            c.model = interpolate(c.model, server.global_embedding, cfg.gamma);
        }
    }

    // 7. report
    report.participants = chosen_ids;
    std::vector<double> ps;
    for (int j = 0; j < m; ++j) {
        report.mean_hr5 += outcomes[j].hr5;
        report.mean_ndcg5 += outcomes[j].ndcg5;
        report.mean_hr10 += outcomes[j].hr10;
        report.mean_ndcg10 += outcomes[j].ndcg10;
        ps.push_back(updates[j].p_k);
    }
    report.mean_hr5 /= m;
    report.mean_ndcg5 /= m;
    report.mean_hr10 /= m;
    report.mean_ndcg10 /= m;
    report.fairness_variance = fairness_variance(ps);
    report.bytes = round_bytes(
        m, static_cast<long long>(server.global_embedding.rows) * server.global_embedding.cols);
    return report;
}

namespace {

ExperimentResult finalize(const RunConfig& cfg, const std::vector<ClientState>& clients,
                          const Matrix& global_embedding, ExperimentResult result) {
    const int n = static_cast<int>(clients.size());
    result.client_outcomes.resize(n);
    const bool personalize = uses_personalization(cfg.algorithm);
    std::vector<const ClientState*> ptr(n);
    for (int i = 0; i < n; ++i) ptr[i] = &clients[i];
    std::vector<EvalOutcome> outs(n);
    parallel_for(n, cfg.threads, [&](int i) {
        const ClientState& c = *ptr[i];
        ModelParams model = c.model;
        model.embedding = global_embedding;
        if (personalize) {
            model = fine_tune(model, global_embedding, c.data.train_sequence, cfg.ft_lr,
                              cfg.ft_steps, cfg.train_negatives,
                              derive_seed(cfg.seed, kFineTune,
                                          static_cast<std::uint64_t>(c.data.client_id)));
            model = interpolate(model, global_embedding, cfg.gamma);
        }
        outs[i] = evaluate_test(model, c.data);
    });
    std::vector<double> ps;
    for (int i = 0; i < n; ++i) {
        const auto& o = outs[i];
        result.client_outcomes[i] = o;
        result.hr5 += o.hr5;
        result.ndcg5 += o.ndcg5;
        result.hr10 += o.hr10;
        result.ndcg10 += o.ndcg10;
        ps.push_back(o.hr10 + o.ndcg10);
    }
    result.hr5 /= n;
    result.ndcg5 /= n;
    result.hr10 /= n;
    result.ndcg10 /= n;
    result.fairness_variance = fairness_variance(ps);
    result.convergence_round = convergence_round(result.val_hr10_history, cfg.conv_patience, 0.0);
    return result;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, const std::vector<ClientDataset>& data,
                                int num_items) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("run_experiment: no clients");
    if (cfg.algorithm == Algorithm::central) return run_central(cfg, data, num_items);

    ServerState server;
    server.root_seed = cfg.seed;
    server.global_embedding =
        make_params(num_items, cfg.dim, derive_seed(cfg.seed, kGlobalInit)).embedding;
    std::vector<ClientState> clients = init_clients(data, cfg, server.global_embedding);

    ExperimentResult result;
    double best = -1.0;
    int since_best = 0;
    for (int r = 0; r < cfg.total_rounds; ++r) {
        RoundReport rep = run_round(server, clients, cfg);
        double val = rep.no_op ? 0.0 : rep.mean_hr10;
        if (cfg.full_eval_every > 0 && r % cfg.full_eval_every == 0) {
            double sum = 0.0;
            for (const auto& c : clients) {
                ModelParams m = c.model;
                m.embedding = server.global_embedding;
                sum += evaluate_validation(m, c.data).hr10;
            }
            val = sum / static_cast<double>(clients.size());
        }
        result.val_hr10_history.push_back(val);
        result.total_bytes += rep.bytes;
        result.rounds.push_back(std::move(rep));
        ++result.rounds_executed;
        if (val > best) {
            best = val;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return finalize(cfg, clients, server.global_embedding, std::move(result));
}

ExperimentResult run_central(const RunConfig& cfg, const std::vector<ClientDataset>& data,
                             int num_items) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("run_central: no clients");
    const int n = static_cast<int>(data.size());

    ModelParams model = make_params(num_items, cfg.dim,
                                    derive_seed(cfg.seed, kClientInit,
                                                static_cast<std::uint64_t>(data[0].client_id)));
    model.embedding =
        make_params(num_items, cfg.dim, derive_seed(cfg.seed, kGlobalInit)).embedding;
    OptimizerState opt(model);

    int epochs = cfg.central_epochs;
    if (epochs <= 0)
        epochs = std::max(1, static_cast<int>(std::lround(
                                 static_cast<double>(cfg.total_rounds) * cfg.clients_per_round /
                                 std::max(1, n))));

    ExperimentResult result;
    double best = -1.0;
    int since_best = 0;
    for (int e = 0; e < epochs; ++e) {
        for (const auto& d : data) train_epoch(model, opt, d, cfg, e);
        double sum = 0.0;
        for (const auto& d : data) sum += evaluate_validation(model, d).hr10;
        const double val = sum / n;
        result.val_hr10_history.push_back(val);
        ++result.rounds_executed;
        if (val > best) {
            best = val;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    result.client_outcomes.resize(n);
    std::vector<double> ps;
    for (int i = 0; i < n; ++i) {
        EvalOutcome o = evaluate_test(model, data[i]);
        result.client_outcomes[i] = o;
        result.hr5 += o.hr5;
        result.ndcg5 += o.ndcg5;
        result.hr10 += o.hr10;
        result.ndcg10 += o.ndcg10;
        ps.push_back(o.hr10 + o.ndcg10);
    }
    result.hr5 /= n;
    result.ndcg5 /= n;
    result.hr10 /= n;
    result.ndcg10 /= n;
    result.fairness_variance = fairness_variance(ps);
    result.convergence_round = convergence_round(result.val_hr10_history, cfg.conv_patience, 0.0);
    return result;
}

}  // namespace cffedsr
