#include <doctest.h>

#include <algorithm>
#include <set>

#include "cffedsr/fedcore.hpp"
#include "cffedsr/personalization.hpp"
#include "cffedsr/rng.hpp"
#include "cffedsr/selection.hpp"
#include "cffedsr/serialize.hpp"

using namespace cffedsr;

namespace {

std::vector<ClientDataset> toy_clients(int n, int num_items, std::uint64_t seed,
                                       int min_len = 4, int max_len = 12) {
    SyntheticConfig s;
    s.num_clients = n;
    s.num_items = num_items;
    s.num_clusters = 2;
    s.seq_len_min = min_len;
    s.seq_len_max = max_len;
    s.seed = seed;
    return build_clients(generate_synthetic(s), 3, seed);
}

RunConfig toy_config() {
    RunConfig c;
    c.clients_per_round = 4;
    c.total_rounds = 3;
    c.dim = 6;
    c.k = 2;
    c.lambda1 = 2;
    c.lambda2 = 2;
    c.train_negatives = 20;
    c.dropout = 0.0;
    c.seed = 5;
    return c;
}

}  // namespace

TEST_CASE("run_round: single participant replaces the global embedding with its upload") {
    auto data = toy_clients(1, 150, 1);
    REQUIRE(data.size() == 1);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::fedavg;
    cfg.clients_per_round = 1;

    ServerState server;
    server.global_embedding = make_params(150, cfg.dim, 1).embedding;
    auto clients = init_clients(data, cfg, server.global_embedding);
    RoundReport rep = run_round(server, clients, cfg);
    REQUIRE(rep.participants.size() == 1);
    CHECK(rep.weights.at(rep.participants[0]) == doctest::Approx(1.0));
    CHECK(server.global_embedding.data == clients[0].model.embedding.data);
}

TEST_CASE("run_round: fedavg with equal n_k is the plain mean of uploads") {
    auto data = toy_clients(6, 150, 3, 6, 6);  // equal lengths -> equal n_k
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::fedavg;
    cfg.clients_per_round = 6;

    ServerState server;
    server.global_embedding = make_params(150, cfg.dim, 9).embedding;
    auto clients = init_clients(data, cfg, server.global_embedding);
    RoundReport rep = run_round(server, clients, cfg);
    const int m = static_cast<int>(rep.participants.size());
    REQUIRE(m >= 2);
    Matrix mean(server.global_embedding.rows, server.global_embedding.cols);
    for (const auto& c : clients)
        if (std::count(rep.participants.begin(), rep.participants.end(), c.data.client_id))
            axpy(mean, c.model.embedding, 1.0 / m);
    for (std::size_t i = 0; i < mean.data.size(); ++i)
        CHECK(server.global_embedding.data[i] == doctest::Approx(mean.data[i]).epsilon(1e-12));
}

TEST_CASE("run_round: equals a hand-scripted composition of the module operations") {
    auto data = toy_clients(5, 150, 11);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::cf_fedsr;
    cfg.clients_per_round = 3;
    cfg.lambda1 = 1;  // everyone eligible via data size

    ServerState server;
    server.root_seed = cfg.seed;
    server.global_embedding = make_params(150, cfg.dim, 21).embedding;
    auto clients = init_clients(data, cfg, server.global_embedding);
    auto script_clients = init_clients(data, cfg, server.global_embedding);
    Matrix global_before = server.global_embedding;

    RoundReport rep = run_round(server, clients, cfg);

    // script the same round from the public pieces
    std::vector<std::vector<double>> reps;
    std::vector<int> ids;
    for (auto& c : script_clients) {
        reps.push_back(represent(c.data.train_sequence, global_before, cfg.v1, cfg.v2));
        ids.push_back(c.data.client_id);
    }
    Clustering clu = kmeans(reps, std::min<int>(cfg.k, reps.size()), cfg.kmeans_max_iter,
                            derive_seed(cfg.seed, 0x04, 0));
    std::vector<int> chosen = proportional_sample(clu, ids, cfg.clients_per_round,
                                                  derive_seed(cfg.seed, 0x05, 0));
    CHECK(chosen == rep.participants);

    std::vector<ClientUpdate> ups;
    for (int id : chosen) {
        auto& c = *std::find_if(script_clients.begin(), script_clients.end(),
                                [&](const ClientState& s) { return s.data.client_id == id; });
        c.model.embedding = global_before;
        // replay local training exactly as the engine seeds it
        Rng rng(derive_seed(cfg.seed, 0x03, 0, static_cast<std::uint64_t>(id)));
        const auto& seq = c.data.train_sequence;
        for (std::size_t t = 1; t < seq.size(); ++t) {
            std::uniform_int_distribution<int> pick(0, 150 - 2);
            std::vector<int> negs;
            for (int i = 0; i < cfg.train_negatives; ++i) {
                int v = pick(rng);
                if (v >= seq[t]) ++v;
                negs.push_back(v);
            }
            std::span<const int> prefix(seq.data(), t);
            auto [loss, grads] = loss_and_grad(c.model, prefix, seq[t], negs, cfg.dropout, rng());
            optimizer_step(c.model, grads, c.opt, cfg.lr, OptKind::adam);
        }
        std::vector<double> h = forward(c.model, c.data.train_sequence, 0.0, 0);
        std::vector<int> cands{c.data.valid_target};
        cands.insert(cands.end(), c.data.valid_negatives.begin(), c.data.valid_negatives.end());
        const int rank = rank_of_target(score(c.model, h, cands), 0);
        auto [hr, ndcg] = hr_ndcg(rank, 10);
        ups.push_back({id, c.model.embedding, c.data.n_k, hr + ndcg});
    }
    AggregationWeights w = fairness_weights(ups, cfg.alpha, cfg.beta);
    Matrix agg = aggregate(ups, w);
    CHECK(agg.data == server.global_embedding.data);
    for (const auto& [id, wt] : w) CHECK(rep.weights.at(id) == doctest::Approx(wt).epsilon(1e-15));
}

TEST_CASE("run_round: no eligible clients is a warned no-op") {
    auto data = toy_clients(4, 150, 2, 4, 6);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::cf_fedsr;
    cfg.lambda1 = 1000;  // nobody has this much data
    cfg.lambda2 = 50;    // warm-up not elapsed
    ServerState server;
    server.global_embedding = make_params(150, cfg.dim, 1).embedding;
    auto clients = init_clients(data, cfg, server.global_embedding);
    RoundReport rep = run_round(server, clients, cfg);
    CHECK(rep.no_op);
    CHECK(rep.participants.empty());
    for (const auto& c : clients) CHECK(c.rounds_elapsed == 1);
}

TEST_CASE("run_experiment: zero rounds evaluates the untrained model") {
    auto data = toy_clients(5, 150, 4);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::variation3;  // no personalization
    cfg.total_rounds = 0;
    ExperimentResult res = run_experiment(cfg, data, 150);
    CHECK(res.rounds_executed == 0);
    CHECK(res.rounds.empty());
    CHECK(res.client_outcomes.size() == data.size());
    CHECK(res.total_bytes == 0);
}

TEST_CASE("run_experiment: deterministic, also under intra-round parallelism") {
    auto data = toy_clients(8, 150, 6);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::cf_fedsr;
    cfg.total_rounds = 4;
    ExperimentResult a = run_experiment(cfg, data, 150);
    ExperimentResult b = run_experiment(cfg, data, 150);
    RunConfig par = cfg;
    par.threads = 3;
    ExperimentResult c = run_experiment(par, data, 150);
    CHECK(a.hr10 == b.hr10);
    CHECK(a.val_hr10_history == b.val_hr10_history);
    CHECK(a.fairness_variance == b.fairness_variance);
    CHECK(a.hr10 == c.hr10);
    CHECK(a.val_hr10_history == c.val_hr10_history);
    CHECK(a.fairness_variance == c.fairness_variance);
    for (std::size_t i = 0; i < a.client_outcomes.size(); ++i)
        CHECK(a.client_outcomes[i].rank == c.client_outcomes[i].rank);
}

TEST_CASE("run_experiment: variation2 weights equal fedavg while sampling follows cf_fedsr") {
    auto data = toy_clients(8, 150, 7);
    RunConfig cfg = toy_config();
    cfg.total_rounds = 3;
    cfg.lambda1 = 1;

    cfg.algorithm = Algorithm::variation2;
    ExperimentResult v2 = run_experiment(cfg, data, 150);
    cfg.algorithm = Algorithm::cf_fedsr;
    ExperimentResult full = run_experiment(cfg, data, 150);

    REQUIRE(!v2.rounds.empty());
    for (std::size_t r = 0; r < v2.rounds.size(); ++r) {
        // same selection path (same seeds) -> same participants
        CHECK(v2.rounds[r].participants == full.rounds[r].participants);
        // fedavg weights: proportional to n_k
        const auto& rep = v2.rounds[r];
        double total = 0;
        std::map<int, long long> nk;
        for (const auto& c : data)
            nk[c.client_id] = c.n_k;
        for (int id : rep.participants) total += static_cast<double>(nk[id]);
        for (int id : rep.participants)
            CHECK(rep.weights.at(id) == doctest::Approx(nk[id] / total).epsilon(1e-12));
    }
}

TEST_CASE("run_experiment: participation cap and byte accounting") {
    auto data = toy_clients(10, 150, 8);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::cf_fedsr;
    cfg.clients_per_round = 3;
    cfg.total_rounds = 4;
    cfg.lambda1 = 1;
    ExperimentResult res = run_experiment(cfg, data, 150);
    long long cum = 0;
    for (const auto& r : res.rounds) {
        CHECK(static_cast<int>(r.participants.size()) <= cfg.clients_per_round);
        if (!r.no_op) {
            CHECK(r.bytes ==
                  round_bytes(static_cast<int>(r.participants.size()), 150LL * cfg.dim));
            CHECK(r.bytes > 0);
        }
        cum += r.bytes;
    }
    CHECK(res.total_bytes == cum);
}

TEST_CASE("privacy: serialized cross-boundary messages carry no raw sequences") {
    auto data = toy_clients(6, 150, 9);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::cf_fedsr;
    cfg.lambda1 = 1;
    ServerState server;
    server.global_embedding = make_params(150, cfg.dim, 2).embedding;
    auto clients = init_clients(data, cfg, server.global_embedding);
    for (int r = 0; r < 3; ++r) {
        RoundReport rep = run_round(server, clients, cfg);
        const std::string wire = to_json(rep).dump();
        for (const auto& c : data) {
            if (c.train_sequence.size() < 2) continue;
            std::string joined;
            for (int it : c.train_sequence) joined += std::to_string(it) + ",";
            joined.pop_back();
            CHECK(wire.find(joined) == std::string::npos);
        }
        CHECK(wire.find("sequence") == std::string::npos);
    }
}

TEST_CASE("run_central: single-client degeneracy matches fedavg") {
    auto data = toy_clients(1, 150, 10);
    REQUIRE(data.size() == 1);
    RunConfig cfg = toy_config();
    cfg.clients_per_round = 1;
    cfg.total_rounds = 3;
    cfg.patience = 100;  // disable early stop for the comparison

    cfg.algorithm = Algorithm::fedavg;
    ExperimentResult fed = run_experiment(cfg, data, 150);
    cfg.algorithm = Algorithm::central;
    ExperimentResult cen = run_central(cfg, data, 150);
    REQUIRE(fed.rounds_executed == cen.rounds_executed);
    CHECK(fed.val_hr10_history == cen.val_hr10_history);
    CHECK(fed.hr10 == cen.hr10);
    CHECK(fed.client_outcomes[0].rank == cen.client_outcomes[0].rank);
}

TEST_CASE("run_central: deterministic") {
    auto data = toy_clients(5, 150, 12);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::central;
    cfg.central_epochs = 2;
    ExperimentResult a = run_central(cfg, data, 150);
    ExperimentResult b = run_central(cfg, data, 150);
    CHECK(a.hr10 == b.hr10);
    CHECK(a.val_hr10_history == b.val_hr10_history);
}

TEST_CASE("aggregated embedding stays in the convex hull of the uploads") {
    auto data = toy_clients(5, 150, 13);
    RunConfig cfg = toy_config();
    cfg.algorithm = Algorithm::cf_fedsr;
    cfg.lambda1 = 1;
    cfg.clients_per_round = 3;
    ServerState server;
    server.global_embedding = make_params(150, cfg.dim, 3).embedding;
    auto clients = init_clients(data, cfg, server.global_embedding);
    RoundReport rep = run_round(server, clients, cfg);
    REQUIRE(!rep.participants.empty());
    std::vector<const Matrix*> ups;
    for (const auto& c : clients)
        if (std::count(rep.participants.begin(), rep.participants.end(), c.data.client_id))
            ups.push_back(&c.model.embedding);
    for (std::size_t i = 0; i < server.global_embedding.data.size(); ++i) {
        double lo = 1e300, hi = -1e300;
        for (const Matrix* m : ups) {
            lo = std::min(lo, m->data[i]);
            hi = std::max(hi, m->data[i]);
        }
        CHECK(server.global_embedding.data[i] >= lo - 1e-12);
        CHECK(server.global_embedding.data[i] <= hi + 1e-12);
    }
}
