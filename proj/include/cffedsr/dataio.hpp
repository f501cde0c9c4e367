#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cffedsr {

struct Interaction {
    int user;
    int item;
    long long timestamp;
};

struct InteractionLog {
    std::vector<Interaction> records;
    int num_users = 0;
    int num_items = 0;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Leave-one-out split for one user: last interaction is the test target,
// second-to-last the validation target, the rest the training sequence.
struct ClientDataset {
    int client_id = 0;
    std::vector<int> train_sequence;  // chronological
    int valid_target = 0;
    int test_target = 0;
    std::vector<int> valid_negatives;  // 100 ids, never interacted
    std::vector<int> test_negatives;   // 100 ids, never interacted
    long long n_k = 0;                 // == train_sequence.size()
};

// CSV `user,item,timestamp`, optional header line. Ids are re-indexed
// densely in order of first appearance.
InteractionLog load_interactions(const std::string& path);

void save_interactions(const InteractionLog& log, const std::string& path);

// One client per user with >= min_len interactions; users below the
// threshold are dropped. Negatives are drawn uniformly without replacement
// from items the user never touched, seeded per (seed, user).
// max_train_len truncates the training sequence to its most recent items.
std::vector<ClientDataset> build_clients(const InteractionLog& log, int min_len,
                                         std::uint64_t seed, int max_train_len = 50);

struct SyntheticConfig {
    int num_clients = 200;
    int num_items = 500;
    int num_clusters = 4;
    int seq_len_min = 5;
    int seq_len_max = 80;
    double noise = 0.2;
    std::uint64_t seed = 1;
};

// Clients belong to latent interest clusters, each with a Markov chain over
// a preferred item subset. Sequence lengths are log-uniform in the given
// range, which produces the data-size heterogeneity the fairness mechanism
// targets.
InteractionLog generate_synthetic(const SyntheticConfig& cfg);

}  // namespace cffedsr
