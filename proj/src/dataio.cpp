#include "cffedsr/dataio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "cffedsr/rng.hpp"

namespace cffedsr {

namespace {

bool parse_ll(const std::string& s, long long& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

}  // namespace

InteractionLog load_interactions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    InteractionLog log;
    std::unordered_map<std::string, int> user_ids, item_ids;
    std::string line;
    int lineno = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string u, i, t;
        if (!std::getline(ss, u, ',') || !std::getline(ss, i, ',') || !std::getline(ss, t)) {
            // a non-numeric first line is treated as a header
            if (lineno == 1) continue;
            throw ParseError(lineno, "expected user,item,timestamp");
        }
        long long ts;
        if (!parse_ll(t, ts)) {
            if (lineno == 1) continue;  // header with three columns
            throw ParseError(lineno, "bad timestamp '" + t + "'");
        }
        auto [uit, unew] = user_ids.try_emplace(u, static_cast<int>(user_ids.size()));
        auto [iit, inew] = item_ids.try_emplace(i, static_cast<int>(item_ids.size()));
        log.records.push_back({uit->second, iit->second, ts});
        any = true;
    }
    if (!any) throw std::runtime_error(path + ": no interaction records");
    log.num_users = static_cast<int>(user_ids.size());
    log.num_items = static_cast<int>(item_ids.size());
    return log;
}

void save_interactions(const InteractionLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& r : log.records)
        out << r.user << ',' << r.item << ',' << r.timestamp << '\n';
}

std::vector<ClientDataset> build_clients(const InteractionLog& log, int min_len,
                                         std::uint64_t seed, int max_train_len) {
    if (min_len < 3) throw std::invalid_argument("build_clients: min_len must be >= 3");
    if (log.num_items <= 101)
        throw std::invalid_argument("build_clients: need more than 101 items to sample negatives");

    std::vector<std::vector<std::pair<long long, int>>> per_user(log.num_users);
    for (const auto& r : log.records) per_user[r.user].push_back({r.timestamp, r.item});

    std::vector<ClientDataset> out;
    for (int u = 0; u < log.num_users; ++u) {
        auto& hist = per_user[u];
        if (static_cast<int>(hist.size()) < min_len) continue;
        // timestamp ties break by file order
        std::stable_sort(hist.begin(), hist.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        ClientDataset c;
        c.client_id = u;
        const std::size_t n = hist.size();
        for (std::size_t i = 0; i + 2 < n; ++i) c.train_sequence.push_back(hist[i].second);
        c.valid_target = hist[n - 2].second;
        c.test_target = hist[n - 1].second;
        if (max_train_len > 0 && static_cast<int>(c.train_sequence.size()) > max_train_len)
            c.train_sequence.erase(c.train_sequence.begin(),
                                   c.train_sequence.end() - max_train_len);
        c.n_k = static_cast<long long>(c.train_sequence.size());

        std::unordered_set<int> touched;
        for (const auto& [ts, it] : hist) touched.insert(it);
        std::vector<int> pool;
        pool.reserve(log.num_items - touched.size());
        for (int it = 0; it < log.num_items; ++it)
            if (!touched.count(it)) pool.push_back(it);
        if (pool.size() < 100)
            throw std::invalid_argument("build_clients: not enough non-interacted items for user " +
                                        std::to_string(u));
        Rng vrng(derive_seed(seed, static_cast<std::uint64_t>(u), 0));
        std::shuffle(pool.begin(), pool.end(), vrng);
        c.valid_negatives.assign(pool.begin(), pool.begin() + 100);
        Rng trng(derive_seed(seed, static_cast<std::uint64_t>(u), 1));
        std::shuffle(pool.begin(), pool.end(), trng);
        c.test_negatives.assign(pool.begin(), pool.begin() + 100);
        out.push_back(std::move(c));
    }
    return out;
}

InteractionLog generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.num_items <= 101)
        throw std::invalid_argument("generate_synthetic: num_items must exceed 101");
    if (cfg.num_clusters < 1) throw std::invalid_argument("generate_synthetic: num_clusters >= 1");
    if (cfg.seq_len_min < 3 || cfg.seq_len_max < cfg.seq_len_min)
        throw std::invalid_argument("generate_synthetic: degenerate length range");
    if (cfg.noise < 0.0 || cfg.noise > 1.0)
        throw std::invalid_argument("generate_synthetic: noise must be in [0,1]");

    Rng setup(derive_seed(cfg.seed, 0xC0FFEE));
    // disjoint preferred item blocks per cluster
    const int block = cfg.num_items / cfg.num_clusters;
    // per cluster and preferred item: a few likely successors
    std::vector<std::vector<std::array<int, 3>>> succ(cfg.num_clusters);
    for (int c = 0; c < cfg.num_clusters; ++c) {
        const int lo = c * block;
        std::uniform_int_distribution<int> pick(lo, lo + block - 1);
        succ[c].resize(block);
        for (int i = 0; i < block; ++i)
            for (int s = 0; s < 3; ++s) succ[c][i][s] = pick(setup);
    }

    InteractionLog log;
    log.num_users = cfg.num_clients;
    log.num_items = cfg.num_items;
    const double log_lo = std::log(static_cast<double>(cfg.seq_len_min));

    for (int u = 0; u < cfg.num_clients; ++u) {
        Rng rng(derive_seed(cfg.seed, 1, static_cast<std::uint64_t>(u)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const int cluster = u % cfg.num_clusters;
        const int lo = cluster * block;
        std::uniform_int_distribution<int> pref(lo, lo + block - 1);
        std::uniform_int_distribution<int> any_item(0, cfg.num_items - 1);
        std::uniform_int_distribution<int> which(0, 2);

        // sequence length correlates with the cluster: later clusters draw from a
        // wider log-uniform range, so data volume is unevenly distributed across
        // the latent groups as well as across individual clients
        const double hi_c = cfg.seq_len_min + (cfg.seq_len_max - cfg.seq_len_min) *
                                                  (cfg.num_clusters + cluster + 1.0) /
                                                  (2.0 * cfg.num_clusters);
        const double log_hi = std::log(hi_c);
        const int len = std::max(
            cfg.seq_len_min,
            std::min(cfg.seq_len_max,
                     static_cast<int>(std::lround(std::exp(log_lo + (log_hi - log_lo) * unif(rng))))));

        int cur = pref(rng);
        for (int t = 0; t < len; ++t) {
            int item;
            if (t == 0) {
                item = (unif(rng) < cfg.noise) ? any_item(rng) : cur;
            } else if (unif(rng) < cfg.noise) {
                item = any_item(rng);
            } else {
                item = succ[cluster][cur - lo][which(rng)];
            }
            log.records.push_back({u, item, static_cast<long long>(t)});
            if (item >= lo && item < lo + block) cur = item;
        }
    }
    return log;
}

}  // namespace cffedsr
