// Python bindings for the main operations: weighting, ranking metrics,
// plateau detection, byte accounting, and whole-experiment runs.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cffedsr/aggregation.hpp"
#include "cffedsr/config.hpp"
#include "cffedsr/dataio.hpp"
#include "cffedsr/fedcore.hpp"
#include "cffedsr/metrics.hpp"
#include "cffedsr/serialize.hpp"

namespace py = pybind11;
using namespace cffedsr;

namespace {

std::vector<ClientUpdate> make_updates(const std::vector<double>& p,
                                       const std::vector<long long>& n) {
    if (p.size() != n.size() || p.empty())
        throw std::invalid_argument("p and n must be non-empty and the same length");
    std::vector<ClientUpdate> ups(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        ups[i].client_id = static_cast<int>(i);
        ups[i].p_k = p[i];
        ups[i].n_k = n[i];
        ups[i].embedding = Matrix(1, 1);
    }
    return ups;
}

std::vector<double> flatten(const AggregationWeights& w) {
    std::vector<double> out;
    out.reserve(w.size());
    for (const auto& [id, v] : w) out.push_back(v);
    return out;
}

// One full experiment from a {key: value} override dict; returns the final
// summary as a JSON string (parsed back into a dict on the Python side).
std::string run_json(const py::dict& overrides) {
    AppConfig cfg;
    for (const auto& item : overrides) {
        const std::string key = py::str(item.first);
        const std::string value = py::str(item.second);
        apply_override(cfg, key, value);
    }
    cfg.run.validate();

    InteractionLog log = cfg.dataset_path.empty() ? generate_synthetic(cfg.syn)
                                                  : load_interactions(cfg.dataset_path);
    std::vector<ClientDataset> data =
        build_clients(log, cfg.min_len, cfg.syn.seed, cfg.max_train_len);

    ExperimentResult res;
    {
        py::gil_scoped_release release;
        res = cfg.run.algorithm == Algorithm::central
                  ? run_central(cfg.run, data, log.num_items)
                  : run_experiment(cfg.run, data, log.num_items);
    }
    nlohmann::json j = summary_json(res);
    j["algorithm"] = to_string(cfg.run.algorithm);
    j["num_clients"] = data.size();
    j["num_items"] = log.num_items;
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_cffedsr, m) {
    m.doc() = "Federated sequential-recommendation simulator (C++ core)";

    m.def(
        "fairness_weights",
        [](const std::vector<double>& p, const std::vector<long long>& n, double alpha,
           double beta, bool literal_eq5_eq8) {
            return flatten(fairness_weights(make_updates(p, n), alpha, beta, literal_eq5_eq8));
        },
        py::arg("p"), py::arg("n"), py::arg("alpha"), py::arg("beta"),
        py::arg("literal_eq5_eq8") = false,
        "Fairness-aware aggregation weights for per-client scores p and sizes n.");

    m.def(
        "fedavg_weights",
        [](const std::vector<long long>& n) {
            return flatten(fedavg_weights(make_updates(std::vector<double>(n.size(), 0.0), n)));
        },
        py::arg("n"), "Sample-count-proportional aggregation weights.");

    m.def(
        "rank_of_target",
        [](const std::vector<double>& scores, int target_index) {
            if (target_index < 0 || target_index >= static_cast<int>(scores.size()))
                throw std::out_of_range("target_index out of range");
            return rank_of_target(scores, target_index);
        },
        py::arg("scores"), py::arg("target_index"),
        "Pessimistic 1-based rank of the target among the scored candidates.");

    m.def("hr_ndcg", &hr_ndcg, py::arg("rank"), py::arg("k"),
          "(HR@K, NDCG@K) for a 1-based rank.");

    m.def(
        "fairness_variance",
        [](const std::vector<double>& scores) {
            if (scores.empty()) throw std::invalid_argument("scores must be non-empty");
            return fairness_variance(scores);
        },
        py::arg("scores"), "Population variance of per-client scores.");

    m.def(
        "convergence_round",
        [](const std::vector<double>& history, int patience, double tol) {
            return convergence_round(history, patience, tol);
        },
        py::arg("history"), py::arg("patience") = 5, py::arg("tol") = 0.0,
        "First round whose best value is not beaten within the patience window; "
        "None if the series ends first.");

    m.def("round_bytes", &round_bytes, py::arg("participants"), py::arg("embedding_entries"),
          "Bytes crossing the boundary in one round.");

    m.def("_run_json", &run_json, py::arg("overrides"),
          "Run one experiment from a config-override dict; returns the summary as JSON.");
}
