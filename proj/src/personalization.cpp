#include "cffedsr/personalization.hpp"

#include <stdexcept>

#include "cffedsr/rng.hpp"

namespace cffedsr {

namespace {

std::vector<int> sample_negatives(int num_items, int target, int count, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, num_items - 2);
    std::vector<int> negs;
    negs.reserve(count);
    for (int i = 0; i < count; ++i) {
        int v = pick(rng);
        if (v >= target) ++v;  // skip the target id
        negs.push_back(v);
    }
    return negs;
}

}  // namespace

ModelParams fine_tune(const ModelParams& local, const Matrix& global_embedding,
                      std::span<const int> train_sequence, double eta, int steps,
                      int num_negatives, std::uint64_t seed) {
    if (eta < 0.0) throw std::invalid_argument("fine_tune: eta must be >= 0");
    if (steps < 1) throw std::invalid_argument("fine_tune: steps must be >= 1");
    if (train_sequence.empty()) throw std::invalid_argument("fine_tune: empty training data");

    ModelParams model = local;
    if (!model.embedding.same_shape(global_embedding))
        throw std::invalid_argument("fine_tune: embedding shape mismatch");
    model.embedding = global_embedding;

    Rng rng(seed);
    const std::size_t len = train_sequence.size();
    for (int pass = 0; pass < steps; ++pass) {
        for (std::size_t t = 1; t < len; ++t) {
            auto prefix = train_sequence.subspan(0, t);
            const int target = train_sequence[t];
            std::vector<int> negs = sample_negatives(model.num_items, target, num_negatives, rng);
            auto [loss, grads] = loss_and_grad(model, prefix, target, negs, 0.0, rng());
            if (eta > 0.0) params_axpy(model, grads, -eta);
        }
    }
    return model;
}

ModelParams interpolate(const ModelParams& local, const Matrix& global_embedding, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("interpolate: gamma in [0,1]");
    if (!local.embedding.same_shape(global_embedding))
        throw std::invalid_argument("interpolate: embedding shape mismatch");
    ModelParams out = local;
    for (std::size_t i = 0; i < out.embedding.data.size(); ++i)
        out.embedding.data[i] =
            gamma * local.embedding.data[i] + (1.0 - gamma) * global_embedding.data[i];
    return out;
}

}  // namespace cffedsr
