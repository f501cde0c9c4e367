#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cffedsr/matrix.hpp"

namespace cffedsr {

// GRU-based sequential recommender with tied item embeddings: the hidden
// state is scored against the embedding table directly, so hidden size
// equals embedding size.
struct ModelParams {
    int num_items = 0;
    int dim = 0;  // embedding size d == hidden size h

    Matrix embedding;  // num_items x dim

    // input->hidden weights, [dim x dim] each
    Matrix w_update, w_reset, w_cand;
    // hidden->hidden weights, [dim x dim] each
    Matrix u_update, u_reset, u_cand;
    std::vector<double> b_update, b_reset, b_cand;  // [dim]

    ModelParams() = default;
    ModelParams(int items, int d);

    bool same_shape(const ModelParams& o) const;
    bool finite() const;
    void fill(double v);
};

ModelParams zeros_like(const ModelParams& p);

// Uniform init in [-1/sqrt(d), 1/sqrt(d)], seeded.
ModelParams make_params(int num_items, int dim, std::uint64_t seed);

// dst += scale * src over every parameter tensor.
void params_axpy(ModelParams& dst, const ModelParams& src, double scale);

enum class OptKind { adam, sgd };

struct OptimizerState {
    ModelParams first_moment;
    ModelParams second_moment;
    long step_count = 0;

    OptimizerState() = default;
    explicit OptimizerState(const ModelParams& shape)
        : first_moment(zeros_like(shape)), second_moment(zeros_like(shape)) {}
};

// Final hidden state of the GRU over the sequence's embeddings.
// Inverted dropout is applied to the embedding inputs when dropout_rate > 0;
// pass 0 for evaluation. Deterministic given seed.
std::vector<double> forward(const ModelParams& params, std::span<const int> sequence,
                            double dropout_rate, std::uint64_t rng_seed);

// score_i = dot(hidden, embedding[candidates[i]])
std::vector<double> score(const ModelParams& params, const std::vector<double>& hidden,
                          std::span<const int> candidates);

// Sampled softmax cross-entropy over {target} ∪ negatives with exact
// analytic gradients for every parameter.
std::pair<double, ModelParams> loss_and_grad(const ModelParams& params,
                                             std::span<const int> sequence, int target,
                                             std::span<const int> negatives,
                                             double dropout_rate, std::uint64_t rng_seed);

// Adam (beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected) or plain SGD.
void optimizer_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
                    double lr, OptKind kind);

}  // namespace cffedsr
