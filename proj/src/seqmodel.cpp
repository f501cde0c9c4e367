#include "cffedsr/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cffedsr/rng.hpp"

namespace cffedsr {

ModelParams::ModelParams(int items, int d)
    : num_items(items),
      dim(d),
      embedding(items, d),
      w_update(d, d),
      w_reset(d, d),
      w_cand(d, d),
      u_update(d, d),
      u_reset(d, d),
      u_cand(d, d),
      b_update(d, 0.0),
      b_reset(d, 0.0),
      b_cand(d, 0.0) {
    if (items <= 0 || d <= 0) throw std::invalid_argument("ModelParams: sizes must be positive");
}

bool ModelParams::same_shape(const ModelParams& o) const {
    return num_items == o.num_items && dim == o.dim;
}

namespace {

template <typename P, typename F>
void for_each_tensor(P& p, F&& f) {
    f(p.embedding.data);
    f(p.w_update.data);
    f(p.w_reset.data);
    f(p.w_cand.data);
    f(p.u_update.data);
    f(p.u_reset.data);
    f(p.u_cand.data);
    f(p.b_update);
    f(p.b_reset);
    f(p.b_cand);
}

template <typename P1, typename P2, typename F>
void zip_tensors(P1& a, P2& b, F&& f) {
    f(a.embedding.data, b.embedding.data);
    f(a.w_update.data, b.w_update.data);
    f(a.w_reset.data, b.w_reset.data);
    f(a.w_cand.data, b.w_cand.data);
    f(a.u_update.data, b.u_update.data);
    f(a.u_reset.data, b.u_reset.data);
    f(a.u_cand.data, b.u_cand.data);
    f(a.b_update, b.b_update);
    f(a.b_reset, b.b_reset);
    f(a.b_cand, b.b_cand);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = W x + U h + b
void gate_preact(const Matrix& w, const Matrix& u, const std::vector<double>& b,
                 const std::vector<double>& x, const std::vector<double>& h,
                 std::vector<double>& out) {
    const std::size_t d = b.size();
    for (std::size_t i = 0; i < d; ++i) {
        double acc = b[i];
        const double* wr = w.row(i);
        const double* ur = u.row(i);
        for (std::size_t j = 0; j < d; ++j) acc += wr[j] * x[j] + ur[j] * h[j];
        out[i] = acc;
    }
}

struct StepCache {
    std::vector<double> x;       // embedding input after dropout mask
    std::vector<double> mask;    // inverted-dropout multiplier per entry
    std::vector<double> h_prev;  // hidden before this step
    std::vector<double> z, r, n;
    std::vector<double> rh;  // r ∘ h_prev
};

struct ForwardResult {
    std::vector<StepCache> steps;
    std::vector<double> h_final;
};

ForwardResult run_forward(const ModelParams& p, std::span<const int> seq, double dropout,
                          std::uint64_t seed) {
    if (seq.empty()) throw std::invalid_argument("forward: empty sequence");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("forward: bad dropout rate");
    const int d = p.dim;
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double keep = 1.0 - dropout;

    ForwardResult fr;
    fr.steps.reserve(seq.size());
    std::vector<double> h(d, 0.0);

    for (int item : seq) {
        if (item < 0 || item >= p.num_items) throw std::invalid_argument("forward: item id out of range");
        StepCache c;
        c.h_prev = h;
        c.x.resize(d);
        c.mask.assign(d, 1.0);
        const double* emb = p.embedding.row(item);
        if (dropout > 0.0) {
            for (int i = 0; i < d; ++i) c.mask[i] = (unif(rng) < keep) ? 1.0 / keep : 0.0;
        }
        for (int i = 0; i < d; ++i) c.x[i] = emb[i] * c.mask[i];

        c.z.resize(d);
        c.r.resize(d);
        c.n.resize(d);
        c.rh.resize(d);
        std::vector<double> a(d);
        gate_preact(p.w_update, p.u_update, p.b_update, c.x, c.h_prev, a);
        for (int i = 0; i < d; ++i) c.z[i] = sigmoid(a[i]);
        gate_preact(p.w_reset, p.u_reset, p.b_reset, c.x, c.h_prev, a);
        for (int i = 0; i < d; ++i) c.r[i] = sigmoid(a[i]);
        for (int i = 0; i < d; ++i) c.rh[i] = c.r[i] * c.h_prev[i];
        gate_preact(p.w_cand, p.u_cand, p.b_cand, c.x, c.rh, a);
        for (int i = 0; i < d; ++i) c.n[i] = std::tanh(a[i]);
        for (int i = 0; i < d; ++i) h[i] = c.z[i] * c.h_prev[i] + (1.0 - c.z[i]) * c.n[i];
        fr.steps.push_back(std::move(c));
    }
    fr.h_final = std::move(h);
    return fr;
}

// accumulate: dW += da x^T, dU += da h^T, db += da, and dx/dh contributions.
void gate_backward(const Matrix& w, const Matrix& u, const std::vector<double>& da,
                   const std::vector<double>& x, const std::vector<double>& h, Matrix& dw,
                   Matrix& du, std::vector<double>& db, std::vector<double>& dx,
                   std::vector<double>& dh) {
    const std::size_t d = db.size();
    for (std::size_t i = 0; i < d; ++i) {
        const double g = da[i];
        db[i] += g;
        double* dwr = dw.row(i);
        double* dur = du.row(i);
        const double* wr = w.row(i);
        const double* ur = u.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            dwr[j] += g * x[j];
            dur[j] += g * h[j];
            dx[j] += g * wr[j];
            dh[j] += g * ur[j];
        }
    }
}

// Backprop dL/dh_final through the cached recurrence into grads.
void backward_through_gru(const ModelParams& p, std::span<const int> seq,
                          const ForwardResult& fr, std::vector<double> dh, ModelParams& g) {
    const int d = p.dim;
    std::vector<double> da(d), drh(d), dx(d), dummy(d);
    for (int t = static_cast<int>(seq.size()) - 1; t >= 0; --t) {
        const StepCache& c = fr.steps[t];
        std::vector<double> dh_prev(d, 0.0);
        std::fill(dx.begin(), dx.end(), 0.0);
        std::fill(drh.begin(), drh.end(), 0.0);

        // h = z*h_prev + (1-z)*n
        for (int i = 0; i < d; ++i) dh_prev[i] += dh[i] * c.z[i];

        // candidate gate: n = tanh(Wn x + Un (r∘h_prev) + bn)
        for (int i = 0; i < d; ++i) da[i] = dh[i] * (1.0 - c.z[i]) * (1.0 - c.n[i] * c.n[i]);
        gate_backward(p.w_cand, p.u_cand, da, c.x, c.rh, g.w_cand, g.u_cand, g.b_cand, dx, drh);

        // reset gate: rh = r∘h_prev, r = σ(...)
        for (int i = 0; i < d; ++i) dh_prev[i] += drh[i] * c.r[i];
        for (int i = 0; i < d; ++i)
            da[i] = drh[i] * c.h_prev[i] * c.r[i] * (1.0 - c.r[i]);
        gate_backward(p.w_reset, p.u_reset, da, c.x, c.h_prev, g.w_reset, g.u_reset, g.b_reset,
                      dx, dh_prev);

        // update gate: z = σ(...)
        for (int i = 0; i < d; ++i)
            da[i] = dh[i] * (c.h_prev[i] - c.n[i]) * c.z[i] * (1.0 - c.z[i]);
        gate_backward(p.w_update, p.u_update, da, c.x, c.h_prev, g.w_update, g.u_update,
                      g.b_update, dx, dh_prev);

        // through dropout into the embedding row
        double* erow = g.embedding.row(seq[t]);
        for (int i = 0; i < d; ++i) erow[i] += dx[i] * c.mask[i];

        dh = std::move(dh_prev);
    }
}

}  // namespace

bool ModelParams::finite() const {
    bool ok = true;
    for_each_tensor(*this, [&](const std::vector<double>& t) {
        for (double v : t)
            if (!std::isfinite(v)) ok = false;
    });
    return ok;
}

void ModelParams::fill(double v) {
    for_each_tensor(*this, [&](std::vector<double>& t) { std::fill(t.begin(), t.end(), v); });
}

ModelParams zeros_like(const ModelParams& p) { return ModelParams(p.num_items, p.dim); }

ModelParams make_params(int num_items, int dim, std::uint64_t seed) {
    ModelParams p(num_items, dim);
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    std::uniform_real_distribution<double> unif(-bound, bound);
    for_each_tensor(p, [&](std::vector<double>& t) {
        for (double& v : t) v = unif(rng);
    });
    return p;
}

void params_axpy(ModelParams& dst, const ModelParams& src, double scale) {
    if (!dst.same_shape(src)) throw std::invalid_argument("params_axpy: shape mismatch");
    zip_tensors(dst, src, [scale](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
    });
}

std::vector<double> forward(const ModelParams& params, std::span<const int> sequence,
                            double dropout_rate, std::uint64_t rng_seed) {
    return run_forward(params, sequence, dropout_rate, rng_seed).h_final;
}

std::vector<double> score(const ModelParams& params, const std::vector<double>& hidden,
                          std::span<const int> candidates) {
    if (static_cast<int>(hidden.size()) != params.dim)
        throw std::invalid_argument("score: hidden size mismatch");
    std::vector<double> out;
    out.reserve(candidates.size());
    for (int c : candidates) {
        if (c < 0 || c >= params.num_items)
            throw std::invalid_argument("score: candidate id out of range");
        const double* emb = params.embedding.row(c);
        double s = 0.0;
        for (int i = 0; i < params.dim; ++i) s += hidden[i] * emb[i];
        out.push_back(s);
    }
    return out;
}

std::pair<double, ModelParams> loss_and_grad(const ModelParams& params,
                                             std::span<const int> sequence, int target,
                                             std::span<const int> negatives,
                                             double dropout_rate, std::uint64_t rng_seed) {
    if (negatives.empty()) throw std::invalid_argument("loss_and_grad: empty negatives");
    for (int n : negatives)
        if (n == target) throw std::invalid_argument("loss_and_grad: target in negatives");

    ForwardResult fr = run_forward(params, sequence, dropout_rate, rng_seed);
    const std::vector<double>& h = fr.h_final;
    const int d = params.dim;

    std::vector<int> cands;
    cands.reserve(negatives.size() + 1);
    cands.push_back(target);
    cands.insert(cands.end(), negatives.begin(), negatives.end());

    std::vector<double> s = score(params, h, cands);
    const double smax = *std::max_element(s.begin(), s.end());
    double zsum = 0.0;
    for (double v : s) zsum += std::exp(v - smax);
    const double loss = std::log(zsum) - (s[0] - smax);

    ModelParams g = zeros_like(params);
    std::vector<double> dh(d, 0.0);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        double ds = std::exp(s[i] - smax) / zsum - (i == 0 ? 1.0 : 0.0);
        const double* emb = params.embedding.row(cands[i]);
        double* demb = g.embedding.row(cands[i]);
        for (int j = 0; j < d; ++j) {
            dh[j] += ds * emb[j];
            demb[j] += ds * h[j];
        }
    }
    backward_through_gru(params, sequence, fr, std::move(dh), g);
    return {loss, std::move(g)};
}

void optimizer_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
                    double lr, OptKind kind) {
    if (!params.same_shape(grads) || !params.same_shape(state.first_moment))
        throw std::invalid_argument("optimizer_step: shape mismatch");
    if (lr <= 0.0) throw std::invalid_argument("optimizer_step: lr must be positive");
    state.step_count += 1;
    if (kind == OptKind::sgd) {
        params_axpy(params, grads, -lr);
        return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_count));
    auto step = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    };
    step(params.embedding.data, grads.embedding.data, state.first_moment.embedding.data,
         state.second_moment.embedding.data);
    step(params.w_update.data, grads.w_update.data, state.first_moment.w_update.data,
         state.second_moment.w_update.data);
    step(params.w_reset.data, grads.w_reset.data, state.first_moment.w_reset.data,
         state.second_moment.w_reset.data);
    step(params.w_cand.data, grads.w_cand.data, state.first_moment.w_cand.data,
         state.second_moment.w_cand.data);
    step(params.u_update.data, grads.u_update.data, state.first_moment.u_update.data,
         state.second_moment.u_update.data);
    step(params.u_reset.data, grads.u_reset.data, state.first_moment.u_reset.data,
         state.second_moment.u_reset.data);
    step(params.u_cand.data, grads.u_cand.data, state.first_moment.u_cand.data,
         state.second_moment.u_cand.data);
    step(params.b_update, grads.b_update, state.first_moment.b_update,
         state.second_moment.b_update);
    step(params.b_reset, grads.b_reset, state.first_moment.b_reset,
         state.second_moment.b_reset);
    step(params.b_cand, grads.b_cand, state.first_moment.b_cand, state.second_moment.b_cand);
}

}  // namespace cffedsr
