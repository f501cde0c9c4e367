// Independent reference implementations used only by tests. Everything
// here is written as plain scalar loops, deliberately separate from the
// library's code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "cffedsr/seqmodel.hpp"

namespace oracle {

// Step-by-step GRU recurrence, scalar loops only, no dropout.
inline std::vector<double> gru_forward(const cffedsr::ModelParams& p,
                                       std::span<const int> seq) {
    const int d = p.dim;
    std::vector<double> h(d, 0.0);
    for (int item : seq) {
        std::vector<double> x(d), z(d), r(d), n(d), hn(d);
        for (int i = 0; i < d; ++i) x[i] = p.embedding(item, i);
        for (int i = 0; i < d; ++i) {
            double az = p.b_update[i], ar = p.b_reset[i];
            for (int j = 0; j < d; ++j) {
                az += p.w_update(i, j) * x[j] + p.u_update(i, j) * h[j];
                ar += p.w_reset(i, j) * x[j] + p.u_reset(i, j) * h[j];
            }
            z[i] = 1.0 / (1.0 + std::exp(-az));
            r[i] = 1.0 / (1.0 + std::exp(-ar));
        }
        for (int i = 0; i < d; ++i) {
            double an = p.b_cand[i];
            for (int j = 0; j < d; ++j)
                an += p.w_cand(i, j) * x[j] + p.u_cand(i, j) * (r[j] * h[j]);
            n[i] = std::tanh(an);
        }
        for (int i = 0; i < d; ++i) hn[i] = z[i] * h[i] + (1.0 - z[i]) * n[i];
        h = hn;
    }
    return h;
}

// Loss only, via the oracle recurrence plus a scalar softmax.
inline double sampled_softmax_loss(const cffedsr::ModelParams& p, std::span<const int> seq,
                                   int target, std::span<const int> negatives) {
    std::vector<double> h = gru_forward(p, seq);
    std::vector<int> cands{target};
    cands.insert(cands.end(), negatives.begin(), negatives.end());
    std::vector<double> s;
    for (int c : cands) {
        double v = 0.0;
        for (int i = 0; i < p.dim; ++i) v += h[i] * p.embedding(c, i);
        s.push_back(v);
    }
    const double m = *std::max_element(s.begin(), s.end());
    double zsum = 0.0;
    for (double v : s) zsum += std::exp(v - m);
    return std::log(zsum) - (s[0] - m);
}

// Central finite differences of `f` w.r.t. every entry of every tensor.
inline cffedsr::ModelParams finite_diff(
    const cffedsr::ModelParams& params,
    const std::function<double(const cffedsr::ModelParams&)>& f, double step = 1e-5) {
    auto tensors = [](cffedsr::ModelParams& p) {
        return std::vector<std::vector<double>*>{
            &p.embedding.data, &p.w_update.data, &p.w_reset.data, &p.w_cand.data,
            &p.u_update.data,  &p.u_reset.data,  &p.u_cand.data,  &p.b_update,
            &p.b_reset,        &p.b_cand};
    };
    cffedsr::ModelParams g = cffedsr::zeros_like(params);
    auto gt = tensors(g);
    for (std::size_t t = 0; t < gt.size(); ++t) {
        for (std::size_t i = 0; i < gt[t]->size(); ++i) {
            cffedsr::ModelParams plus = params;
            cffedsr::ModelParams minus = params;
            (*tensors(plus)[t])[i] += step;
            (*tensors(minus)[t])[i] -= step;
            (*gt[t])[i] = (f(plus) - f(minus)) / (2.0 * step);
        }
    }
    return g;
}

// Pessimistic rank via a full sort with the same tie rule.
inline int sort_rank(std::span<const double> scores, int target_index) {
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double t = scores[target_index];
    // position after every score >= t except the target itself
    int ge = 0;
    for (double v : sorted)
        if (v >= t) ++ge;
    return ge;  // includes the target's own equal entry
}

inline double two_pass_variance(std::span<const double> xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size());
}

}  // namespace oracle
