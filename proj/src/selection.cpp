#include "cffedsr/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cffedsr/rng.hpp"

namespace cffedsr {

bool eligible(long long n_k, int rounds_elapsed, int lambda1, int lambda2) {
    return n_k >= lambda1 || rounds_elapsed >= lambda2;
}

std::vector<double> represent(std::span<const int> sequence, const Matrix& embedding, int v1,
                              int v2) {
    if (sequence.empty()) throw std::invalid_argument("represent: empty sequence");
    if (v1 < 1 || v2 <= v1) throw std::invalid_argument("represent: need v2 > v1 >= 1");
    const std::size_t d = embedding.cols;
    auto tail_mean = [&](int v) {
        const std::size_t take = std::min<std::size_t>(v, sequence.size());
        std::vector<double> mean(d, 0.0);
        for (std::size_t i = sequence.size() - take; i < sequence.size(); ++i) {
            const int item = sequence[i];
            if (item < 0 || static_cast<std::size_t>(item) >= embedding.rows)
                throw std::invalid_argument("represent: item id out of range");
            const double* row = embedding.row(item);
            for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
        }
        for (double& v_ : mean) v_ /= static_cast<double>(take);
        return mean;
    };
    std::vector<double> rep = tail_mean(v1);
    std::vector<double> longterm = tail_mean(v2);
    rep.insert(rep.end(), longterm.begin(), longterm.end());
    return rep;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dlt = a[i] - b[i];
        s += dlt * dlt;
    }
    return s;
}

}  // namespace

Clustering kmeans(const std::vector<std::vector<double>>& points, int k, int max_iter,
                  std::uint64_t seed) {
    const int n = static_cast<int>(points.size());
    if (n == 0) throw std::invalid_argument("kmeans: no points");
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= k <= |points|");

    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // k-means++ seeding
    Clustering out;
    out.centroids.reserve(k);
    std::uniform_int_distribution<int> first(0, n - 1);
    out.centroids.push_back(points[first(rng)]);
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& cen : out.centroids) best = std::min(best, sq_dist(points[i], cen));
            d2[i] = best;
            total += best;
        }
        int pick = 0;
        if (total > 0.0) {
            double r = unif(rng) * total;
            for (int i = 0; i < n; ++i) {
                r -= d2[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = first(rng);
        }
        out.centroids.push_back(points[pick]);
    }

    out.assignment.assign(n, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        std::vector<int> count(k, 0);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(points[i], out.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double dd = sq_dist(points[i], out.centroids[c]);
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (out.assignment[i] != best) {
                out.assignment[i] = best;
                changed = true;
            }
            ++count[best];
        }
        // repair empty clusters: steal the farthest point from the largest
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            int big = static_cast<int>(std::max_element(count.begin(), count.end()) -
                                       count.begin());
            int far_i = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (out.assignment[i] != big) continue;
                const double dd = sq_dist(points[i], out.centroids[big]);
                if (dd > far_d) {
                    far_d = dd;
                    far_i = i;
                }
            }
            out.assignment[far_i] = c;
            --count[big];
            ++count[c];
            changed = true;
        }
        if (!changed && iter > 0) break;
        // recompute centroids
        const std::size_t dim = points[0].size();
        for (auto& cen : out.centroids) std::fill(cen.begin(), cen.end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                out.centroids[out.assignment[i]][j] += points[i][j];
        for (int c = 0; c < k; ++c)
            for (std::size_t j = 0; j < dim; ++j)
                out.centroids[c][j] /= static_cast<double>(count[c]);
    }

    out.inertia = 0.0;
    for (int i = 0; i < n; ++i)
        out.inertia += sq_dist(points[i], out.centroids[out.assignment[i]]);
    return out;
}

std::vector<int> proportional_sample(const Clustering& clustering,
                                     const std::vector<int>& client_ids, int budget,
                                     std::uint64_t seed) {
    const int n = static_cast<int>(clustering.assignment.size());
    if (n == 0) throw std::invalid_argument("proportional_sample: empty clustering");
    if (client_ids.size() != clustering.assignment.size())
        throw std::invalid_argument("proportional_sample: id list size mismatch");
    if (budget < 1) throw std::invalid_argument("proportional_sample: budget >= 1");

    if (budget >= n) {
        std::vector<int> all = client_ids;
        std::sort(all.begin(), all.end());
        return all;
    }

    const int k = static_cast<int>(clustering.centroids.size());
    std::vector<std::vector<int>> members(k);
    for (int i = 0; i < n; ++i) members[clustering.assignment[i]].push_back(client_ids[i]);

    // largest-remainder apportionment
    std::vector<int> quota(k, 0);
    std::vector<std::pair<double, int>> rem;
    int assigned = 0;
    for (int c = 0; c < k; ++c) {
        const double exact =
            static_cast<double>(members[c].size()) * budget / static_cast<double>(n);
        quota[c] = static_cast<int>(std::floor(exact));
        assigned += quota[c];
        rem.push_back({exact - quota[c], c});
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; assigned < budget; ++i, ++assigned) ++quota[rem[i % k].second];

    std::vector<int> picked;
    picked.reserve(budget);
    for (int c = 0; c < k; ++c) {
        auto& m = members[c];
        std::sort(m.begin(), m.end());
        const int q = std::min<int>(quota[c], static_cast<int>(m.size()));
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        std::shuffle(m.begin(), m.end(), rng);
        picked.insert(picked.end(), m.begin(), m.begin() + q);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace cffedsr
