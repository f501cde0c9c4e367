#include <doctest.h>

#include <algorithm>
#include <set>

#include "cffedsr/rng.hpp"
#include "cffedsr/selection.hpp"

using namespace cffedsr;

TEST_CASE("eligible: either criterion admits a client") {
    CHECK(eligible(10, 0, 5, 20));   // enough data
    CHECK(eligible(3, 25, 5, 20));   // warm-up elapsed
    CHECK(!eligible(3, 0, 5, 20));   // small client, beginning stage
    CHECK(eligible(5, 0, 5, 20));    // thresholds are inclusive
    CHECK(eligible(0, 20, 5, 20));
}

TEST_CASE("represent: short sequence collapses both halves to the same mean") {
    Matrix emb(10, 3);
    for (std::size_t i = 0; i < emb.data.size(); ++i) emb.data[i] = static_cast<double>(i);
    std::vector<int> seq{4, 7};
    auto rep = represent(seq, emb, 3, 10);
    REQUIRE(rep.size() == 6);
    for (int j = 0; j < 3; ++j) CHECK(rep[j] == doctest::Approx(rep[j + 3]));
}

TEST_CASE("represent: identical embeddings give e||e") {
    Matrix emb(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        emb(i, 0) = 1.5;
        emb(i, 1) = -2.0;
    }
    std::vector<int> seq{0, 1, 2, 3, 4};
    auto rep = represent(seq, emb, 2, 4);
    CHECK(rep == std::vector<double>{1.5, -2.0, 1.5, -2.0});
}

TEST_CASE("represent: [a,b,c] with v1=1,v2=3 is emb[c] || mean(a,b,c)") {
    Matrix emb(4, 2);
    emb(1, 0) = 1.0; emb(1, 1) = 2.0;   // a
    emb(2, 0) = 3.0; emb(2, 1) = 4.0;   // b
    emb(3, 0) = 5.0; emb(3, 1) = 6.0;   // c
    std::vector<int> seq{1, 2, 3};
    auto rep = represent(seq, emb, 1, 3);
    CHECK(rep[0] == doctest::Approx(5.0));
    CHECK(rep[1] == doctest::Approx(6.0));
    CHECK(rep[2] == doctest::Approx(3.0));
    CHECK(rep[3] == doctest::Approx(4.0));
}

TEST_CASE("represent: input validation") {
    Matrix emb(3, 2);
    std::vector<int> empty;
    CHECK_THROWS_AS(represent(empty, emb, 1, 2), std::invalid_argument);
    std::vector<int> seq{0};
    CHECK_THROWS_AS(represent(seq, emb, 2, 2), std::invalid_argument);
}

TEST_CASE("kmeans: k equals point count gives zero inertia") {
    std::vector<std::vector<double>> pts{{0, 0}, {5, 5}, {9, 1}};
    Clustering c = kmeans(pts, 3, 20, 1);
    CHECK(c.inertia == doctest::Approx(0.0));
    std::set<int> used(c.assignment.begin(), c.assignment.end());
    CHECK(used.size() == 3);
}

TEST_CASE("kmeans: recovers well-separated groups") {
    Rng rng(3);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({jitter(rng), jitter(rng)});
    for (int i = 0; i < 20; ++i) pts.push_back({100.0 + jitter(rng), 100.0 + jitter(rng)});
    Clustering c = kmeans(pts, 2, 50, 7);
    // all of the first group share a label, all of the second the other
    for (int i = 1; i < 20; ++i) CHECK(c.assignment[i] == c.assignment[0]);
    for (int i = 21; i < 40; ++i) CHECK(c.assignment[i] == c.assignment[20]);
    CHECK(c.assignment[0] != c.assignment[20]);
}

TEST_CASE("kmeans: deterministic given seed, errors on k > n") {
    std::vector<std::vector<double>> pts{{1, 2}, {3, 4}, {0, 0}, {8, 8}, {2, 9}};
    Clustering a = kmeans(pts, 2, 30, 11);
    Clustering b = kmeans(pts, 2, 30, 11);
    CHECK(a.assignment == b.assignment);
    CHECK(a.inertia == b.inertia);
    CHECK_THROWS_AS(kmeans(pts, 6, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans({}, 1, 10, 1), std::invalid_argument);
}

TEST_CASE("kmeans: inertia non-increasing with more iterations") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    double prev = -1.0;
    for (int it = 1; it <= 12; ++it) {
        Clustering c = kmeans(pts, 4, it, 99);
        if (prev >= 0.0) CHECK(c.inertia <= prev + 1e-9);
        prev = c.inertia;
    }
}

namespace {
Clustering fake_clustering(const std::vector<int>& sizes) {
    Clustering c;
    c.centroids.resize(sizes.size(), {0.0});
    for (std::size_t k = 0; k < sizes.size(); ++k)
        for (int i = 0; i < sizes[k]; ++i) c.assignment.push_back(static_cast<int>(k));
    return c;
}
}  // namespace

TEST_CASE("proportional_sample: exact proportionality") {
    Clustering c = fake_clustering({50, 50});
    std::vector<int> ids(100);
    for (int i = 0; i < 100; ++i) ids[i] = i;
    auto picked = proportional_sample(c, ids, 10, 1);
    CHECK(picked.size() == 10);
    int first = 0;
    for (int id : picked)
        if (id < 50) ++first;
    CHECK(first == 5);
}

TEST_CASE("proportional_sample: largest remainder rounds (3,97) to (0,10)") {
    Clustering c = fake_clustering({3, 97});
    std::vector<int> ids(100);
    for (int i = 0; i < 100; ++i) ids[i] = i;
    auto picked = proportional_sample(c, ids, 10, 2);
    CHECK(picked.size() == 10);
    for (int id : picked) CHECK(id >= 3);
}

TEST_CASE("proportional_sample: budget clamp returns everyone") {
    Clustering c = fake_clustering({60, 40});
    std::vector<int> ids(100);
    for (int i = 0; i < 100; ++i) ids[i] = i + 1000;
    auto picked = proportional_sample(c, ids, 128, 3);
    CHECK(picked.size() == 100);
}

TEST_CASE("proportional_sample: no duplicates, subset of ids, quota sums") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        std::uniform_int_distribution<int> nsz(1, 40);
        std::vector<int> sizes;
        int total = 0;
        const int k = 1 + trial % 5;
        for (int c = 0; c < k; ++c) {
            sizes.push_back(nsz(rng));
            total += sizes.back();
        }
        Clustering clu = fake_clustering(sizes);
        std::vector<int> ids(total);
        for (int i = 0; i < total; ++i) ids[i] = i * 3 + 1;
        std::uniform_int_distribution<int> bud(1, 60);
        const int budget = bud(rng);
        auto picked = proportional_sample(clu, ids, budget, trial);
        CHECK(static_cast<int>(picked.size()) == std::min(budget, total));
        std::set<int> uniq(picked.begin(), picked.end());
        CHECK(uniq.size() == picked.size());
        std::set<int> pool(ids.begin(), ids.end());
        for (int id : picked) CHECK(pool.count(id));
    }
}
