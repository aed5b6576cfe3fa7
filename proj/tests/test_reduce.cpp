#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "qf/errors.hpp"
#include "qf/forest.hpp"
#include "qf/paths.hpp"
#include "qf/reduce.hpp"
#include "qf/rng.hpp"

using namespace qf;

namespace {

// PathSet whose paths carry the given feature sets (conditions f <= 0.8 per
// feature; votes all-ones so any mask matches).
PathSet paths_with_features(const std::vector<std::vector<int>>& sets) {
    PathSet ps;
    ps.source_size = static_cast<int>(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
        DecisionPath p;
        p.tree_id = static_cast<int>(i);
        for (int f : sets[i]) p.conditions.push_back({f, CondOp::LessEq, 0.8});
        p.votes = Labelset{1};
        ps.paths.push_back(std::move(p));
    }
    return ps;
}

std::set<int> tree_ids(const PathSet& ps) {
    std::set<int> ids;
    for (const auto& p : ps.paths) ids.insert(p.tree_id);
    return ids;
}

std::set<int> feature_union(const PathSet& ps) {
    std::set<int> out;
    for (const auto& p : ps.paths)
        for (int f : p.feature_set()) out.insert(f);
    return out;
}

bool is_subset_of(const PathSet& sub, const PathSet& super) {
    auto super_ids = tree_ids(super);
    for (const auto& p : sub.paths)
        if (!super_ids.count(p.tree_id)) return false;
    return true;
}

// test-side exhaustive medoid search with the library's tie rules
KMedoidsResult oracle_k_medoids(const Eigen::MatrixXd& dist, int k) {
    const int n = static_cast<int>(dist.rows());
    std::vector<int> comb(static_cast<std::size_t>(k));
    std::iota(comb.begin(), comb.end(), 0);
    KMedoidsResult best;
    best.cost = std::numeric_limits<double>::infinity();
    for (;;) {
        double cost = 0.0;
        for (int p = 0; p < n; ++p) {
            double d = dist(p, comb[0]);
            for (int m : comb) d = std::min(d, dist(p, m));
            cost += d;
        }
        if (cost < best.cost) {
            best.cost = cost;
            best.medoids = comb;
        }
        int i = k - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    best.assignment.assign(static_cast<std::size_t>(n), 0);
    for (int p = 0; p < n; ++p) {
        int a = 0;
        for (std::size_t m = 1; m < best.medoids.size(); ++m)
            if (dist(p, best.medoids[m]) < dist(p, best.medoids[a]))
                a = static_cast<int>(m);
        best.assignment[static_cast<std::size_t>(p)] = a;
    }
    return best;
}

}  // namespace

TEST_CASE("quorum values") {
    CHECK(quorum(9).value == 5);
    CHECK(quorum(10).value == 6);
    CHECK(quorum(1).value == 1);
    CHECK(quorum(9).source_size == 9);
    CHECK_THROWS_AS(quorum(0), ArgError);
}

TEST_CASE("quorum(n) is the smallest k with 2k > n") {
    for (int n = 1; n <= 501; ++n) {
        int k = quorum(n).value;
        CHECK(2 * k > n);
        CHECK(2 * (k - 1) <= n);
    }
}

TEST_CASE("reduce_by_association") {
    Quorum q{5, 9};

    SUBCASE("uniform feature sets: any quorum-sized subset") {
        PathSet ps = paths_with_features(
            std::vector<std::vector<int>>(8, std::vector<int>{1, 2}));
        PathSet out = reduce_by_association(ps, q, 0.1);
        CHECK(out.size() == 5);
        CHECK(is_subset_of(out, ps));
        for (int f : feature_union(out)) CHECK((f == 1 || f == 2));
    }

    SUBCASE("input at the quorum floor is unchanged") {
        PathSet ps = paths_with_features(
            std::vector<std::vector<int>>(5, std::vector<int>{0}));
        PathSet out = reduce_by_association(ps, q, 0.1);
        CHECK(out.size() == 5);
        CHECK(tree_ids(out) == tree_ids(ps));
    }

    SUBCASE("outlier feature sets are dropped first") {
        std::vector<std::vector<int>> sets(6, std::vector<int>{1, 2});
        sets.push_back({3, 4});
        sets.push_back({3, 4});
        PathSet ps = paths_with_features(sets);
        PathSet out = reduce_by_association(ps, q, 0.1);
        CHECK(out.size() == 5);
        auto uni = feature_union(out);
        CHECK(uni == std::set<int>{1, 2});
        CHECK_FALSE(tree_ids(out).count(6));
        CHECK_FALSE(tree_ids(out).count(7));

        // among support-greedy quorum choices, the retained feature union is
        // minimal: enumerate all 5-subsets and find the best attainable union
        std::size_t best_union = 99;
        std::vector<int> idx(8);
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<bool> pick(8, false);
        std::fill(pick.begin(), pick.begin() + 5, true);
        do {
            std::set<int> u;
            for (int i = 0; i < 8; ++i)
                if (pick[static_cast<std::size_t>(i)])
                    for (int f : sets[static_cast<std::size_t>(i)]) u.insert(f);
            best_union = std::min(best_union, u.size());
        } while (std::prev_permutation(pick.begin(), pick.end()));
        CHECK(uni.size() == best_union);
    }

    SUBCASE("no itemset reaches min_support: unchanged") {
        std::vector<std::vector<int>> sets;
        for (int i = 0; i < 8; ++i) sets.push_back({i});  // all supports 1/8
        PathSet ps = paths_with_features(sets);
        PathSet out = reduce_by_association(ps, q, 0.5);
        CHECK(out.size() == 8);
    }

    SUBCASE("below quorum throws") {
        PathSet ps = paths_with_features({{0}, {1}});
        CHECK_THROWS_AS(reduce_by_association(ps, q, 0.1), ArgError);
    }
}

TEST_CASE("jaccard distances") {
    PathSet ps = paths_with_features({{0, 1}, {0, 1}, {1, 2}, {}});
    Eigen::MatrixXd d = jaccard_distances(ps);
    CHECK(d(0, 1) == 0.0);
    CHECK(d(0, 2) == doctest::Approx(1.0 - 1.0 / 3.0));
    CHECK(d(0, 3) == 1.0);   // empty vs nonempty
    CHECK(d(3, 3) == 0.0);
    CHECK(d == d.transpose());
}

TEST_CASE("k_medoids matches exhaustive search on small instances") {
    Rng rng(4242);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 3 + static_cast<int>(rng.below(6));  // 3..8 points
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = rng.unit();
        int k = 2 + static_cast<int>(rng.below(2));  // 2..3
        if (k > n) k = n;

        KMedoidsResult ours = k_medoids(d, k);
        KMedoidsResult oracle = oracle_k_medoids(d, k);
        CHECK(ours.cost == doctest::Approx(oracle.cost).epsilon(1e-12));
        CHECK(ours.medoids == oracle.medoids);
        CHECK(ours.assignment == oracle.assignment);
    }
}

TEST_CASE("reduce_by_clustering") {
    Quorum q{5, 9};

    SUBCASE("well-separated groups: the large one survives") {
        // 6 paths on {0,1}, 3 paths on {5,6}: two clean Jaccard clusters
        std::vector<std::vector<int>> sets(6, std::vector<int>{0, 1});
        for (int i = 0; i < 3; ++i) sets.push_back({5, 6});
        PathSet ps = paths_with_features(sets);
        PathSet out = reduce_by_clustering(ps, q, 2);
        CHECK(out.size() == 6);
        CHECK(feature_union(out) == std::set<int>{0, 1});
        CHECK(tree_ids(out) == std::set<int>{0, 1, 2, 3, 4, 5});
    }

    SUBCASE("identical feature sets: never drops below quorum") {
        PathSet ps = paths_with_features(
            std::vector<std::vector<int>>(8, std::vector<int>{2, 3}));
        PathSet out = reduce_by_clustering(ps, q, 2);
        CHECK(out.size() >= 5);
        CHECK(is_subset_of(out, ps));
    }

    SUBCASE("input at the quorum floor is unchanged") {
        PathSet ps = paths_with_features(
            std::vector<std::vector<int>>(5, std::vector<int>{0}));
        CHECK(reduce_by_clustering(ps, q, 2).size() == 5);
    }

    SUBCASE("silhouette auto-k works on separated groups") {
        std::vector<std::vector<int>> sets(6, std::vector<int>{0, 1});
        for (int i = 0; i < 3; ++i) sets.push_back({5, 6});
        PathSet ps = paths_with_features(sets);
        PathSet out = reduce_by_clustering(ps, q, 0);
        CHECK(out.size() >= 5);
        CHECK(feature_union(out) == std::set<int>{0, 1});
    }
}

TEST_CASE("reduce_by_random") {
    Quorum q{5, 9};
    PathSet ps = paths_with_features(
        std::vector<std::vector<int>>(6, std::vector<int>{0}));

    PathSet out = reduce_by_random(ps, q, 99);
    CHECK(out.size() == 5);
    CHECK(is_subset_of(out, ps));

    SUBCASE("identity at the floor") {
        PathSet five = paths_with_features(
            std::vector<std::vector<int>>(5, std::vector<int>{0}));
        PathSet kept = reduce_by_random(five, q, 99);
        CHECK(tree_ids(kept) == tree_ids(five));
    }

    SUBCASE("same seed, same selection") {
        PathSet again = reduce_by_random(ps, q, 99);
        CHECK(tree_ids(out) == tree_ids(again));
        bool differs = false;
        for (std::uint64_t s = 0; s < 16 && !differs; ++s)
            differs = tree_ids(reduce_by_random(ps, q, s)) != tree_ids(out);
        CHECK(differs);  // selection actually depends on the seed
    }
}

TEST_CASE("reduce_pipeline") {
    SUBCASE("nine-tree per-label case lands exactly on the quorum") {
        std::vector<std::vector<int>> sets;
        for (int i = 0; i < 7; ++i) sets.push_back({i % 3, 3 + (i % 2)});
        PathSet ps = paths_with_features(sets);
        ReductionConfig cfg;
        cfg.seed = 12;
        auto [out, trace] = reduce_pipeline(ps, quorum(9), cfg);
        CHECK(out.size() == 5);
        CHECK_FALSE(trace.under_quorum);
        REQUIRE(trace.stages.size() == 3);
        CHECK(trace.stages[0].before == 7);
        CHECK(trace.stages[2].after == 5);
        for (const auto& s : trace.stages) CHECK(s.after <= s.before);
        CHECK(is_subset_of(out, ps));
    }

    SUBCASE("input at quorum size passes through untouched") {
        PathSet ps = paths_with_features(
            std::vector<std::vector<int>>(5, std::vector<int>{0, 1}));
        ReductionConfig cfg;
        auto [out, trace] = reduce_pipeline(ps, quorum(9), cfg);
        CHECK(out.size() == 5);
        CHECK(tree_ids(out) == tree_ids(ps));
    }

    SUBCASE("under-quorum input is returned unchanged and flagged") {
        PathSet ps = paths_with_features({{0}, {1}, {2}});
        ReductionConfig cfg;
        auto [out, trace] = reduce_pipeline(ps, quorum(9), cfg);
        CHECK(out.size() == 3);
        CHECK(trace.under_quorum);
        CHECK(trace.stages.empty());
    }

    SUBCASE("stages are individually skippable") {
        std::vector<std::vector<int>> sets(8, std::vector<int>{0, 1});
        PathSet ps = paths_with_features(sets);
        ReductionConfig cfg;
        cfg.association_enabled = false;
        cfg.clustering_enabled = false;
        auto [out, trace] = reduce_pipeline(ps, quorum(9), cfg);
        CHECK(out.size() == 5);
        REQUIRE(trace.stages.size() == 1);
        CHECK(trace.stages[0].name == "random");
    }
}

TEST_CASE("pipeline invariants on random voting path sets") {
    Rng rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        int n_paths = 5 + static_cast<int>(rng.below(8));
        std::vector<std::vector<int>> sets;
        for (int i = 0; i < n_paths; ++i) {
            std::vector<int> s;
            for (int f = 0; f < 6; ++f)
                if (rng.unit() < 0.4) s.push_back(f);
            sets.push_back(std::move(s));
        }
        PathSet ps = paths_with_features(sets);
        Quorum q = quorum(n_paths);
        ReductionConfig cfg;
        cfg.seed = trial;
        auto [out, trace] = reduce_pipeline(ps, q, cfg);

        CHECK(static_cast<int>(out.size()) == q.value);
        CHECK(is_subset_of(out, ps));
        auto before = feature_union(ps);
        for (int f : feature_union(out)) CHECK(before.count(f));
        // counts never increase stage over stage
        for (std::size_t s = 1; s < trace.stages.size(); ++s)
            CHECK(trace.stages[s].before == trace.stages[s - 1].after);
    }
}
