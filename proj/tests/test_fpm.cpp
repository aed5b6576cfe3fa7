#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qf/dataset.hpp"
#include "qf/errors.hpp"
#include "qf/fpm.hpp"
#include "qf/rng.hpp"

using namespace qf;

namespace {

// Independent oracle: enumerate every subset of the observed item universe
// and count containment directly.
std::vector<FrequentItemset> enumerate_itemsets(const std::vector<Transaction>& txns,
                                                double min_support) {
    std::vector<int> universe;
    for (const auto& t : txns)
        for (int item : t.items) universe.push_back(item);
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

    const std::size_t n = txns.size();
    const std::size_t threshold = min_count_for(min_support, n);
    std::vector<FrequentItemset> out;
    for (std::uint64_t mask = 1; mask < (1ull << universe.size()); ++mask) {
        std::vector<int> items;
        for (std::size_t b = 0; b < universe.size(); ++b)
            if (mask & (1ull << b)) items.push_back(universe[b]);
        std::size_t count = 0;
        for (const auto& t : txns) {
            bool contains = true;
            for (int item : items)
                if (!std::binary_search(t.items.begin(), t.items.end(), item))
                    contains = false;
            if (contains) ++count;
        }
        if (count >= threshold)
            out.push_back({items, count,
                           static_cast<double>(count) / static_cast<double>(n)});
    }
    std::sort(out.begin(), out.end(),
              [](const FrequentItemset& a, const FrequentItemset& b) {
                  if (a.count != b.count) return a.count > b.count;
                  if (a.items.size() != b.items.size())
                      return a.items.size() > b.items.size();
                  return a.items < b.items;
              });
    return out;
}

bool same_result(const std::vector<FrequentItemset>& a,
                 const std::vector<FrequentItemset>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].items != b[i].items || a[i].count != b[i].count) return false;
    return true;
}

}  // namespace

TEST_CASE("fpgrowth on the three-transaction example") {
    std::vector<Transaction> txns = {{{0, 1}}, {{0, 2}}, {{0, 1}}};  // AB, AC, AB
    auto result = fpgrowth(txns, 0.5);

    // expected, frozen from subset enumeration: A 3/3, AB 2/3, B 2/3
    REQUIRE(result.size() == 3);
    CHECK(result[0].items == std::vector<int>{0});
    CHECK(result[0].count == 3);
    CHECK(result[0].support == 1.0);
    CHECK(result[1].items == std::vector<int>{0, 1});  // size beats {1} on ties
    CHECK(result[1].count == 2);
    CHECK(result[2].items == std::vector<int>{1});
    CHECK(result[2].count == 2);
    CHECK(result[1].support == doctest::Approx(2.0 / 3.0));

    CHECK(same_result(result, enumerate_itemsets(txns, 0.5)));
}

TEST_CASE("fpgrowth: unanimity and vacuous thresholds") {
    SUBCASE("identical transactions at min_support 1.0 keep every subset") {
        std::vector<Transaction> txns(4, Transaction{{1, 4, 9}});
        auto result = fpgrowth(txns, 1.0);
        CHECK(result.size() == 7);  // 2^3 - 1
        for (const auto& fs : result) {
            CHECK(fs.count == 4);
            CHECK(fs.support == 1.0);
        }
    }

    SUBCASE("threshold above the best single item yields nothing") {
        std::vector<Transaction> txns = {{{0}}, {{1}}, {{2}}, {{3}}};
        CHECK(fpgrowth(txns, 0.5).empty());
    }
}

TEST_CASE("fpgrowth rejects bad arguments") {
    std::vector<Transaction> txns = {{{0}}};
    CHECK_THROWS_AS(fpgrowth(txns, 0.0), ArgError);
    CHECK_THROWS_AS(fpgrowth(txns, 1.5), ArgError);
    CHECK_THROWS_AS(fpgrowth({}, 0.5), ArgError);
}

TEST_CASE("fpgrowth equals subset enumeration on random inputs") {
    Rng rng(20240);
    for (int trial = 0; trial < 200; ++trial) {
        int n_items = 2 + static_cast<int>(rng.below(11));  // <= 12
        int n_txns = 1 + static_cast<int>(rng.below(64));   // <= 64
        double density = 0.15 + 0.5 * rng.unit();
        std::vector<Transaction> txns(static_cast<std::size_t>(n_txns));
        for (auto& t : txns)
            for (int item = 0; item < n_items; ++item)
                if (rng.unit() < density) t.items.push_back(item);
        double min_support = 0.05 + 0.6 * rng.unit();

        auto fast = fpgrowth(txns, min_support);
        auto slow = enumerate_itemsets(txns, min_support);
        REQUIRE_MESSAGE(same_result(fast, slow),
                        "trial " << trial << ": fpgrowth " << fast.size()
                                 << " itemsets, oracle " << slow.size());
    }
}

TEST_CASE("downward closure: subsets of frequent itemsets are frequent") {
    Rng rng(5150);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Transaction> txns(20);
        for (auto& t : txns)
            for (int item = 0; item < 8; ++item)
                if (rng.unit() < 0.4) t.items.push_back(item);
        auto result = fpgrowth(txns, 0.2);

        auto found = [&](const std::vector<int>& items) {
            for (const auto& fs : result)
                if (fs.items == items) return true;
            return false;
        };
        for (const auto& fs : result) {
            if (fs.items.size() < 2) continue;
            for (std::size_t drop = 0; drop < fs.items.size(); ++drop) {
                std::vector<int> sub = fs.items;
                sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
                CHECK(found(sub));
            }
        }
    }
}

TEST_CASE("fpgrowth output order is deterministic") {
    Rng rng(31);
    std::vector<Transaction> txns(30);
    for (auto& t : txns)
        for (int item = 0; item < 9; ++item)
            if (rng.unit() < 0.35) t.items.push_back(item);
    auto a = fpgrowth(txns, 0.15);
    auto b = fpgrowth(txns, 0.15);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].items == b[i].items);
        CHECK(a[i].count == b[i].count);
    }
    // sorted by (support desc, size desc, lexicographic)
    for (std::size_t i = 1; i < a.size(); ++i) {
        bool ordered = a[i - 1].count > a[i].count ||
                       (a[i - 1].count == a[i].count &&
                        (a[i - 1].items.size() > a[i].items.size() ||
                         (a[i - 1].items.size() == a[i].items.size() &&
                          a[i - 1].items < a[i].items)));
        CHECK(ordered);
    }
}

TEST_CASE("frequent_label_subsets on a small label matrix") {
    Eigen::MatrixXi labels(3, 3);
    labels << 1, 1, 0,
              1, 1, 0,
              1, 0, 1;
    auto result = frequent_label_subsets(labels, 0.6);

    // enumeration: {0} 3/3, {1} 2/3, {0,1} 2/3; {2} and {0,2} miss 0.6
    REQUIRE(result.size() == 3);
    CHECK(result[0].items == std::vector<int>{0});
    CHECK(result[0].support == 1.0);
    CHECK(result[1].items == std::vector<int>{0, 1});
    CHECK(result[1].support == doctest::Approx(2.0 / 3.0));
    CHECK(result[2].items == std::vector<int>{1});

    SUBCASE("min_size filters singletons") {
        auto pairs = frequent_label_subsets(labels, 0.6, 2);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].items == std::vector<int>{0, 1});
    }
}

TEST_CASE("frequent_label_subsets: all-zero labels yield nothing") {
    Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(5, 3);
    CHECK(frequent_label_subsets(labels, 0.1).empty());
}

TEST_CASE("generated data makes {PWF, OSF} a frequent pair") {
    Dataset ds = generate_ai4i_like(339, 7);
    auto pairs = frequent_label_subsets(ds.labels, 0.1, 2);
    bool found = false;
    double support = 0.0;
    for (const auto& fs : pairs) {
        if (fs.items == std::vector<int>{1, 2}) {  // PWF, OSF
            found = true;
            support = fs.support;
        }
    }
    REQUIRE(found);
    CHECK(support > 0.1);

    // cross-check the count directly
    int both = 0;
    for (Eigen::Index i = 0; i < ds.n_rows(); ++i)
        if (ds.labels(i, 1) && ds.labels(i, 2)) ++both;
    CHECK(support == doctest::Approx(both / 339.0));
}
