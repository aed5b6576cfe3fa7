#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace qf {

struct Transaction {
    std::vector<int> items;  // sorted, no duplicates
};

struct FrequentItemset {
    std::vector<int> items;  // sorted ascending
    std::size_t count = 0;
    double support = 0.0;  // count / n_transactions
};

/// Smallest occurrence count an itemset needs so that count/n >= min_support.
std::size_t min_count_for(double min_support, std::size_t n_transactions);

/// FP-growth frequent-itemset mining. Returns every nonempty itemset whose
/// support reaches min_support, sorted by (support desc, size desc, items
/// ascending lexicographic) so output order is deterministic.
std::vector<FrequentItemset> fpgrowth(const std::vector<Transaction>& txns,
                                      double min_support);

/// Mine label index sets that frequently co-occur in a {0,1} label matrix
/// (one transaction per row, items = positive label indices). Itemsets
/// smaller than min_size are dropped; by default singletons are kept.
std::vector<FrequentItemset> frequent_label_subsets(const Eigen::MatrixXi& labels,
                                                    double min_support,
                                                    int min_size = 1);

} // namespace qf
