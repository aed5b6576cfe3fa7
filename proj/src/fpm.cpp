#include "qf/fpm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "qf/errors.hpp"

namespace qf {

namespace {

struct FpNode {
    int item = -1;
    std::size_t count = 0;
    int parent = -1;
    std::map<int, int> children;  // item -> node id
};

class FpTree {
public:
    // items within each transaction must already be filtered to frequent ones
    // and sorted by descending global count (ties: ascending item id).
    FpTree() { nodes_.push_back({}); }

    void insert(const std::vector<int>& items, std::size_t count) {
        int cur = 0;
        for (int item : items) {
            auto it = nodes_[cur].children.find(item);
            if (it == nodes_[cur].children.end()) {
                int id = static_cast<int>(nodes_.size());
                nodes_.push_back({item, 0, cur, {}});
                nodes_[cur].children.emplace(item, id);
                header_[item].push_back(id);
                cur = id;
            } else {
                cur = it->second;
            }
            nodes_[cur].count += count;
        }
    }

    const std::map<int, std::vector<int>>& header() const { return header_; }
    const FpNode& node(int id) const { return nodes_[id]; }

private:
    std::vector<FpNode> nodes_;
    std::map<int, std::vector<int>> header_;  // item -> node ids
};

void mine(const FpTree& tree, std::size_t min_count, std::vector<int>& suffix,
          std::vector<FrequentItemset>& out) {
    for (const auto& [item, node_ids] : tree.header()) {
        std::size_t count = 0;
        for (int id : node_ids) count += tree.node(id).count;
        if (count < min_count) continue;

        suffix.push_back(item);
        FrequentItemset fs;
        fs.items = suffix;
        std::sort(fs.items.begin(), fs.items.end());
        fs.count = count;
        out.push_back(std::move(fs));

        // conditional pattern base: prefix paths of this item's nodes
        std::vector<std::pair<std::vector<int>, std::size_t>> base;
        std::unordered_map<int, std::size_t> cond_counts;
        for (int id : node_ids) {
            std::vector<int> prefix;
            for (int p = tree.node(id).parent; p > 0; p = tree.node(p).parent)
                prefix.push_back(tree.node(p).item);
            if (prefix.empty()) continue;
            std::reverse(prefix.begin(), prefix.end());
            for (int it2 : prefix) cond_counts[it2] += tree.node(id).count;
            base.emplace_back(std::move(prefix), tree.node(id).count);
        }

        FpTree cond;
        bool any = false;
        for (auto& [prefix, cnt] : base) {
            std::vector<int> kept;
            for (int it2 : prefix)
                if (cond_counts[it2] >= min_count) kept.push_back(it2);
            if (kept.empty()) continue;
            std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
                return cond_counts[a] != cond_counts[b]
                           ? cond_counts[a] > cond_counts[b]
                           : a < b;
            });
            cond.insert(kept, cnt);
            any = true;
        }
        if (any) mine(cond, min_count, suffix, out);
        suffix.pop_back();
    }
}

}  // namespace

std::size_t min_count_for(double min_support, std::size_t n_transactions) {
    double raw = min_support * static_cast<double>(n_transactions);
    auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return c < 1 ? 1 : c;
}

std::vector<FrequentItemset> fpgrowth(const std::vector<Transaction>& txns,
                                      double min_support) {
    if (!(min_support > 0.0) || min_support > 1.0)
        throw ArgError("fpgrowth: min_support must be in (0, 1]");
    if (txns.empty()) throw ArgError("fpgrowth: no transactions");

    const std::size_t n = txns.size();
    const std::size_t min_count = min_count_for(min_support, n);

    std::map<int, std::size_t> counts;
    for (const auto& t : txns)
        for (int item : t.items) ++counts[item];

    FpTree tree;
    for (const auto& t : txns) {
        std::vector<int> kept;
        for (int item : t.items)
            if (counts[item] >= min_count) kept.push_back(item);
        std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
            return counts[a] != counts[b] ? counts[a] > counts[b] : a < b;
        });
        kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
        if (!kept.empty()) tree.insert(kept, 1);
    }

    std::vector<FrequentItemset> out;
    std::vector<int> suffix;
    mine(tree, min_count, suffix, out);

    for (auto& fs : out)
        fs.support = static_cast<double>(fs.count) / static_cast<double>(n);
    std::sort(out.begin(), out.end(),
              [](const FrequentItemset& a, const FrequentItemset& b) {
                  if (a.count != b.count) return a.count > b.count;
                  if (a.items.size() != b.items.size())
                      return a.items.size() > b.items.size();
                  return std::lexicographical_compare(a.items.begin(), a.items.end(),
                                                      b.items.begin(), b.items.end());
              });
    return out;
}

std::vector<FrequentItemset> frequent_label_subsets(const Eigen::MatrixXi& labels,
                                                    double min_support,
                                                    int min_size) {
    std::vector<Transaction> txns;
    txns.reserve(static_cast<std::size_t>(labels.rows()));
    for (Eigen::Index i = 0; i < labels.rows(); ++i) {
        Transaction t;
        for (Eigen::Index l = 0; l < labels.cols(); ++l)
            if (labels(i, l)) t.items.push_back(static_cast<int>(l));
        txns.push_back(std::move(t));
    }
    auto all = fpgrowth(txns, min_support);
    if (min_size > 1) {
        std::erase_if(all, [min_size](const FrequentItemset& fs) {
            return static_cast<int>(fs.items.size()) < min_size;
        });
    }
    return all;
}

} // namespace qf
