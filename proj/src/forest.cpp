#include "qf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qf/errors.hpp"
#include "qf/reduce.hpp"
#include "qf/rng.hpp"

namespace qf {

namespace {

struct SplitPlan {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted mean Gini of the two children
};

// Mean binary Gini across labels for a sample subset given positive counts.
double mean_gini(const std::vector<int>& pos, int n) {
    if (n == 0) return 0.0;
    double total = 0.0;
    for (int p : pos) {
        double q = static_cast<double>(p) / n;
        total += 2.0 * q * (1.0 - q);  // 1 - q^2 - (1-q)^2
    }
    return total / static_cast<double>(pos.size());
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& ds, const TrainConfig& cfg, int mtry, Rng rng)
        : ds_(ds), cfg_(cfg), mtry_(mtry), rng_(rng) {}

    Tree build(std::vector<int> sample) {
        Tree tree;
        grow(tree, std::move(sample), 0);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<int> sample, int depth) {
        const int L = static_cast<int>(ds_.n_labels());
        const int n = static_cast<int>(sample.size());
        std::vector<int> pos(L, 0);
        for (int i : sample)
            for (int l = 0; l < L; ++l) pos[l] += ds_.labels(i, l);

        bool pure = true;
        for (int l = 0; l < L; ++l)
            if (pos[l] != 0 && pos[l] != n) pure = false;

        SplitPlan plan;
        if (!pure && n >= 2 && (cfg_.max_depth == 0 || depth < cfg_.max_depth))
            plan = best_split(sample, pos, n);

        int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (plan.feature < 0) {
            Labelset votes(static_cast<std::size_t>(L));
            for (int l = 0; l < L; ++l) votes[l] = (2 * pos[l] > n) ? 1 : 0;
            tree.nodes[id].votes = std::move(votes);
            return id;
        }

        std::vector<int> left, right;
        for (int i : sample) {
            if (ds_.rows(i, plan.feature) <= plan.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        sample.clear();
        sample.shrink_to_fit();

        tree.nodes[id].feature = plan.feature;
        tree.nodes[id].threshold = plan.threshold;
        int l_id = grow(tree, std::move(left), depth + 1);
        int r_id = grow(tree, std::move(right), depth + 1);
        tree.nodes[id].left = l_id;
        tree.nodes[id].right = r_id;
        return id;
    }

    // Candidate thresholds are midpoints between consecutive distinct sorted
    // values. Best = strictly lowest weighted child impurity; scanning
    // features ascending and thresholds ascending makes ties resolve to the
    // lowest feature index, then the lowest threshold.
    SplitPlan best_split(const std::vector<int>& sample,
                         const std::vector<int>& total_pos, int n) {
        const int L = static_cast<int>(ds_.n_labels());
        const double parent = mean_gini(total_pos, n);

        std::vector<int> candidates = sample_features();
        SplitPlan best;
        best.impurity = parent;

        std::vector<std::pair<double, int>> vals(sample.size());
        std::vector<int> left_pos(L);
        for (int f : candidates) {
            for (std::size_t k = 0; k < sample.size(); ++k)
                vals[k] = {ds_.rows(sample[k], f), sample[k]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (vals.front().first == vals.back().first) continue;

            std::fill(left_pos.begin(), left_pos.end(), 0);
            int n_left = 0;
            for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
                ++n_left;
                for (int l = 0; l < L; ++l)
                    left_pos[l] += ds_.labels(vals[k].second, l);
                if (vals[k].first == vals[k + 1].first) continue;

                double threshold = vals[k].first +
                                   (vals[k + 1].first - vals[k].first) / 2.0;
                int n_right = n - n_left;
                double g_left = 0.0, g_right = 0.0;
                for (int l = 0; l < L; ++l) {
                    double ql = static_cast<double>(left_pos[l]) / n_left;
                    double qr = static_cast<double>(total_pos[l] - left_pos[l]) /
                                n_right;
                    g_left += 2.0 * ql * (1.0 - ql);
                    g_right += 2.0 * qr * (1.0 - qr);
                }
                double weighted = (n_left * g_left + n_right * g_right) /
                                  (static_cast<double>(n) * L);
                if (weighted < best.impurity) {
                    best.feature = f;
                    best.threshold = threshold;
                    best.impurity = weighted;
                }
            }
        }
        return best;
    }

    // mtry distinct features by partial Fisher-Yates, returned sorted so the
    // split scan order is independent of draw order.
    std::vector<int> sample_features() {
        const int F = static_cast<int>(ds_.n_features());
        std::vector<int> idx(F);
        std::iota(idx.begin(), idx.end(), 0);
        int m = std::min(mtry_, F);
        for (int k = 0; k < m; ++k) {
            auto j = k + static_cast<int>(rng_.below(static_cast<std::uint64_t>(F - k)));
            std::swap(idx[k], idx[j]);
        }
        idx.resize(m);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    const Dataset& ds_;
    const TrainConfig& cfg_;
    int mtry_;
    Rng rng_;
};

}  // namespace

Forest train_forest(const Dataset& ds, const TrainConfig& cfg) {
    if (ds.n_rows() == 0) throw ArgError("train_forest: empty dataset");
    if (cfg.n_trees < 1) throw ArgError("train_forest: n_trees must be >= 1");

    const int n = static_cast<int>(ds.n_rows());
    const int F = static_cast<int>(ds.n_features());
    int mtry = cfg.features_per_split > 0
                   ? cfg.features_per_split
                   : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(F))));

    Forest forest;
    forest.label_names = ds.label_names;
    forest.space = ds.space;
    forest.config = cfg;
    forest.trees.reserve(static_cast<std::size_t>(cfg.n_trees));

    Rng master(cfg.seed);
    for (int t = 0; t < cfg.n_trees; ++t) {
        Rng rng = master.fork(static_cast<std::uint64_t>(t));
        std::vector<int> sample(n);
        for (int i = 0; i < n; ++i)
            sample[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        TreeBuilder builder(ds, cfg, mtry, rng.fork(0x7ee5));
        forest.trees.push_back(builder.build(std::move(sample)));
    }
    return forest;
}

Labelset tree_predict(const Tree& tree, const Eigen::VectorXd& x) {
    return tree.nodes[tree_leaf(tree, x)].votes;
}

int tree_leaf(const Tree& tree, const Eigen::VectorXd& x) {
    int id = 0;
    while (!tree.nodes[id].is_leaf()) {
        const TreeNode& nd = tree.nodes[id];
        id = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return id;
}

Eigen::VectorXi vote_counts(const Forest& forest, const Eigen::VectorXd& x) {
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(forest.n_labels());
    for (const Tree& t : forest.trees) {
        Labelset v = tree_predict(t, x);
        for (int l = 0; l < forest.n_labels(); ++l) counts[l] += v[l];
    }
    return counts;
}

Labelset predict(const Forest& forest, const Eigen::VectorXd& x) {
    Eigen::VectorXi counts = vote_counts(forest, x);
    int q = quorum(forest.n_trees()).value;
    Labelset out(static_cast<std::size_t>(forest.n_labels()));
    for (int l = 0; l < forest.n_labels(); ++l) out[l] = counts[l] >= q ? 1 : 0;
    return out;
}

} // namespace qf
