#include "qf/paths.hpp"

#include <algorithm>

namespace qf {

std::vector<int> DecisionPath::feature_set() const {
    std::vector<int> out;
    out.reserve(conditions.size());
    for (const Condition& c : conditions) out.push_back(c.feature);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

DecisionPath extract_path(const Tree& tree, const Eigen::VectorXd& x, int tree_id) {
    DecisionPath path;
    path.tree_id = tree_id;
    int id = 0;
    while (!tree.nodes[id].is_leaf()) {
        const TreeNode& nd = tree.nodes[id];
        if (x[nd.feature] <= nd.threshold) {
            path.conditions.push_back({nd.feature, CondOp::LessEq, nd.threshold});
            id = nd.left;
        } else {
            path.conditions.push_back({nd.feature, CondOp::Greater, nd.threshold});
            id = nd.right;
        }
    }
    path.votes = tree.nodes[id].votes;
    path.leaf = id;
    return path;
}

PathSet extract_all_paths(const Forest& forest, const Eigen::VectorXd& x) {
    PathSet ps;
    ps.source_size = forest.n_trees();
    ps.paths.reserve(forest.trees.size());
    for (int t = 0; t < forest.n_trees(); ++t)
        ps.paths.push_back(extract_path(forest.trees[t], x, t));
    return ps;
}

PathSet voting_paths(const PathSet& ps, const Labelset& target) {
    PathSet out;
    out.source_size = ps.source_size;
    for (const DecisionPath& p : ps.paths)
        if (p.votes.covers(target)) out.paths.push_back(p);
    return out;
}

} // namespace qf
