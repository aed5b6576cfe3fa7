#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qf/forest.hpp"
#include "qf/labelset.hpp"

namespace qf {

enum class CondOp { LessEq, Greater };

struct Condition {
    int feature;
    CondOp op;
    double threshold;

    bool holds(const Eigen::VectorXd& x) const {
        return op == CondOp::LessEq ? x[feature] <= threshold
                                    : x[feature] > threshold;
    }
};

/// Root-to-leaf comparisons one tree applied to one instance, in traversal
/// order, plus the reached leaf's vote vector. Conditions are stored raw
/// (possibly several per feature); interval merging happens at rule building.
struct DecisionPath {
    int tree_id = -1;
    std::vector<Condition> conditions;
    Labelset votes;
    int leaf = -1;  // node id of the reached leaf

    std::vector<int> feature_set() const;  // distinct features, ascending
};

struct PathSet {
    std::vector<DecisionPath> paths;  // at most one per tree_id
    int source_size = 0;              // |T| of the originating forest

    std::size_t size() const { return paths.size(); }
};

DecisionPath extract_path(const Tree& tree, const Eigen::VectorXd& x,
                          int tree_id = -1);

/// One path per tree; |paths| == |T|.
PathSet extract_all_paths(const Forest& forest, const Eigen::VectorXd& x);

/// Retain exactly the paths whose votes are positive at every label set in
/// `target` (superset matching: unset labels are unconstrained).
PathSet voting_paths(const PathSet& ps, const Labelset& target);

} // namespace qf
