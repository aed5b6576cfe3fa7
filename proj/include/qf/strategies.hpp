#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qf/fpm.hpp"
#include "qf/forest.hpp"
#include "qf/reduce.hpp"
#include "qf/rules.hpp"

namespace qf {

enum class StrategyKind { PerLabel, All, Subsets };

const char* strategy_name(StrategyKind kind);  // "label" / "all" / "subsets"

struct StrategyConfig {
    StrategyKind kind = StrategyKind::PerLabel;
    int max_subsets = 10;        // N: cap on explained label subsets
    double min_support = 0.1;    // for mining frequent label subsets
    int subsets_min_size = 2;    // singleton subsets duplicate per-label rules
    ReductionConfig reduction;
    std::uint64_t seed = 0;
};

/// Per-strategy bundle: one rule per explained target (label, labelset, or
/// subset), with the reduction trace and retained paths behind each rule.
struct Explanation {
    StrategyKind strategy = StrategyKind::PerLabel;
    std::vector<Rule> rules;
    std::vector<ReductionTrace> traces;   // parallel to rules
    std::vector<PathSet> retained;        // parallel to rules
    Quorum q;
    bool fallback_used = false;           // some rule used all |T| paths
    bool no_positive_labels = false;
    bool no_activated_subsets = false;
    double elapsed_seconds = 0.0;
};

/// One rule per positively predicted label. Each label has at least quorum
/// voting paths by the prediction semantics, so reduction always applies.
Explanation explain_per_label(const Forest& forest, const Eigen::VectorXd& x,
                              const StrategyConfig& cfg);

/// A single rule for the whole predicted labelset. When fewer than quorum
/// paths vote for the full labelset, all |T| paths are used unreduced and
/// fallback_used is set.
Explanation explain_all(const Forest& forest, const Eigen::VectorXd& x,
                        const StrategyConfig& cfg);

/// One rule per activated subset: frequent label itemsets (mined on training
/// labelsets) contained in the predicted positive labels, ordered by support
/// (ties: larger size, then label names), truncated to max_subsets. Each
/// subset falls back to all paths if its voting count is below quorum.
Explanation explain_subsets(const Forest& forest, const Eigen::VectorXd& x,
                            const StrategyConfig& cfg,
                            const std::vector<FrequentItemset>& label_itemsets);
Explanation explain_subsets(const Forest& forest, const Eigen::VectorXd& x,
                            const StrategyConfig& cfg,
                            const Eigen::MatrixXi& train_labels);

/// Dispatch on cfg.kind; train_labels may be null unless kind == Subsets.
Explanation explain(const Forest& forest, const Eigen::VectorXd& x,
                    const StrategyConfig& cfg,
                    const Eigen::MatrixXi* train_labels = nullptr);

} // namespace qf
