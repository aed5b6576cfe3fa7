#include "qf/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "qf/errors.hpp"
#include "qf/paths.hpp"

namespace qf {

const char* strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::PerLabel: return "label";
        case StrategyKind::All: return "all";
        case StrategyKind::Subsets: return "subsets";
    }
    return "?";
}

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

// Shared tail of every strategy: reduce the voting paths for one target mask
// (or fall back to all paths) and build the rule.
void build_for_mask(const Forest& forest, const Eigen::VectorXd& x,
                    const PathSet& all_paths, const Labelset& mask,
                    const StrategyConfig& cfg, bool allow_fallback,
                    Explanation& out) {
    Quorum q = quorum(forest.n_trees());
    PathSet voting = voting_paths(all_paths, mask);

    PathSet retained;
    ReductionTrace trace;
    if (static_cast<int>(voting.size()) >= q.value) {
        std::tie(retained, trace) = reduce_pipeline(voting, q, cfg.reduction);
    } else {
        if (!allow_fallback)
            throw std::logic_error("voting paths below quorum for a predicted "
                                   "label; prediction semantics violated");
        // under quorum: every path is needed to pin the prediction
        retained = all_paths;
        trace.seed = cfg.reduction.seed;
        trace.under_quorum = true;
        out.fallback_used = true;
    }

    Rule rule = build_rule(aggregate_ranges(retained, x, forest.space),
                           handle_categorical(retained, x, forest.space), mask);
    out.rules.push_back(std::move(rule));
    out.traces.push_back(std::move(trace));
    out.retained.push_back(std::move(retained));
}

}  // namespace

Explanation explain_per_label(const Forest& forest, const Eigen::VectorXd& x,
                              const StrategyConfig& cfg) {
    Timer timer;
    Explanation out;
    out.strategy = StrategyKind::PerLabel;
    out.q = quorum(forest.n_trees());

    Labelset predicted = predict(forest, x);
    if (!predicted.any()) {
        out.no_positive_labels = true;
        out.elapsed_seconds = timer.seconds();
        return out;
    }

    PathSet all_paths = extract_all_paths(forest, x);
    for (int l : predicted.positives()) {
        Labelset mask(predicted.size());
        mask[static_cast<std::size_t>(l)] = 1;
        build_for_mask(forest, x, all_paths, mask, cfg,
                       /*allow_fallback=*/false, out);
    }
    out.elapsed_seconds = timer.seconds();
    return out;
}

Explanation explain_all(const Forest& forest, const Eigen::VectorXd& x,
                        const StrategyConfig& cfg) {
    Timer timer;
    Explanation out;
    out.strategy = StrategyKind::All;
    out.q = quorum(forest.n_trees());

    Labelset predicted = predict(forest, x);
    if (!predicted.any()) {
        out.no_positive_labels = true;
        out.elapsed_seconds = timer.seconds();
        return out;
    }

    PathSet all_paths = extract_all_paths(forest, x);
    build_for_mask(forest, x, all_paths, predicted, cfg,
                   /*allow_fallback=*/true, out);
    out.elapsed_seconds = timer.seconds();
    return out;
}

Explanation explain_subsets(const Forest& forest, const Eigen::VectorXd& x,
                            const StrategyConfig& cfg,
                            const std::vector<FrequentItemset>& label_itemsets) {
    Timer timer;
    Explanation out;
    out.strategy = StrategyKind::Subsets;
    out.q = quorum(forest.n_trees());
    if (cfg.max_subsets < 1)
        throw ArgError("explain_subsets: max_subsets must be >= 1");

    Labelset predicted = predict(forest, x);
    if (!predicted.any()) {
        out.no_positive_labels = true;
        out.elapsed_seconds = timer.seconds();
        return out;
    }

    // activated subsets: frequent itemsets inside the predicted labelset
    std::vector<const FrequentItemset*> activated;
    for (const auto& fs : label_itemsets) {
        if (static_cast<int>(fs.items.size()) < cfg.subsets_min_size) continue;
        bool inside = true;
        for (int l : fs.items)
            if (!predicted[static_cast<std::size_t>(l)]) inside = false;
        if (inside) activated.push_back(&fs);
    }
    // support desc, then larger size, then label names
    std::stable_sort(activated.begin(), activated.end(),
                     [&](const FrequentItemset* a, const FrequentItemset* b) {
                         if (a->count != b->count) return a->count > b->count;
                         if (a->items.size() != b->items.size())
                             return a->items.size() > b->items.size();
                         std::vector<std::string> an, bn;
                         for (int l : a->items) an.push_back(forest.label_names[l]);
                         for (int l : b->items) bn.push_back(forest.label_names[l]);
                         return an < bn;
                     });

    if (activated.empty()) {
        out.no_activated_subsets = true;
        out.elapsed_seconds = timer.seconds();
        return out;
    }
    if (static_cast<int>(activated.size()) > cfg.max_subsets)
        activated.resize(static_cast<std::size_t>(cfg.max_subsets));

    PathSet all_paths = extract_all_paths(forest, x);
    for (const FrequentItemset* fs : activated) {
        Labelset mask(predicted.size());
        for (int l : fs->items) mask[static_cast<std::size_t>(l)] = 1;
        build_for_mask(forest, x, all_paths, mask, cfg,
                       /*allow_fallback=*/true, out);
    }
    out.elapsed_seconds = timer.seconds();
    return out;
}

Explanation explain_subsets(const Forest& forest, const Eigen::VectorXd& x,
                            const StrategyConfig& cfg,
                            const Eigen::MatrixXi& train_labels) {
    auto itemsets = frequent_label_subsets(train_labels, cfg.min_support,
                                           cfg.subsets_min_size);
    return explain_subsets(forest, x, cfg, itemsets);
}

Explanation explain(const Forest& forest, const Eigen::VectorXd& x,
                    const StrategyConfig& cfg,
                    const Eigen::MatrixXi* train_labels) {
    switch (cfg.kind) {
        case StrategyKind::PerLabel: return explain_per_label(forest, x, cfg);
        case StrategyKind::All: return explain_all(forest, x, cfg);
        case StrategyKind::Subsets:
            if (!train_labels)
                throw ArgError("subsets strategy needs training labels");
            return explain_subsets(forest, x, cfg, *train_labels);
    }
    throw ArgError("unknown strategy");
}

} // namespace qf
