#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qf/forest.hpp"
#include "qf/paths.hpp"
#include "qf/rng.hpp"

namespace qf {

/// Closed interval for one feature, in stored (scaled) units. Display code
/// converts endpoints back to original units; the stored values are never
/// rounded.
struct FeatureRange {
    int feature;
    double low;
    double high;
};

enum class CatOp { Equals, NotIn };

struct CategoricalClause {
    std::string source;               // source categorical feature name
    CatOp op;
    std::vector<std::string> values;  // Equals: exactly one value
};

/// Conjunctive explanation unit: per-feature ranges plus categorical
/// clauses, mapped to a set of target labels.
struct Rule {
    std::vector<FeatureRange> ranges;  // sorted by feature index
    std::vector<CategoricalClause> cat_clauses;
    Labelset consequent;

    int length() const {
        return static_cast<int>(ranges.size() + cat_clauses.size());
    }
    bool empty_antecedent() const {
        return ranges.empty() && cat_clauses.empty();
    }
};

/// Feature aggregation: each path's conditions on a feature intersect to one
/// interval (missing sides default to the feature's domain bounds; a strict
/// `>` edge is closed via nextafter), and the per-path intervals intersect
/// across paths — max of lows, min of highs. Features absent from every path
/// are omitted; one-hot members are handled separately as categorical
/// clauses. Every path must cover the instance.
std::vector<FeatureRange> aggregate_ranges(const PathSet& ps,
                                           const Eigen::VectorXd& instance,
                                           const FeatureSpace& space);

/// Categorical feature handling: a group whose active member is pinned to 1
/// by some path yields an equals clause; otherwise members pinned to 0 yield
/// a not-in clause; unconstrained groups are omitted.
std::vector<CategoricalClause> handle_categorical(const PathSet& ps,
                                                  const Eigen::VectorXd& instance,
                                                  const FeatureSpace& space);

/// Assemble a rule. An empty antecedent with a nonempty consequent is legal
/// (a path set with no conditions) but callers may want to surface it.
Rule build_rule(std::vector<FeatureRange> ranges,
                std::vector<CategoricalClause> clauses, Labelset consequent);

/// True when the row lies inside every range and satisfies every clause.
bool rule_satisfied(const Rule& rule, const Eigen::VectorXd& row,
                    const FeatureSpace& space);

/// Draw one instance consistent with the rule: in-rule features uniform
/// inside their interval, absent features uniform over their whole domain,
/// categorical groups uniform over the clause-allowed categories.
Eigen::VectorXd sample_in_rule(const Rule& rule, const FeatureSpace& space,
                               Rng& rng);

struct Counterexample {
    Eigen::VectorXd x;
    int label;  // consequent label that flipped
};

struct ConclusivenessReport {
    bool holds = true;
    std::size_t samples = 0;
    bool tested = false;  // false when n_samples == 0 (vacuous)
    std::optional<Counterexample> counterexample;
};

/// Sampling check of conclusiveness: perturb the instance inside the rule
/// n_samples times and verify the forest keeps predicting every consequent
/// label. Returns the first counterexample found, if any.
ConclusivenessReport check_conclusiveness(const Rule& rule, const Forest& forest,
                                          const Eigen::VectorXd& instance,
                                          std::size_t n_samples,
                                          std::uint64_t seed);

} // namespace qf
