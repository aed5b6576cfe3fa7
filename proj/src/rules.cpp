#include "qf/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "qf/errors.hpp"
#include "qf/reduce.hpp"

namespace qf {

namespace {

double close_open_edge(double t) {
    return std::nextafter(t, std::numeric_limits<double>::infinity());
}

}  // namespace

std::vector<FeatureRange> aggregate_ranges(const PathSet& ps,
                                           const Eigen::VectorXd& instance,
                                           const FeatureSpace& space) {
    // feature -> running [max of per-path lows, min of per-path highs]
    std::map<int, std::pair<double, double>> agg;

    for (const DecisionPath& path : ps.paths) {
        std::map<int, std::pair<double, double>> local;
        for (const Condition& c : path.conditions) {
            const Feature& f = space.features[c.feature];
            if (f.kind == FeatureKind::OneHotMember) continue;
            auto [it, fresh] = local.try_emplace(
                c.feature, std::make_pair(f.domain_lo, f.domain_hi));
            auto& [lo, hi] = it->second;
            if (c.op == CondOp::LessEq)
                hi = std::min(hi, c.threshold);
            else
                lo = std::max(lo, close_open_edge(c.threshold));
        }
        for (const auto& [feature, iv] : local) {
            auto [it, fresh] = agg.try_emplace(feature, iv);
            if (!fresh) {
                it->second.first = std::max(it->second.first, iv.first);
                it->second.second = std::min(it->second.second, iv.second);
            }
        }
    }

    std::vector<FeatureRange> out;
    out.reserve(agg.size());
    for (const auto& [feature, iv] : agg) {
        if (iv.first > iv.second)
            throw std::logic_error("aggregate_ranges: empty interval; paths do "
                                   "not cover a common instance");
        if (instance[feature] < iv.first || instance[feature] > iv.second)
            throw std::logic_error("aggregate_ranges: instance outside its own "
                                   "range; paths do not cover the instance");
        out.push_back({feature, iv.first, iv.second});
    }
    return out;
}

std::vector<CategoricalClause> handle_categorical(const PathSet& ps,
                                                  const Eigen::VectorXd& instance,
                                                  const FeatureSpace& space) {
    std::vector<CategoricalClause> out;
    for (const auto& [source, member_names] : space.categorical_groups) {
        std::vector<int> members = space.group_member_indices(source);

        bool active_pinned = false;
        std::string active_value;
        std::set<int> pinned_zero;
        for (const DecisionPath& path : ps.paths) {
            for (const Condition& c : path.conditions) {
                const Feature& f = space.features[c.feature];
                if (f.kind != FeatureKind::OneHotMember || f.source != source)
                    continue;
                if (c.op == CondOp::Greater && c.threshold < 1.0) {
                    // pins the member to 1; must be the instance's active one
                    if (instance[c.feature] <= 0.5)
                        throw std::logic_error(
                            "handle_categorical: path pins an inactive member");
                    active_pinned = true;
                    active_value = f.category;
                } else if (c.op == CondOp::LessEq && c.threshold < 1.0) {
                    if (instance[c.feature] > 0.5)
                        throw std::logic_error(
                            "handle_categorical: path excludes the active member");
                    pinned_zero.insert(c.feature);
                }
            }
        }

        if (active_pinned) {
            out.push_back({source, CatOp::Equals, {active_value}});
        } else if (!pinned_zero.empty()) {
            CategoricalClause clause{source, CatOp::NotIn, {}};
            for (int m : members)  // group member order
                if (pinned_zero.count(m))
                    clause.values.push_back(space.features[m].category);
            out.push_back(std::move(clause));
        }
    }
    return out;
}

Rule build_rule(std::vector<FeatureRange> ranges,
                std::vector<CategoricalClause> clauses, Labelset consequent) {
    std::sort(ranges.begin(), ranges.end(),
              [](const FeatureRange& a, const FeatureRange& b) {
                  return a.feature < b.feature;
              });
    Rule rule;
    rule.ranges = std::move(ranges);
    rule.cat_clauses = std::move(clauses);
    rule.consequent = std::move(consequent);
    return rule;
}

bool rule_satisfied(const Rule& rule, const Eigen::VectorXd& row,
                    const FeatureSpace& space) {
    for (const FeatureRange& r : rule.ranges)
        if (row[r.feature] < r.low || row[r.feature] > r.high) return false;
    for (const CategoricalClause& c : rule.cat_clauses) {
        std::string active = space.active_category(c.source, row);
        if (c.op == CatOp::Equals) {
            if (active != c.values.front()) return false;
        } else {
            for (const auto& v : c.values)
                if (active == v) return false;
        }
    }
    return true;
}

Eigen::VectorXd sample_in_rule(const Rule& rule, const FeatureSpace& space,
                               Rng& rng) {
    const auto F = static_cast<Eigen::Index>(space.features.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(F);

    std::map<int, const FeatureRange*> by_feature;
    for (const FeatureRange& r : rule.ranges) by_feature[r.feature] = &r;

    for (Eigen::Index j = 0; j < F; ++j) {
        const Feature& f = space.features[j];
        if (f.kind == FeatureKind::OneHotMember) continue;  // set per group
        auto it = by_feature.find(static_cast<int>(j));
        if (it != by_feature.end())
            x[j] = rng.in_range(it->second->low, it->second->high);
        else
            x[j] = rng.in_range(f.domain_lo, f.domain_hi);
    }

    for (const auto& [source, member_names] : space.categorical_groups) {
        std::vector<int> members = space.group_member_indices(source);
        const CategoricalClause* clause = nullptr;
        for (const CategoricalClause& c : rule.cat_clauses)
            if (c.source == source) clause = &c;

        std::vector<int> allowed;
        if (clause && clause->op == CatOp::Equals) {
            for (int m : members)
                if (space.features[m].category == clause->values.front())
                    allowed.push_back(m);
        } else if (clause) {
            for (int m : members) {
                bool excluded = false;
                for (const auto& v : clause->values)
                    if (space.features[m].category == v) excluded = true;
                if (!excluded) allowed.push_back(m);
            }
        } else {
            allowed = members;
        }
        if (allowed.empty())
            throw std::logic_error("sample_in_rule: clause excludes every category");
        int pick = allowed[rng.below(allowed.size())];
        for (int m : members) x[m] = (m == pick) ? 1.0 : 0.0;
    }
    return x;
}

ConclusivenessReport check_conclusiveness(const Rule& rule, const Forest& forest,
                                          const Eigen::VectorXd& instance,
                                          std::size_t n_samples,
                                          std::uint64_t seed) {
    ConclusivenessReport report;
    report.samples = n_samples;
    report.tested = n_samples > 0;
    if (n_samples == 0) return report;

    Labelset original = predict(forest, instance);
    for (std::size_t l = 0; l < rule.consequent.size(); ++l)
        if (rule.consequent[l] && !original[l])
            throw ArgError("check_conclusiveness: consequent label not predicted "
                           "for this instance");

    Rng rng(seed);
    for (std::size_t s = 0; s < n_samples; ++s) {
        Eigen::VectorXd x = sample_in_rule(rule, forest.space, rng);
        Labelset pred = predict(forest, x);
        for (std::size_t l = 0; l < rule.consequent.size(); ++l) {
            if (rule.consequent[l] && !pred[l]) {
                report.holds = false;
                report.counterexample = Counterexample{x, static_cast<int>(l)};
                return report;
            }
        }
    }
    return report;
}

} // namespace qf
