#include "qf/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qf/errors.hpp"

namespace qf {

using json = nlohmann::json;

namespace {

const char* kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::Numeric: return "numeric";
        case FeatureKind::Ordinal: return "ordinal";
        case FeatureKind::Categorical: return "categorical";
        case FeatureKind::OneHotMember: return "onehot";
    }
    return "?";
}

FeatureKind kind_from(const std::string& s) {
    if (s == "numeric") return FeatureKind::Numeric;
    if (s == "ordinal") return FeatureKind::Ordinal;
    if (s == "categorical") return FeatureKind::Categorical;
    if (s == "onehot") return FeatureKind::OneHotMember;
    throw ParseError("unknown feature kind: " + s);
}

json space_to_json(const FeatureSpace& space) {
    json feats = json::array();
    for (const auto& f : space.features) {
        json jf;
        jf["name"] = f.name;
        jf["kind"] = kind_name(f.kind);
        jf["lower"] = f.lower;
        jf["upper"] = f.upper;
        jf["domain_lo"] = f.domain_lo;
        jf["domain_hi"] = f.domain_hi;
        if (!f.categories.empty()) jf["categories"] = f.categories;
        if (!f.source.empty()) jf["source"] = f.source;
        if (!f.category.empty()) jf["category"] = f.category;
        if (!f.ordinal_map.empty()) jf["ordinal_map"] = f.ordinal_map;
        feats.push_back(std::move(jf));
    }
    return json{{"features", std::move(feats)},
                {"groups", space.categorical_groups}};
}

FeatureSpace space_from_json(const json& j) {
    FeatureSpace space;
    for (const auto& jf : j.at("features")) {
        Feature f;
        f.name = jf.at("name").get<std::string>();
        f.kind = kind_from(jf.at("kind").get<std::string>());
        f.lower = jf.at("lower").get<double>();
        f.upper = jf.at("upper").get<double>();
        f.domain_lo = jf.at("domain_lo").get<double>();
        f.domain_hi = jf.at("domain_hi").get<double>();
        if (jf.contains("categories"))
            f.categories = jf["categories"].get<std::vector<std::string>>();
        if (jf.contains("source")) f.source = jf["source"].get<std::string>();
        if (jf.contains("category")) f.category = jf["category"].get<std::string>();
        if (jf.contains("ordinal_map"))
            f.ordinal_map = jf["ordinal_map"].get<std::map<std::string, double>>();
        space.features.push_back(std::move(f));
    }
    if (j.contains("groups"))
        space.categorical_groups =
            j["groups"].get<std::map<std::string, std::vector<std::string>>>();
    return space;
}

}  // namespace

json forest_to_json(const Forest& forest) {
    json trees = json::array();
    for (const Tree& t : forest.trees) {
        json nodes = json::array();
        for (const TreeNode& nd : t.nodes) {
            if (nd.is_leaf()) {
                json votes = json::array();
                for (auto b : nd.votes.bits) votes.push_back(static_cast<int>(b));
                nodes.push_back(json{{"v", std::move(votes)}});
            } else {
                nodes.push_back(json{{"f", nd.feature},
                                     {"t", nd.threshold},
                                     {"l", nd.left},
                                     {"r", nd.right}});
            }
        }
        trees.push_back(json{{"nodes", std::move(nodes)}});
    }
    return json{{"version", 1},
                {"labels", forest.label_names},
                {"config",
                 {{"n_trees", forest.config.n_trees},
                  {"max_depth", forest.config.max_depth},
                  {"seed", forest.config.seed},
                  {"features_per_split", forest.config.features_per_split}}},
                {"space", space_to_json(forest.space)},
                {"trees", std::move(trees)}};
}

Forest forest_from_json(const json& j) {
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw ParseError("unsupported model version");
    Forest forest;
    forest.label_names = j.at("labels").get<std::vector<std::string>>();
    const json& c = j.at("config");
    forest.config.n_trees = c.at("n_trees").get<int>();
    forest.config.max_depth = c.at("max_depth").get<int>();
    forest.config.seed = c.at("seed").get<std::uint64_t>();
    forest.config.features_per_split = c.at("features_per_split").get<int>();
    forest.space = space_from_json(j.at("space"));
    for (const auto& jt : j.at("trees")) {
        Tree tree;
        for (const auto& jn : jt.at("nodes")) {
            TreeNode nd;
            if (jn.contains("v")) {
                for (const auto& b : jn["v"])
                    nd.votes.bits.push_back(b.get<int>() ? 1 : 0);
            } else {
                nd.feature = jn.at("f").get<int>();
                nd.threshold = jn.at("t").get<double>();
                nd.left = jn.at("l").get<int>();
                nd.right = jn.at("r").get<int>();
            }
            tree.nodes.push_back(std::move(nd));
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

void save_forest(const Forest& forest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << forest_to_json(forest).dump(1) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

Forest load_forest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
    return forest_from_json(j);
}

std::string format_significant(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::string(buf);
}

json rule_to_json(const Rule& rule, const FeatureSpace& space,
                  const std::vector<std::string>& label_names) {
    json antecedent = json::array();
    for (const FeatureRange& r : rule.ranges) {
        antecedent.push_back(json{{"feature", space.features[r.feature].name},
                                  {"low", space.to_original(r.feature, r.low)},
                                  {"high", space.to_original(r.feature, r.high)}});
    }
    for (const CategoricalClause& c : rule.cat_clauses) {
        antecedent.push_back(json{{"cat", c.source},
                                  {"op", c.op == CatOp::Equals ? "eq" : "notin"},
                                  {"values", c.values}});
    }
    json then = json::array();
    for (int l : rule.consequent.positives()) then.push_back(label_names[l]);
    return json{{"if", std::move(antecedent)},
                {"then", std::move(then)},
                {"length", rule.length()}};
}

std::string rule_to_text(const Rule& rule, const FeatureSpace& space,
                         const std::vector<std::string>& label_names) {
    std::string out = "If ";
    bool first = true;
    auto sep = [&] {
        if (!first) out += " and ";
        first = false;
    };
    for (const FeatureRange& r : rule.ranges) {
        sep();
        out += format_significant(space.to_original(r.feature, r.low));
        out += " <= ";
        out += space.features[r.feature].name;
        out += " <= ";
        out += format_significant(space.to_original(r.feature, r.high));
    }
    for (const CategoricalClause& c : rule.cat_clauses) {
        sep();
        if (c.op == CatOp::Equals) {
            out += c.source + " = " + c.values.front();
        } else {
            out += c.source + " != [";
            for (std::size_t i = 0; i < c.values.size(); ++i) {
                if (i) out += ", ";
                out += c.values[i];
            }
            out += "]";
        }
    }
    if (rule.empty_antecedent()) out += "{}";
    out += " then";
    for (int l : rule.consequent.positives()) out += " " + label_names[l];
    return out;
}

namespace {

json trace_to_json(const ReductionTrace& trace) {
    json stages = json::array();
    for (const StageTrace& s : trace.stages)
        stages.push_back(
            json{{"name", s.name}, {"before", s.before}, {"after", s.after}});
    return json{{"seed", trace.seed},
                {"under_quorum", trace.under_quorum},
                {"stages", std::move(stages)}};
}

json paths_to_json(const PathSet& ps, const FeatureSpace& space) {
    json out = json::array();
    for (const DecisionPath& p : ps.paths) {
        json conds = json::array();
        for (const Condition& c : p.conditions)
            conds.push_back(json{{"feature", space.features[c.feature].name},
                                 {"op", c.op == CondOp::LessEq ? "<=" : ">"},
                                 {"threshold", c.threshold}});
        json votes = json::array();
        for (auto b : p.votes.bits) votes.push_back(static_cast<int>(b));
        out.push_back(json{{"tree", p.tree_id},
                           {"leaf", p.leaf},
                           {"votes", std::move(votes)},
                           {"conditions", std::move(conds)}});
    }
    return out;
}

}  // namespace

json explanation_to_json(const Explanation& expl, const Forest& forest,
                         bool emit_paths) {
    json rules = json::array();
    for (const Rule& r : expl.rules)
        rules.push_back(rule_to_json(r, forest.space, forest.label_names));
    json traces = json::array();
    for (const ReductionTrace& t : expl.traces) traces.push_back(trace_to_json(t));

    json j{{"strategy", strategy_name(expl.strategy)},
           {"quorum", expl.q.value},
           {"n_trees", expl.q.source_size},
           {"fallback_used", expl.fallback_used},
           {"no_positive_labels", expl.no_positive_labels},
           {"no_activated_subsets", expl.no_activated_subsets},
           {"elapsed_seconds", expl.elapsed_seconds},
           {"rules", std::move(rules)},
           {"traces", std::move(traces)}};
    if (emit_paths) {
        json paths = json::array();
        for (const PathSet& ps : expl.retained)
            paths.push_back(paths_to_json(ps, forest.space));
        j["paths"] = std::move(paths);
    }
    return j;
}

std::string explanation_to_text(const Explanation& expl, const Forest& forest) {
    std::ostringstream out;
    out << "strategy: " << strategy_name(expl.strategy) << "  (quorum "
        << expl.q.value << " of " << expl.q.source_size << " trees)\n";
    if (expl.no_positive_labels) out << "(no positive labels; nothing to explain)\n";
    if (expl.no_activated_subsets) out << "(no activated frequent label subsets)\n";
    if (expl.fallback_used)
        out << "(under quorum: all " << expl.q.source_size
            << " paths used unreduced)\n";
    for (std::size_t i = 0; i < expl.rules.size(); ++i) {
        out << rule_to_text(expl.rules[i], forest.space, forest.label_names);
        if (expl.rules[i].empty_antecedent()) out << "  (empty antecedent)";
        out << '\n';
        if (i < expl.traces.size() && !expl.traces[i].stages.empty()) {
            out << "  paths:";
            for (const StageTrace& s : expl.traces[i].stages)
                out << ' ' << s.name << ' ' << s.before << "->" << s.after;
            out << '\n';
        }
    }
    return out.str();
}

Eigen::VectorXd instance_from_json(const FeatureSpace& space, const json& j) {
    if (!j.is_object()) throw ParseError("instance JSON must be an object");
    Eigen::VectorXd x(static_cast<Eigen::Index>(space.features.size()));
    for (std::size_t f = 0; f < space.features.size(); ++f) {
        const Feature& feat = space.features[f];
        auto idx = static_cast<Eigen::Index>(f);
        if (feat.kind == FeatureKind::OneHotMember) {
            if (!j.contains(feat.source))
                throw SchemaError("instance missing categorical value: " +
                                  feat.source);
            std::string v = j[feat.source].get<std::string>();
            x[idx] = (v == feat.category) ? 1.0 : 0.0;
        } else {
            if (!j.contains(feat.name))
                throw SchemaError("instance missing feature: " + feat.name);
            const json& cell = j[feat.name];
            double v;
            if (cell.is_string()) {
                auto it = feat.ordinal_map.find(cell.get<std::string>());
                if (it == feat.ordinal_map.end())
                    throw SchemaError("value not in ordinal map for '" +
                                      feat.name + "'");
                v = it->second;
            } else {
                v = cell.get<double>();
            }
            x[idx] = std::clamp(space.from_original(static_cast<int>(f), v),
                                feat.domain_lo, feat.domain_hi);
        }
    }
    // sanity: every one-hot group must have exactly one active member
    for (const auto& [source, members] : space.categorical_groups) {
        double sum = 0.0;
        for (int m : space.group_member_indices(source)) sum += x[m];
        if (sum != 1.0)
            throw SchemaError("unknown category for '" + source + "'");
    }
    return x;
}

} // namespace qf
