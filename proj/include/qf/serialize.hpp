#pragma once

#include <string>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qf/dataset.hpp"
#include "qf/evalx.hpp"
#include "qf/forest.hpp"
#include "qf/rules.hpp"
#include "qf/strategies.hpp"

namespace qf {

// Versioned forest model JSON with explicit node arrays; round-trips exactly.
nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j);
void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

// Rule JSON: {"if":[{"feature":...,"low":...,"high":...} |
// {"cat":...,"op":"eq|notin","values":[...]}], "then":[...], "length":N}.
// Interval endpoints are reported in original units.
nlohmann::json rule_to_json(const Rule& rule, const FeatureSpace& space,
                            const std::vector<std::string>& label_names);

// Human-readable form, endpoints rounded to 4 significant digits:
// "If 2.5 <= Type <= 3 and ... then TWF PWF OSF".
std::string rule_to_text(const Rule& rule, const FeatureSpace& space,
                         const std::vector<std::string>& label_names);

nlohmann::json explanation_to_json(const Explanation& expl, const Forest& forest,
                                   bool emit_paths = false);
std::string explanation_to_text(const Explanation& expl, const Forest& forest);

// Instance given in original units, keyed by feature name; categorical
// features take their category as a string. Returns a vector in model units.
Eigen::VectorXd instance_from_json(const FeatureSpace& space,
                                   const nlohmann::json& j);

std::string format_significant(double v, int digits = 4);

} // namespace qf
