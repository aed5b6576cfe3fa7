#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qf/dataset.hpp"
#include "qf/forest.hpp"
#include "qf/strategies.hpp"

namespace qf {

/// What "correctly covered" means for a multi-label rule.
enum class PrecisionMode {
    ConsequentPositive,  // covered row's prediction has all consequent labels positive
    ExactLabelset,       // covered row's full predicted labelset equals the consequent
};

struct MetricsRow {
    StrategyKind strategy;
    double L_mean = 0, L_std = 0;
    double C_mean = 0, C_std = 0;
    double P_mean = 0, P_std = 0;
    double T_mean = 0, T_std = 0;  // seconds per explained instance
    std::size_t zero_coverage_rules = 0;
    std::size_t empty_explanations = 0;
    std::size_t skipped_instances = 0;  // all-zero predictions
};

/// Total conjunct count of an explanation: sum of member rule lengths.
int rule_length(const Explanation& expl);

/// Fraction of eval rows satisfying every range and clause of the rule.
double coverage(const Rule& rule, const Dataset& eval_set);
/// Mean over the explanation's rules.
double coverage(const Explanation& expl, const Dataset& eval_set);

/// Among covered rows, the fraction correctly covered (see PrecisionMode).
/// A rule covering nothing reports 1.0 and sets *zero_coverage.
double precision(const Rule& rule, const Forest& forest, const Dataset& eval_set,
                 PrecisionMode mode = PrecisionMode::ConsequentPositive,
                 bool* zero_coverage = nullptr);
double precision(const Explanation& expl, const Forest& forest,
                 const Dataset& eval_set,
                 PrecisionMode mode = PrecisionMode::ConsequentPositive,
                 std::size_t* zero_coverage_rules = nullptr);

struct EvalConfig {
    int folds = 10;
    std::vector<StrategyKind> strategies;
    TrainConfig forest;
    StrategyConfig strategy;
    std::uint64_t seed = 0;
    PrecisionMode mode = PrecisionMode::ConsequentPositive;
};

/// Seeded shuffle split into `folds` near-equal index blocks.
std::vector<std::vector<Eigen::Index>> fold_partition(Eigen::Index n, int folds,
                                                      std::uint64_t seed);

/// k-fold cross-validation: per fold, train on the complement, explain every
/// test instance with each strategy, and measure rule length, coverage,
/// precision (both on the held-out fold) and per-instance wall time. Reported
/// as mean +/- population std across folds. Deterministic per seed except the
/// T columns.
std::vector<MetricsRow> evaluate(const Dataset& ds, const EvalConfig& cfg);

std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string metrics_markdown(const std::vector<MetricsRow>& rows);

} // namespace qf
