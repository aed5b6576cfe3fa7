#include "qf/evalx.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>

#include "qf/errors.hpp"
#include "qf/fpm.hpp"
#include "qf/rng.hpp"

namespace qf {

namespace {

std::string fmt_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct MeanStd {
    double mean = 0.0, sd = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
             static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(var / static_cast<double>(xs.size()));
    return r;
}

}  // namespace

int rule_length(const Explanation& expl) {
    int total = 0;
    for (const Rule& r : expl.rules) total += r.length();
    return total;
}

double coverage(const Rule& rule, const Dataset& eval_set) {
    if (eval_set.n_rows() == 0) throw ArgError("coverage: empty eval set");
    Eigen::Index covered = 0;
    for (Eigen::Index i = 0; i < eval_set.n_rows(); ++i)
        if (rule_satisfied(rule, eval_set.row(i), eval_set.space)) ++covered;
    return static_cast<double>(covered) / static_cast<double>(eval_set.n_rows());
}

double coverage(const Explanation& expl, const Dataset& eval_set) {
    if (expl.rules.empty()) return 0.0;
    double sum = 0.0;
    for (const Rule& r : expl.rules) sum += coverage(r, eval_set);
    return sum / static_cast<double>(expl.rules.size());
}

double precision(const Rule& rule, const Forest& forest, const Dataset& eval_set,
                 PrecisionMode mode, bool* zero_coverage) {
    Eigen::Index covered = 0, correct = 0;
    for (Eigen::Index i = 0; i < eval_set.n_rows(); ++i) {
        Eigen::VectorXd row = eval_set.row(i);
        if (!rule_satisfied(rule, row, eval_set.space)) continue;
        ++covered;
        Labelset pred = predict(forest, row);
        bool ok = mode == PrecisionMode::ExactLabelset
                      ? pred == rule.consequent
                      : pred.covers(rule.consequent);
        if (ok) ++correct;
    }
    if (zero_coverage) *zero_coverage = covered == 0;
    if (covered == 0) return 1.0;  // undefined; reported as 1.0 and flagged
    return static_cast<double>(correct) / static_cast<double>(covered);
}

double precision(const Explanation& expl, const Forest& forest,
                 const Dataset& eval_set, PrecisionMode mode,
                 std::size_t* zero_coverage_rules) {
    if (expl.rules.empty()) return 1.0;
    double sum = 0.0;
    for (const Rule& r : expl.rules) {
        bool zero = false;
        sum += precision(r, forest, eval_set, mode, &zero);
        if (zero && zero_coverage_rules) ++*zero_coverage_rules;
    }
    return sum / static_cast<double>(expl.rules.size());
}

std::vector<std::vector<Eigen::Index>> fold_partition(Eigen::Index n, int folds,
                                                      std::uint64_t seed) {
    if (folds < 2) throw ArgError("fold_partition: folds must be >= 2");
    if (n < folds) throw ArgError("fold_partition: fewer rows than folds");

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
        auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(idx[i], idx[j]);
    }

    std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
    for (std::size_t k = 0; k < idx.size(); ++k)
        out[k % static_cast<std::size_t>(folds)].push_back(idx[k]);
    for (auto& fold : out) std::sort(fold.begin(), fold.end());
    return out;
}

namespace {

Dataset select_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.space = ds.space;
    out.label_names = ds.label_names;
    out.scaled = ds.scaled;
    out.rows.resize(static_cast<Eigen::Index>(rows.size()), ds.n_features());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()), ds.n_labels());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.rows.row(static_cast<Eigen::Index>(i)) = ds.rows.row(rows[i]);
        out.labels.row(static_cast<Eigen::Index>(i)) = ds.labels.row(rows[i]);
    }
    return out;
}

}  // namespace

std::vector<MetricsRow> evaluate(const Dataset& ds, const EvalConfig& cfg) {
    if (cfg.strategies.empty()) throw ArgError("evaluate: no strategies");
    auto folds = fold_partition(ds.n_rows(), cfg.folds, cfg.seed);

    struct Acc {
        std::vector<double> L, C, P, T;  // one entry per fold
        std::size_t zero_cov = 0, empty = 0, skipped = 0;
    };
    std::vector<Acc> acc(cfg.strategies.size());

    Rng master(cfg.seed);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<Eigen::Index> train_idx;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f)
                train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        std::sort(train_idx.begin(), train_idx.end());

        Dataset train = select_rows(ds, train_idx);
        Dataset test = select_rows(ds, folds[f]);

        TrainConfig tc = cfg.forest;
        tc.seed = master.fork(f).next_u64();
        Forest forest = train_forest(train, tc);

        bool want_subsets =
            std::find(cfg.strategies.begin(), cfg.strategies.end(),
                      StrategyKind::Subsets) != cfg.strategies.end();
        std::vector<FrequentItemset> label_itemsets;
        if (want_subsets)
            label_itemsets = frequent_label_subsets(
                train.labels, cfg.strategy.min_support, cfg.strategy.subsets_min_size);

        std::vector<double> sumL(cfg.strategies.size(), 0.0),
            sumC(cfg.strategies.size(), 0.0), sumP(cfg.strategies.size(), 0.0),
            sumT(cfg.strategies.size(), 0.0);
        std::vector<std::size_t> nL(cfg.strategies.size(), 0),
            nCP(cfg.strategies.size(), 0);

        for (Eigen::Index i = 0; i < test.n_rows(); ++i) {
            Eigen::VectorXd x = test.row(i);
            if (!predict(forest, x).any()) {
                for (auto& a : acc) ++a.skipped;
                continue;
            }
            for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
                StrategyConfig sc = cfg.strategy;
                sc.kind = cfg.strategies[s];
                auto t0 = std::chrono::steady_clock::now();
                Explanation expl =
                    sc.kind == StrategyKind::Subsets
                        ? explain_subsets(forest, x, sc, label_itemsets)
                        : explain(forest, x, sc);
                sumT[s] += std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
                sumL[s] += rule_length(expl);
                ++nL[s];
                if (expl.rules.empty()) {
                    ++acc[s].empty;
                    continue;
                }
                sumC[s] += coverage(expl, test);
                sumP[s] += precision(expl, forest, test, cfg.mode, &acc[s].zero_cov);
                ++nCP[s];
            }
        }

        for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
            if (nL[s]) {
                acc[s].L.push_back(sumL[s] / static_cast<double>(nL[s]));
                acc[s].T.push_back(sumT[s] / static_cast<double>(nL[s]));
            }
            if (nCP[s]) {
                acc[s].C.push_back(sumC[s] / static_cast<double>(nCP[s]));
                acc[s].P.push_back(sumP[s] / static_cast<double>(nCP[s]));
            }
        }
    }

    std::vector<MetricsRow> rows;
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        MetricsRow r;
        r.strategy = cfg.strategies[s];
        MeanStd L = mean_std(acc[s].L), C = mean_std(acc[s].C),
                P = mean_std(acc[s].P), T = mean_std(acc[s].T);
        r.L_mean = L.mean; r.L_std = L.sd;
        r.C_mean = C.mean; r.C_std = C.sd;
        r.P_mean = P.mean; r.P_std = P.sd;
        r.T_mean = T.mean; r.T_std = T.sd;
        r.zero_coverage_rules = acc[s].zero_cov;
        r.empty_explanations = acc[s].empty;
        r.skipped_instances = acc[s].skipped;
        rows.push_back(r);
    }
    return rows;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out =
        "strategy,L_mean,L_std,C_mean,C_std,P_mean,P_std,T_mean,T_std\n";
    for (const auto& r : rows) {
        out += strategy_name(r.strategy);
        for (double v : {r.L_mean, r.L_std, r.C_mean, r.C_std, r.P_mean, r.P_std,
                         r.T_mean, r.T_std}) {
            out += ',';
            out += fmt_number(v);
        }
        out += '\n';
    }
    return out;
}

std::string metrics_markdown(const std::vector<MetricsRow>& rows) {
    auto cell = [](double mean, double sd) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f ± %.2f", mean, sd);
        return std::string(buf);
    };
    std::string out;
    out += "| Strategy | L | C | P | T (s) |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| ";
        switch (r.strategy) {
            case StrategyKind::PerLabel: out += "per-label"; break;
            case StrategyKind::All: out += "labelset"; break;
            case StrategyKind::Subsets: out += "subsets"; break;
        }
        out += " | " + cell(r.L_mean, r.L_std);
        out += " | " + cell(r.C_mean, r.C_std);
        out += " | " + cell(r.P_mean, r.P_std);
        out += " | " + cell(r.T_mean, r.T_std) + " |\n";
    }
    out += "\nL: conjuncts per explanation (summed over its rules). C/P: "
           "coverage and precision on the held-out fold, averaged over rules. "
           "T: seconds per explained instance, excluding training. All cells "
           "are mean ± std across folds.\n";
    bool flags = false;
    for (const auto& r : rows)
        if (r.zero_coverage_rules || r.empty_explanations || r.skipped_instances)
            flags = true;
    if (flags) {
        out += "\nFlags:\n";
        for (const auto& r : rows) {
            out += "- strategy '";
            out += strategy_name(r.strategy);
            out += "': zero-coverage rules " + std::to_string(r.zero_coverage_rules);
            out += ", empty explanations " + std::to_string(r.empty_explanations);
            out += ", skipped all-negative instances " +
                   std::to_string(r.skipped_instances) + "\n";
        }
    }
    return out;
}

} // namespace qf
