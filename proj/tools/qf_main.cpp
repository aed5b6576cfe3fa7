// qf - train, explain and evaluate multi-label random forests with
// quorum-backed conjunctive rule explanations.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qf/dataset.hpp"
#include "qf/errors.hpp"
#include "qf/evalx.hpp"
#include "qf/forest.hpp"
#include "qf/serialize.hpp"
#include "qf/strategies.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 42;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitInconclusive = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("QF_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw qf::ArgError("QF_SEED must be an unsigned integer");
        }
    }
    return kDefaultSeed;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qf::IoError("cannot write file: " + path);
    out << text;
    if (!out) throw qf::IoError("write failed: " + path);
}

qf::StrategyKind parse_strategy(const std::string& s) {
    if (s == "label") return qf::StrategyKind::PerLabel;
    if (s == "all") return qf::StrategyKind::All;
    if (s == "subsets") return qf::StrategyKind::Subsets;
    throw qf::ArgError("unknown strategy: " + s + " (label|all|subsets)");
}

struct CommonData {
    std::string data_path;
    std::string schema_path;
};

qf::Dataset load_raw(const CommonData& cd) {
    if (cd.schema_path.empty())
        throw qf::ArgError("--schema is required with --data");
    qf::SidecarSchema schema = qf::SidecarSchema::from_file(cd.schema_path);
    return qf::load_csv(cd.data_path, schema);
}

int cmd_train(const CommonData& cd, int trees, int depth, std::uint64_t seed,
              const std::string& out_path) {
    if (trees < 1) throw qf::ArgError("--trees must be >= 1");
    qf::Dataset ds = qf::preprocess(load_raw(cd));

    qf::TrainConfig cfg;
    cfg.n_trees = trees;
    cfg.max_depth = depth;
    cfg.seed = seed;
    qf::Forest forest = qf::train_forest(ds, cfg);
    qf::save_forest(forest, out_path);

    std::cout << "trees: " << forest.n_trees() << '\n';
    std::cout << "quorum: " << qf::quorum(forest.n_trees()).value << '\n';
    Eigen::VectorXd rates = Eigen::VectorXd::Zero(forest.n_labels());
    for (Eigen::Index i = 0; i < ds.n_rows(); ++i)
        rates += qf::vote_counts(forest, ds.row(i)).cast<double>() /
                 forest.n_trees();
    rates /= static_cast<double>(ds.n_rows());
    for (int l = 0; l < forest.n_labels(); ++l)
        std::cout << "label " << forest.label_names[l]
                  << ": mean train vote rate "
                  << qf::format_significant(rates[l], 4) << '\n';
    std::cout << "model written to " << out_path << '\n';
    return 0;
}

struct ReduceFlags {
    bool no_association = false;
    bool no_clustering = false;
    int cluster_k = 2;  // 0 = silhouette auto-selection

    void apply(qf::ReductionConfig& rc) const {
        rc.association_enabled = !no_association;
        rc.clustering_enabled = !no_clustering;
        rc.clustering_k = cluster_k;
    }
};

void add_reduce_flags(CLI::App* cmd, ReduceFlags& rf) {
    cmd->add_flag("--no-association", rf.no_association,
                  "skip the association reduction stage");
    cmd->add_flag("--no-clustering", rf.no_clustering,
                  "skip the clustering reduction stage");
    cmd->add_option("--cluster-k", rf.cluster_k,
                    "k-medoids cluster count (0 = silhouette auto over 2..5)");
}

int cmd_explain(const CommonData& cd, const std::string& model_path,
                long row, const std::string& instance_json,
                const std::string& strategy, int max_subsets, double min_support,
                const ReduceFlags& rf, bool emit_paths, long check_samples,
                std::uint64_t seed, const std::string& out_path) {
    qf::StrategyConfig cfg;
    cfg.kind = parse_strategy(strategy);
    cfg.max_subsets = max_subsets;
    cfg.min_support = min_support;
    cfg.seed = seed;
    cfg.reduction.seed = seed;
    cfg.reduction.association_min_support = min_support;
    rf.apply(cfg.reduction);

    qf::Forest forest = qf::load_forest(model_path);

    Eigen::VectorXd x;
    qf::Dataset raw;
    bool have_data = !cd.data_path.empty();
    if (have_data) raw = load_raw(cd);

    if (!instance_json.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(instance_json);
        } catch (const nlohmann::json::exception& e) {
            throw qf::ParseError(std::string("invalid instance JSON: ") + e.what());
        }
        x = qf::instance_from_json(forest.space, j);
    } else if (row >= 0) {
        if (!have_data)
            throw qf::ArgError("--row needs --data/--schema");
        if (row >= raw.n_rows())
            throw qf::ArgError("--row out of range (dataset has " +
                               std::to_string(raw.n_rows()) + " rows)");
        x = qf::row_to_model_units(raw, row, forest.space);
    } else {
        throw qf::ArgError("provide --row or --instance");
    }

    qf::Explanation expl;
    if (cfg.kind == qf::StrategyKind::Subsets) {
        if (!have_data)
            throw qf::ArgError("--strategy subsets needs --data/--schema for "
                               "training labels");
        expl = qf::explain_subsets(forest, x, cfg, raw.labels);
    } else {
        expl = qf::explain(forest, x, cfg);
    }

    std::cout << qf::explanation_to_text(expl, forest);
    nlohmann::json j = qf::explanation_to_json(expl, forest, emit_paths);

    if (check_samples > 0) {
        for (const qf::Rule& rule : expl.rules) {
            auto report = qf::check_conclusiveness(
                rule, forest, x, static_cast<std::size_t>(check_samples), seed);
            if (!report.holds) {
                std::cerr << "conclusiveness violated for rule '"
                          << qf::rule_to_text(rule, forest.space,
                                              forest.label_names)
                          << "' (label "
                          << forest.label_names[report.counterexample->label]
                          << " flipped)\n";
                return kExitInconclusive;
            }
        }
        std::cout << "conclusiveness: " << expl.rules.size() << " rule(s) x "
                  << check_samples << " samples, no counterexample\n";
        j["conclusiveness_samples"] = check_samples;
    }

    if (!out_path.empty()) {
        write_text(out_path, j.dump(1) + "\n");
        std::cout << "explanation written to " << out_path << '\n';
    } else {
        std::cout << j.dump(1) << '\n';
    }
    return 0;
}

int cmd_evaluate(const CommonData& cd, int folds, const std::string& strategies,
                 int trees, int depth, const ReduceFlags& rf, std::uint64_t seed,
                 const std::string& out_prefix, bool exact_labelset) {
    if (folds < 2) throw qf::ArgError("--folds must be >= 2");
    if (trees < 1) throw qf::ArgError("--trees must be >= 1");
    qf::Dataset ds = qf::preprocess(load_raw(cd));

    qf::EvalConfig cfg;
    cfg.folds = folds;
    cfg.seed = seed;
    cfg.forest.n_trees = trees;
    cfg.forest.max_depth = depth;
    cfg.strategy.seed = seed;
    cfg.strategy.reduction.seed = seed;
    rf.apply(cfg.strategy.reduction);
    cfg.mode = exact_labelset ? qf::PrecisionMode::ExactLabelset
                              : qf::PrecisionMode::ConsequentPositive;
    std::string item;
    std::istringstream ss(strategies);
    while (std::getline(ss, item, ','))
        if (!item.empty()) cfg.strategies.push_back(parse_strategy(item));
    if (cfg.strategies.empty()) throw qf::ArgError("--strategies is empty");

    auto rows = qf::evaluate(ds, cfg);
    std::string md = qf::metrics_markdown(rows);
    std::cout << md;
    if (!out_prefix.empty()) {
        write_text(out_prefix + ".csv", qf::metrics_csv(rows));
        write_text(out_prefix + ".md", md);
        std::cout << "written " << out_prefix << ".csv and " << out_prefix
                  << ".md\n";
    }
    return 0;
}

int cmd_generate(long n, std::uint64_t seed, const std::string& out_path,
                 const std::string& schema_out) {
    if (n < 1) throw qf::ArgError("--n must be >= 1");
    qf::Dataset ds = qf::generate_ai4i_like(static_cast<std::size_t>(n), seed);
    qf::save_csv(ds, out_path);
    if (!schema_out.empty()) write_text(schema_out, qf::sidecar_json(ds));
    double card = ds.labels.cast<double>().sum() / static_cast<double>(ds.n_rows());
    std::cout << "generated " << ds.n_rows() << " rows, label cardinality "
              << qf::format_significant(card, 4) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quorum-backed rule explanations for multi-label random forests"};
    app.require_subcommand(1);

    CommonData cd;
    std::uint64_t seed = 0;
    bool seed_given = false;

    // train
    auto* train = app.add_subcommand("train", "train a forest and save it as JSON");
    int tr_trees = 100, tr_depth = 0;
    std::string tr_out;
    train->add_option("--data", cd.data_path, "training CSV")->required();
    train->add_option("--schema", cd.schema_path, "sidecar schema JSON")->required();
    train->add_option("--trees", tr_trees, "number of trees");
    train->add_option("--depth", tr_depth, "max depth (0 = unbounded)");
    train->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
        seed_given = true;
    });
    train->add_option("--out", tr_out, "output model path")->required();

    // explain
    auto* explain = app.add_subcommand("explain", "explain one instance");
    std::string ex_model, ex_instance, ex_strategy = "label", ex_out;
    long ex_row = -1, ex_check = 0;
    int ex_max_subsets = 10;
    double ex_min_support = 0.1;
    bool ex_emit_paths = false;
    ReduceFlags ex_reduce;
    explain->add_option("--model", ex_model, "model JSON path")->required();
    explain->add_option("--data", cd.data_path, "CSV holding the instance row");
    explain->add_option("--schema", cd.schema_path, "sidecar schema JSON");
    explain->add_option("--row", ex_row, "row index into --data (0-based)");
    explain->add_option("--instance", ex_instance,
                        "inline instance JSON in original units");
    explain->add_option("--strategy", ex_strategy, "label|all|subsets");
    explain->add_option("--max-subsets", ex_max_subsets,
                        "cap on explained label subsets");
    explain->add_option("--min-support", ex_min_support,
                        "min support for frequent mining");
    explain->add_flag("--emit-paths", ex_emit_paths,
                      "include retained paths in the JSON");
    add_reduce_flags(explain, ex_reduce);
    explain->add_option("--check", ex_check,
                        "conclusiveness samples per rule (0 = skip)");
    explain->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
        seed_given = true;
    });
    explain->add_option("--out", ex_out, "write explanation JSON here");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validated metrics");
    int ev_folds = 10, ev_trees = 100, ev_depth = 0;
    std::string ev_strategies = "all,label,subsets", ev_prefix;
    bool ev_exact = false;
    ReduceFlags ev_reduce;
    evaluate->add_option("--data", cd.data_path, "dataset CSV")->required();
    evaluate->add_option("--schema", cd.schema_path, "sidecar schema JSON")->required();
    evaluate->add_option("--folds", ev_folds, "cross-validation folds");
    evaluate->add_option("--strategies", ev_strategies, "comma list: all,label,subsets");
    evaluate->add_option("--trees", ev_trees, "trees per fold");
    evaluate->add_option("--depth", ev_depth, "max depth (0 = unbounded)");
    evaluate->add_flag("--exact-labelset", ev_exact,
                       "precision requires the full labelset to match");
    add_reduce_flags(evaluate, ev_reduce);
    evaluate->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
        seed_given = true;
    });
    evaluate->add_option("--out-prefix", ev_prefix, "write <prefix>.csv and <prefix>.md");

    // generate
    auto* generate = app.add_subcommand("generate",
                                        "write a synthetic predictive-maintenance CSV");
    long gen_n = 339;
    std::string gen_out, gen_schema_out;
    generate->add_option("--n", gen_n, "rows to generate");
    generate->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
        seed_given = true;
    });
    generate->add_option("--out", gen_out, "output CSV path")->required();
    generate->add_option("--schema-out", gen_schema_out, "sidecar schema path");

    try {
        app.parse(argc, argv);
        if (!seed_given) seed = default_seed();
        if (train->parsed())
            return cmd_train(cd, tr_trees, tr_depth, seed, tr_out);
        if (explain->parsed())
            return cmd_explain(cd, ex_model, ex_row, ex_instance, ex_strategy,
                               ex_max_subsets, ex_min_support, ex_reduce,
                               ex_emit_paths, ex_check, seed, ex_out);
        if (evaluate->parsed())
            return cmd_evaluate(cd, ev_folds, ev_strategies, ev_trees, ev_depth,
                                ev_reduce, seed, ev_prefix, ev_exact);
        if (generate->parsed())
            return cmd_generate(gen_n, seed, gen_out, gen_schema_out);
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const qf::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const qf::ArgError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const qf::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const qf::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
