#include "tg/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tg/agreement.hpp"
#include "tg/annotation.hpp"
#include "tg/config.hpp"
#include "tg/corpus_io.hpp"
#include "tg/error.hpp"
#include "tg/evaluation.hpp"
#include "tg/sampling.hpp"
#include "tg/simplex.hpp"
#include "tg/svg.hpp"
#include "tg/weights.hpp"

namespace tg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

std::uint64_t require_seed(const RunConfig& config, const CliArgs& args,
                           const std::string& command) {
    if (args.seed) return *args.seed;
    if (config.seed) return *config.seed;
    throw Error(ErrorKind::validation,
                "'" + command + "' is stochastic and needs --seed (or a config seed)");
}

RunConfig effective_config(const CliArgs& args) {
    RunConfig config = load_run_config(args.config_path);
    if (args.out_dir) config.paths.out_dir = *args.out_dir;
    return config;
}

std::string out_path(const RunConfig& config, const std::string& name) {
    fs::create_directories(config.paths.out_dir);
    return (fs::path(config.paths.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    out << content;
}

std::vector<Annotation> load_validated_annotations(const RunConfig& config) {
    const auto loaded = load_annotations(config.paths.annotations);
    std::vector<Annotation> annotations;
    annotations.reserve(loaded.records.size());
    for (const auto& raw : loaded.records) {
        annotations.push_back(validate_annotation(raw, config.medium_categories));
    }
    return annotations;
}

int cmd_sample(const CliArgs& args) {
    const RunConfig config = effective_config(args);
    const std::uint64_t seed = require_seed(config, args, "sample");
    const std::string hash = config_hash(config);
    const ArtifactMeta meta{"sample", hash, seed};

    const auto corpus = load_tweets(config.paths.tweets, config.window);
    const auto volumes = load_volumes(config.paths.volumes);

    SamplingPlan plan;
    plan.target_size_b = config.sampling.target_size_b;
    plan.target_size_f = config.sampling.target_size_f;
    plan.seed = seed;

    const auto base = stratified_daily_sample(corpus, volumes, plan.target_size_b, seed);
    const auto enriched = enrich(corpus, base.records, plan.target_size_f, seed);
    const auto study = build_study_set(base, enriched, plan);

    std::function<bool(const TweetRecord&)> flag;
    if (config.sampling.expert_flag == "k") {
        flag = [](const TweetRecord& rec) { return rec.k; };
    } else {
        throw Error(ErrorKind::validation, "unknown expert_flag predicate '" +
                                               config.sampling.expert_flag +
                                               "' (known: k)");
    }
    const auto expert =
        expert_subsample(study.records, config.sampling.expert_flag, flag,
                         config.sampling.expert_pos, config.sampling.expert_neg, seed);

    save_tweets(out_path(config, "b_tweets.jsonl"), base.records, &meta);
    save_tweets(out_path(config, "f_tweets.jsonl"), enriched, &meta);
    save_tweets(out_path(config, "a_tweets.jsonl"), study.records, &meta);
    save_tweets(out_path(config, "e_tweets.jsonl"), expert.records, &meta);

    json manifest = json::parse(study.manifest_json);
    manifest["command"] = "sample";
    manifest["config_hash"] = hash;
    write_text(out_path(config, "sample_manifest.json"), manifest.dump(2) + "\n");

    json expert_manifest;
    expert_manifest["command"] = "sample";
    expert_manifest["config_hash"] = hash;
    expert_manifest["flag"] = expert.flag_name;
    expert_manifest["n_pos"] = config.sampling.expert_pos;
    expert_manifest["n_neg"] = config.sampling.expert_neg;
    expert_manifest["seed"] = seed;
    expert_manifest["size"] = expert.records.size();
    write_text(out_path(config, "expert_manifest.json"), expert_manifest.dump(2) + "\n");

    std::cout << "sample: |B|=" << base.records.size() << " |F|=" << enriched.size()
              << " |A|=" << study.records.size() << " |E|=" << expert.records.size()
              << " -> " << config.paths.out_dir << "\n";
    return 0;
}

int cmd_weigh(const CliArgs& args) {
    const RunConfig config = effective_config(args);
    const ArtifactMeta meta{"weigh", config_hash(config), std::nullopt};

    const auto corpus = load_tweets(config.paths.tweets, config.window);
    const auto study =
        load_tweets(out_path(config, "a_tweets.jsonl"), config.window);
    const auto volumes = load_volumes(config.paths.volumes);

    const auto tables = estimate_weight_tables(corpus, study, volumes,
                                               config.compat.eq19_as_printed);
    const auto assignment = importance_weights(study, tables);

    save_weights_csv(out_path(config, "weights.csv"), assignment, &meta);
    save_weight_tables_json(out_path(config, "tables.json"), tables, &meta);

    std::cout << "weigh: " << assignment.entries.size()
              << " weights, covered mass " << tables.covered_mass << "\n";
    return 0;
}

int cmd_aggregate(const CliArgs& args) {
    const RunConfig config = effective_config(args);
    const std::uint64_t seed = require_seed(config, args, "aggregate");
    const ArtifactMeta meta{"aggregate", config_hash(config), seed};

    const auto annotations = load_validated_annotations(config);
    const BinaryOrder order = config.compat.vote_then_conflate
                                  ? BinaryOrder::vote_then_conflate
                                  : BinaryOrder::conflate_then_vote;

    std::vector<AggregatedLabel> rows;
    for (Cohort cohort : {Cohort::crowd, Cohort::expert}) {
        std::vector<Annotation> subset;
        for (const auto& ann : annotations) {
            if (ann.cohort == cohort) subset.push_back(ann);
        }
        if (subset.empty()) continue;
        const auto selection = select_raters(subset, config.n_target, seed);
        for (const auto& counts : counts_from_selection(selection)) {
            for (MajorityMode mode :
                 {MajorityMode::three_class, MajorityMode::binary_conflated}) {
                AggregatedLabel row;
                row.guid = counts.tweet_guid;
                row.cohort = cohort;
                row.mode = mode;
                row.label = majority_label(counts, mode, order);
                row.crowd_score = crowd_score(counts);
                row.n_raters = counts.n_raters();
                rows.push_back(std::move(row));
            }
        }
    }
    save_aggregated_labels(out_path(config, "aggregated_labels.csv"), rows, &meta);
    std::cout << "aggregate: " << rows.size() << " label rows\n";
    return 0;
}

int cmd_agree(const CliArgs& args) {
    const RunConfig config = effective_config(args);
    const std::uint64_t seed = require_seed(config, args, "agree");
    const ArtifactMeta meta{"agree", config_hash(config), seed};

    const auto annotations = load_validated_annotations(config);

    WeightAssignment weights;
    const WeightAssignment* weights_ptr = nullptr;
    if (config.compat.weighted_agreement) {
        weights = load_weights_csv(out_path(config, "weights.csv"));
        weights_ptr = &weights;
    }

    const auto report = agreement_report(annotations, config.n_target, seed, weights_ptr);
    save_agreement_report_json(out_path(config, "agreement_report.json"), report, &meta);

    // Per-tweet dump and simplex scatter for the crowd's severity answers.
    std::vector<Annotation> crowd;
    for (const auto& ann : annotations) {
        if (ann.cohort == Cohort::crowd) crowd.push_back(ann);
    }
    const auto selection = select_raters(crowd, config.n_target, seed);
    const auto counts = counts_from_selection(selection);

    if (counts.empty()) {
        write_text(out_path(config, "kappa_per_tweet.csv"),
                   meta.to_comment() + "\nguid,kappa_t\n");
    } else {
        const auto kappa = fleiss_kappa(counts);
        save_kappa_dump_csv(out_path(config, "kappa_per_tweet.csv"), kappa, &meta);
    }

    const auto points = to_simplex_many(counts, config.jitter, seed);
    save_simplex_csv(out_path(config, "simplex_points.csv"), points, &meta);
    write_text(out_path(config, "simplex.svg"), render_simplex_svg(points));

    std::cout << "agree: " << report.rows.size() << " report rows over "
              << counts.size() << " crowd tweets\n";
    return 0;
}

ScoreTable classifier_scores(const RunConfig& config,
                             const std::vector<std::string>& guids) {
    const std::string& source = config.paths.scores;
    if (source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0) {
        const auto transport = make_http_transport(source);
        return fetch_scores(*transport, config.classifier.name, guids,
                            config.classifier.batch_size, config.classifier.kind);
    }
    return load_scores_csv(source, config.classifier.name, config.classifier.kind);
}

int cmd_evaluate(const CliArgs& args) {
    const RunConfig config = effective_config(args);
    const ArtifactMeta meta{"evaluate", config_hash(config), std::nullopt};

    const auto aggregated =
        load_aggregated_labels(out_path(config, "aggregated_labels.csv"));

    std::map<Cohort, std::map<std::string, ContainAbuse>> reference;
    std::map<std::string, double> crowd_scores;
    for (const auto& row : aggregated) {
        if (row.mode != MajorityMode::three_class) continue;
        reference[row.cohort][row.guid] = parse_contain_abuse(row.label);
        if (row.cohort == Cohort::crowd) crowd_scores[row.guid] = row.crowd_score;
    }
    if (reference.empty()) {
        throw Error(ErrorKind::validation, "aggregated labels contain no three_class rows");
    }

    std::vector<std::string> labeled_guids;
    for (const auto& [cohort, labels] : reference) {
        (void)cohort;
        for (const auto& [guid, label] : labels) {
            (void)label;
            labeled_guids.push_back(guid);
        }
    }
    const ScoreTable scores = classifier_scores(config, labeled_guids);

    WeightAssignment weights;
    const WeightAssignment* weights_ptr = nullptr;
    if (fs::exists(out_path(config, "weights.csv"))) {
        weights = load_weights_csv(out_path(config, "weights.csv"));
        weights_ptr = &weights;
    }

    std::vector<EvalReport> rows;
    for (const auto& [cohort, labels] : reference) {
        if (labels.empty()) continue;
        if (weights_ptr) {
            rows.push_back(evaluate_classifier(config.classifier.name, scores, labels,
                                               cohort, config.conflation, weights_ptr));
        }
        rows.push_back(evaluate_classifier(config.classifier.name, scores, labels, cohort,
                                           config.conflation, nullptr));
    }

    // The crowd's consensus score read as a classifier, judged by experts.
    const auto crowd_it = reference.find(Cohort::crowd);
    const auto expert_it = reference.find(Cohort::expert);
    if (crowd_it != reference.end() && expert_it != reference.end() &&
        !crowd_scores.empty()) {
        ScoreTable crowd_table;
        crowd_table.classifier_name = "crowd";
        crowd_table.kind = ScoreKind::probability;
        crowd_table.entries = crowd_scores;
        if (weights_ptr) {
            rows.push_back(evaluate_classifier("crowd", crowd_table, expert_it->second,
                                               Cohort::expert, config.conflation,
                                               weights_ptr));
        }
        rows.push_back(evaluate_classifier("crowd", crowd_table, expert_it->second,
                                           Cohort::expert, config.conflation, nullptr));
    }
    save_eval_report_json(out_path(config, "eval_report.json"), rows, &meta);

    // PR curve artifact for the configured reference cohort.
    const auto curve_ref = reference.find(config.reference_cohort);
    if (curve_ref != reference.end() && !curve_ref->second.empty()) {
        std::map<std::string, bool> binary;
        for (const auto& [guid, label] : curve_ref->second) {
            if (scores.entries.count(guid)) {
                binary.emplace(guid, conflate_label(label, config.conflation));
            }
        }
        const PRCurve curve = pr_curve(scores, binary, weights_ptr);
        save_pr_curve_csv(out_path(config, "pr_curve.csv"), curve, &meta);
        write_text(out_path(config, "pr_curve.svg"), render_pr_curve_svg(curve));
    }

    std::cout << "evaluate: " << rows.size() << " report rows\n";
    return 0;
}

int cmd_simulate(const CliArgs& args) {
    const RunConfig config = effective_config(args);
    const std::uint64_t seed = require_seed(config, args, "simulate");
    const std::string hash = config_hash(config);
    const ArtifactMeta meta{"simulate", hash, seed};

    if (config.simulate.n_raters < 2) {
        throw Error(ErrorKind::validation, "simulate needs n_raters >= 2");
    }
    if (config.simulate.n_tweets < 2) {
        throw Error(ErrorKind::validation, "simulate needs n_tweets >= 2");
    }

    json report;
    report["command"] = "simulate";
    report["config_hash"] = hash;
    report["seed"] = seed;
    report["p"] = config.simulate.p;
    report["n_tweets"] = config.simulate.n_tweets;
    report["n_raters"] = config.simulate.n_raters;

    const struct {
        const char* key;
        const char* csv_name;
        std::vector<AnnotationCounts> counts;
    } runs[] = {
        {"perfect", "sim_perfect_points.csv",
         simulate_perfect(config.simulate.p, config.simulate.n_tweets,
                          config.simulate.n_raters, seed)},
        {"chance", "sim_chance_points.csv",
         simulate_chance(config.simulate.p, config.simulate.n_tweets,
                         config.simulate.n_raters, seed)},
    };
    for (const auto& run : runs) {
        const auto kappa = fleiss_kappa(run.counts);

        std::vector<std::vector<int>> matrix;
        matrix.reserve(run.counts.size());
        for (const auto& counts : run.counts) {
            std::vector<int> row;
            row.reserve(counts.n_raters());
            for (int c = 0; c < kNumClasses; ++c) {
                for (std::uint32_t i = 0; i < counts.a[static_cast<std::size_t>(c)]; ++i) {
                    row.push_back(c);
                }
            }
            matrix.push_back(std::move(row));
        }
        const auto icc = icc_1k(matrix);

        json section;
        section["kappa"] = kappa.kappa_overall;
        section["kappa_degenerate"] = kappa.degenerate;
        section["icc"] = icc.degenerate ? json(nullptr) : json(icc.icc);
        section["icc_degenerate"] = icc.degenerate;
        report[run.key] = std::move(section);

        const auto points = to_simplex_many(run.counts, config.jitter, seed);
        save_simplex_csv(out_path(config, run.csv_name), points, &meta);
    }

    write_text(out_path(config, "simulate_report.json"), report.dump(2) + "\n");
    std::cout << "simulate: " << config.simulate.n_tweets << " tweets per baseline\n";
    return 0;
}

int cmd_plot(const std::string& kind, const std::string& in_path,
             const std::string& out_file) {
    std::string svg;
    if (kind == "simplex") {
        svg = render_simplex_svg(load_simplex_csv(in_path));
    } else {
        svg = render_pr_curve_svg(load_pr_curve_csv(in_path));
    }
    write_text(out_file, svg);
    std::cout << "plot: wrote " << out_file << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Crowd-sourced abuse annotation toolkit"};
    app.require_subcommand(1);

    CliArgs args;
    std::string plot_kind, plot_in, plot_out;

    const auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", args.config_path, "JSON config file")->required();
        sub->add_option("--out-dir", [&args](const std::vector<std::string>& v) {
            args.out_dir = v.back();
            return true;
        }, "override paths.out_dir");
        if (with_seed) {
            sub->add_option("--seed", [&args](const std::vector<std::string>& v) {
                args.seed = std::stoull(v.back());
                return true;
            }, "stochastic seed (overrides config)");
        }
    };

    auto* sample = app.add_subcommand("sample", "draw the stratified and enriched samples");
    add_common(sample, true);
    auto* weigh = app.add_subcommand("weigh", "estimate densities and importance weights");
    add_common(weigh, false);
    auto* aggregate = app.add_subcommand("aggregate", "majority labels and crowd scores");
    add_common(aggregate, true);
    auto* agree = app.add_subcommand("agree", "inter-rater agreement report");
    add_common(agree, true);
    auto* evaluate = app.add_subcommand("evaluate", "classifier evaluation report");
    add_common(evaluate, false);
    auto* simulate = app.add_subcommand("simulate", "perfect and chance baselines");
    add_common(simulate, true);

    auto* plot = app.add_subcommand("plot", "render a CSV artifact as SVG");
    plot->add_option("--kind", plot_kind, "simplex or pr_curve")
        ->required()
        ->check(CLI::IsMember({"simplex", "pr_curve"}));
    plot->add_option("--in", plot_in, "input CSV")->required();
    plot->add_option("--out", plot_out, "output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sample->parsed()) return cmd_sample(args);
        if (weigh->parsed()) return cmd_weigh(args);
        if (aggregate->parsed()) return cmd_aggregate(args);
        if (agree->parsed()) return cmd_agree(args);
        if (evaluate->parsed()) return cmd_evaluate(args);
        if (simulate->parsed()) return cmd_simulate(args);
        if (plot->parsed()) return cmd_plot(plot_kind, plot_in, plot_out);
    } catch (const Error& e) {
        std::cerr << "error (" << error_kind_name(e.kind()) << "): " << e.what() << "\n";
        return (e.kind() == ErrorKind::io || e.kind() == ErrorKind::network) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace tg
