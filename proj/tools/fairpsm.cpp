// fairpsm: fairness auditing by propensity-score matching plus FairMatch
// threshold calibration.
//
// Subcommands: fetch, audit, mitigate, experiment, rank.
// Exit codes: 0 success, 1 configuration error, 2 run finished with partial
// failures.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fairpsm/errors.hpp"
#include "fairpsm/harness.hpp"
#include "fairpsm/report.hpp"
#include "fairpsm/version.hpp"
#include "fetch.hpp"

using namespace fairpsm;
namespace fs = std::filesystem;

namespace {

struct DataFlags {
    std::string data_dir = "data";
    std::string csv_path;    // explicit file overrides the data-dir lookup
    std::string schema_path; // explicit schema likewise
};

// "--dataset german" or "--dataset german:sex"
std::pair<std::string, std::string> split_dataset_arg(const std::string& arg) {
    const auto colon = arg.find(':');
    if (colon == std::string::npos) return {arg, ""};
    return {arg.substr(0, colon), arg.substr(colon + 1)};
}

DatasetSpec resolve_dataset(const DataFlags& flags, const std::string& dataset_arg) {
    auto [name, pa] = split_dataset_arg(dataset_arg);
    DatasetSpec spec;
    spec.protected_attr = pa;
    spec.schema_path = !flags.schema_path.empty()
                           ? flags.schema_path
                           : (fs::path(flags.data_dir) / "schemas" / (name + ".json")).string();
    if (!flags.csv_path.empty()) {
        spec.csv_path = flags.csv_path;
    } else {
        for (const auto& candidate : {fs::path(flags.data_dir) / (name + ".csv"),
                                      fs::path(flags.data_dir) / "cache" / (name + ".csv")}) {
            if (fs::exists(candidate)) {
                spec.csv_path = candidate.string();
                break;
            }
        }
        if (spec.csv_path.empty()) {
            throw ConfigError("no CSV for dataset \"" + name + "\" under " + flags.data_dir +
                              "; run `fairpsm fetch --dataset " + name + "` or pass --csv");
        }
    }
    return spec;
}

struct MatchFlags {
    size_t k = 5;
    double caliper = 0.05;
    std::string distance = "propensity";

    MatchConfig to_config() const {
        MatchConfig cfg;
        cfg.k = k;
        cfg.caliper = caliper;
        if (distance == "propensity") cfg.distance_mode = DistanceMode::propensity;
        else if (distance == "euclidean") cfg.distance_mode = DistanceMode::euclidean_features;
        else throw ConfigError("unknown distance \"" + distance + "\" (propensity, euclidean)");
        return cfg;
    }
};

void add_match_flags(CLI::App* cmd, MatchFlags& flags) {
    cmd->add_option("--k", flags.k, "neighbor pool size")->capture_default_str();
    cmd->add_option("--caliper", flags.caliper, "max within-pair distance")->capture_default_str();
    cmd->add_option("--distance", flags.distance, "propensity or euclidean")->capture_default_str();
}

void write_file(const fs::path& dir, const std::string& name, const std::string& content,
                bool quiet = false) {
    fs::create_directories(dir);
    const std::string path = (dir / name).string();
    write_text_file(path, content);
    if (!quiet) std::cout << "wrote " << path << "\n";
}

int cmd_audit(const DataFlags& data, const std::string& dataset_arg, const MatchFlags& mflags,
              const std::string& learner, uint64_t seed, double train_fraction,
              const std::string& metric, size_t curve_seeds, const std::string& out_dir) {
    const DatasetSpec spec = resolve_dataset(data, dataset_arg);
    const DatasetSchema schema = load_schema(spec.schema_path, spec.protected_attr);
    LoadReport load_report;
    const Dataset raw = load_dataset(spec.csv_path, schema, &load_report);
    std::cout << schema.name << ": " << load_report.rows_total << " rows, "
              << load_report.rows_dropped << " dropped for missing values, "
              << load_report.encoded_width << " encoded features\n";

    const Dataset scaled = minmax_scale(raw);
    const SplitPair pair = split(scaled, train_fraction, seed);
    const auto model = fit_learner(learner, pair.train.features, pair.train.labels);

    AuditConfig cfg{mflags.to_config(), seed};
    const SubgroupReport report = subgroup_report(*model, pair, cfg);

    const PropensityScores ps = propensity_scores(*model, pair.test);
    const MatchResult mr = match(ps, pair.test, cfg.match);
    const FairMetricId metric_id = fair_metric_from_name(metric);
    const FairnessCurve curve =
        fairness_curve(*model, pair.test, mr, metric_id, default_curve_grid(), curve_seeds, seed);

    const fs::path out(out_dir);
    write_file(out, "subgroup.csv", subgroup_to_csv(report));
    write_file(out, "subgroup.json", subgroup_to_json(report));
    write_file(out, "deltas.csv", subgroup_deltas_to_csv(report));
    write_file(out, "match.json", mr.to_json());
    write_file(out, "curve.csv", curve_to_csv(curve));
    write_file(out, "curve.svg",
               curve_to_svg(curve, schema.name + ":" + schema.protected_attribute + " (" + metric + ")"));

    std::cout << "matched ratio " << format_double(matched_ratio(mr, pair.test.size()), 3);
    if (curve.f_auc) std::cout << ", f-AUC(" << metric << ") " << format_double(*curve.f_auc, 2);
    std::cout << "\n";
    return 0;
}

int cmd_mitigate(const DataFlags& data, const std::string& dataset_arg, const MatchFlags& mflags,
                 const std::string& learner, uint64_t seed, double train_fraction,
                 double grid_step, const std::string& out_dir) {
    const DatasetSpec spec = resolve_dataset(data, dataset_arg);
    const DatasetSchema schema = load_schema(spec.schema_path, spec.protected_attr);
    const Dataset scaled = minmax_scale(load_dataset(spec.csv_path, schema));
    const SplitPair pair = split(scaled, train_fraction, seed);
    const auto model = fit_learner(learner, pair.train.features, pair.train.labels);

    const FairMatchFit fit = fit_fairmatch(*model, pair, mflags.to_config(), grid_step);
    if (fit.thresholds.degenerate_fallback) {
        std::cerr << "warning: a group had fewer than two unmatched scores; "
                     "falling back to identity thresholds\n";
    }

    const fs::path out(out_dir);
    write_file(out, "model.json", model->to_json());
    write_file(out, "certificate.json", mitigation_certificate(fit, "model.json"));

    // per-row predictions before/after calibration
    const auto calibrated = calibrated_predict(fit.scores.scores, pair.test.pa, pair.test.row_ids,
                                               fit.match, fit.thresholds);
    const auto plain = default_predict(fit.scores.scores);
    std::ostringstream preds;
    preds << "row_id,score,baseline_pred,calibrated_pred,matched\n";
    for (size_t i = 0; i < pair.test.size(); ++i) {
        preds << pair.test.row_ids[i] << ',' << format_double(fit.scores.scores[i], 6) << ','
              << plain[i] << ',' << calibrated[i] << ','
              << (fit.match.is_matched(pair.test.row_ids[i]) ? 1 : 0) << "\n";
    }
    write_file(out, "predictions.csv", preds.str());

    std::cout << "thresholds: theta_priv " << format_double(fit.thresholds.theta_priv, 3)
              << ", theta_unpriv " << format_double(fit.thresholds.theta_unpriv, 3);
    if (fit.thresholds.p_value) {
        std::cout << " (welch p " << format_double(*fit.thresholds.p_value, 4) << ")";
    }
    std::cout << "\n";
    const auto before = evaluate(pair.test.labels, plain, pair.test.pa);
    const auto after = evaluate(pair.test.labels, calibrated, pair.test.pa);
    auto show = [](const char* tag, const MetricReport& r) {
        std::cout << tag << " acc " << (r.accuracy ? format_double(*r.accuracy, 1) : "-")
                  << " spd " << (r.spd ? format_double(*r.spd, 1) : "-") << " di "
                  << (r.di ? format_double(*r.di, 1) : "-") << "\n";
    };
    show("baseline  :", before);
    show("fairmatch :", after);
    return 0;
}

int cmd_experiment(const DataFlags& data, const std::vector<std::string>& dataset_args,
                   const MatchFlags& mflags, const std::string& learner, uint64_t base_seed,
                   size_t repeats, double train_fraction, double grid_step,
                   const std::vector<std::string>& externals, bool no_fairmatch,
                   bool strict_scaling, size_t jobs, const std::string& formats_arg,
                   const std::string& out_dir) {
    ExperimentConfig cfg;
    for (const auto& arg : dataset_args) cfg.datasets.push_back(resolve_dataset(data, arg));
    cfg.learner = learner;
    cfg.methods.push_back({MethodSpec::Kind::baseline, "baseline", ""});
    if (!no_fairmatch) cfg.methods.push_back({MethodSpec::Kind::fairmatch, "fairmatch", ""});
    for (const auto& spec : externals) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--external expects NAME=PREDICTIONS.csv, got \"" + spec + "\"");
        }
        cfg.methods.push_back(
            {MethodSpec::Kind::external, spec.substr(0, eq), spec.substr(eq + 1)});
    }
    cfg.repeats = repeats;
    cfg.base_seed = base_seed;
    cfg.train_fraction = train_fraction;
    cfg.match = mflags.to_config();
    cfg.grid_step = grid_step;
    cfg.strict_scaling = strict_scaling;
    cfg.jobs = jobs;

    const ExperimentResults results = run_experiment(cfg);

    std::vector<std::string> formats;
    std::stringstream ss(formats_arg);
    std::string fmt;
    while (std::getline(ss, fmt, ',')) {
        if (!fmt.empty()) formats.push_back(fmt);
    }
    const auto files = emit_reports(results, formats, out_dir);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";

    size_t failed = 0;
    for (const auto& r : results.records) {
        if (!r.ok) {
            ++failed;
            std::cerr << "cell failed: " << r.dataset << "/" << r.method << "/seed " << r.seed
                      << ": " << r.error << "\n";
        }
    }
    std::cout << results.records.size() - failed << "/" << results.records.size()
              << " cells ok, config hash " << results.config_hash << "\n";
    return failed == 0 ? 0 : 2;
}

int cmd_rank(const std::string& results_path, const std::string& metric,
             const std::string& out_dir) {
    std::ifstream in(results_path);
    if (!in) throw ConfigError("cannot open results archive: " + results_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const ExperimentResults results = ExperimentResults::from_json(ss.str());

    const auto tables = rank_methods(results, metric);
    for (const auto& [dataset, table] : tables) {
        std::cout << dataset << " (" << metric << ", "
                  << (table.smaller_is_better ? "smaller" : "greater") << " is better)\n";
        for (const auto& e : table.entries) {
            std::cout << "  rank " << e.rank << "  " << e.name << "  (median "
                      << format_double(e.median, 2) << ")\n";
        }
        if (!out_dir.empty()) {
            std::string name = dataset + "_" + metric + "_ranks.csv";
            for (char& ch : name) {
                if (ch == ':' || ch == '/') ch = '_';
            }
            write_file(out_dir, name, rank_table_to_csv(table), true);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness auditing and repair via propensity score matching"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    DataFlags data;
    MatchFlags mflags;
    std::string learner = "logistic";
    uint64_t seed = 42;
    size_t repeats = 20;
    double train_fraction = 0.7;
    double grid_step = 0.01;
    std::string out_dir = "out";

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download and convert the public datasets");
    std::vector<std::string> fetch_names;
    std::vector<std::string> from_files;
    bool fetch_all = false, offline = false;
    fetch->add_option("--dataset", fetch_names, "dataset names (adult compas german heart bank)");
    fetch->add_flag("--all", fetch_all, "fetch every known dataset");
    fetch->add_option("--from-file", from_files,
                      "use local raw files instead of downloading (ordered per source)");
    fetch->add_flag("--offline", offline, "never touch the network");
    fetch->add_option("--data-dir", data.data_dir, "data directory")->capture_default_str();

    // audit
    auto* audit = app.add_subcommand("audit", "match one split and report subgroup metrics");
    std::string dataset_arg;
    std::string metric = "di";
    size_t curve_seeds = 20;
    audit->add_option("--dataset", dataset_arg, "dataset name[:protected-attr]")->required();
    audit->add_option("--data-dir", data.data_dir, "")->capture_default_str();
    audit->add_option("--csv", data.csv_path, "explicit dataset CSV");
    audit->add_option("--schema", data.schema_path, "explicit schema JSON");
    audit->add_option("--seed", seed, "split seed")->capture_default_str();
    audit->add_option("--train-fraction", train_fraction, "")->capture_default_str();
    audit->add_option("--learner", learner, "logistic or gbt")->capture_default_str();
    audit->add_option("--metric", metric, "curve metric (aod eod spd di)")->capture_default_str();
    audit->add_option("--curve-seeds", curve_seeds, "subsample repeats for the curve")
        ->capture_default_str();
    audit->add_option("--out", out_dir, "output directory")->capture_default_str();
    add_match_flags(audit, mflags);

    // mitigate
    auto* mitigate = app.add_subcommand("mitigate", "fit FairMatch and emit its certificate");
    mitigate->add_option("--dataset", dataset_arg, "dataset name[:protected-attr]")->required();
    mitigate->add_option("--data-dir", data.data_dir, "")->capture_default_str();
    mitigate->add_option("--csv", data.csv_path, "explicit dataset CSV");
    mitigate->add_option("--schema", data.schema_path, "explicit schema JSON");
    mitigate->add_option("--seed", seed, "split seed")->capture_default_str();
    mitigate->add_option("--train-fraction", train_fraction, "")->capture_default_str();
    mitigate->add_option("--learner", learner, "logistic or gbt")->capture_default_str();
    mitigate->add_option("--grid-step", grid_step, "threshold grid step")->capture_default_str();
    mitigate->add_option("--out", out_dir, "output directory")->capture_default_str();
    add_match_flags(mitigate, mflags);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "full grid: datasets x methods x seeds");
    std::vector<std::string> dataset_args;
    std::vector<std::string> externals;
    bool no_fairmatch = false, strict_scaling = false;
    size_t jobs = 0;
    std::string formats = "csv,json,svg";
    experiment->add_option("--dataset", dataset_args, "dataset name[:protected-attr] (repeatable)")
        ->required();
    experiment->add_option("--data-dir", data.data_dir, "")->capture_default_str();
    experiment->add_option("--repeats", repeats, "seeded repeats")->capture_default_str();
    experiment->add_option("--seed", seed, "base seed (seeds are base+i)")->capture_default_str();
    experiment->add_option("--train-fraction", train_fraction, "")->capture_default_str();
    experiment->add_option("--learner", learner, "logistic or gbt")->capture_default_str();
    experiment->add_option("--grid-step", grid_step, "threshold grid step")->capture_default_str();
    experiment->add_option("--external", externals,
                           "external predictions method as NAME=CSV (repeatable)");
    experiment->add_flag("--no-fairmatch", no_fairmatch, "baseline only");
    experiment->add_flag("--strict-scaling", strict_scaling,
                         "fit min-max on the train half only (leakage-safe mode)");
    experiment->add_option("--jobs", jobs, "worker threads (0 = hardware)")->capture_default_str();
    experiment->add_option("--formats", formats, "comma list of csv,json,svg")
        ->capture_default_str();
    experiment->add_option("--out", out_dir, "output directory")->capture_default_str();
    add_match_flags(experiment, mflags);

    // rank
    auto* rank = app.add_subcommand("rank", "Scott-Knott ranks from a results archive");
    std::string results_path;
    std::string rank_metric = "di";
    std::string rank_out;
    rank->add_option("--results", results_path, "results.json from `experiment`")->required();
    rank->add_option("--metric", rank_metric, "metric column or gd_perf/gd_fair")
        ->capture_default_str();
    rank->add_option("--out", rank_out, "directory for rank CSVs (optional)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fetch) {
            std::vector<std::string> names = fetch_names;
            if (fetch_all) {
                names.clear();
                for (const auto& s : fairpsm::tools::dataset_sources()) names.push_back(s.name);
            }
            if (names.empty()) throw ConfigError("fetch: pass --dataset NAME or --all");
            for (const auto& name : names) {
                fairpsm::tools::fetch_dataset(name, data.data_dir, from_files, offline);
            }
            return 0;
        }
        if (*audit) {
            return cmd_audit(data, dataset_arg, mflags, learner, seed, train_fraction, metric,
                             curve_seeds, out_dir);
        }
        if (*mitigate) {
            return cmd_mitigate(data, dataset_arg, mflags, learner, seed, train_fraction,
                                grid_step, out_dir);
        }
        if (*experiment) {
            return cmd_experiment(data, dataset_args, mflags, learner, seed, repeats,
                                  train_fraction, grid_step, externals, no_fairmatch,
                                  strict_scaling, jobs, formats, out_dir);
        }
        if (*rank) {
            return cmd_rank(results_path, rank_metric, rank_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
