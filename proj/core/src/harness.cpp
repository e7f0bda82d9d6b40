#include "fairpsm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <memory>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "fairpsm/csv.hpp"
#include "fairpsm/errors.hpp"
#include "fairpsm/report.hpp"
#include "fairpsm/version.hpp"

namespace fairpsm {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string DatasetSpec::id() const {
    const DatasetSchema schema = load_schema(schema_path, protected_attr);
    return schema.name + ":" + schema.protected_attribute;
}

std::vector<uint64_t> ExperimentConfig::resolved_seeds() const {
    if (!seeds.empty()) {
        if (repeats != 0 && seeds.size() != repeats) {
            throw ConfigError("explicit seed list length must equal repeats");
        }
        return seeds;
    }
    std::vector<uint64_t> out(repeats);
    for (size_t i = 0; i < repeats; ++i) out[i] = base_seed + i;
    return out;
}

std::string ExperimentConfig::to_json() const {
    ordered_json j;
    auto& ds = j["datasets"] = ordered_json::array();
    for (const auto& d : datasets) {
        ds.push_back({{"schema", d.schema_path},
                      {"csv", d.csv_path},
                      {"protected_attr", d.protected_attr}});
    }
    j["learner"] = learner;
    auto& ms = j["methods"] = ordered_json::array();
    for (const auto& m : methods) {
        const char* kind = m.kind == MethodSpec::Kind::baseline ? "baseline"
                           : m.kind == MethodSpec::Kind::fairmatch ? "fairmatch"
                                                                   : "external";
        ms.push_back({{"kind", kind}, {"name", m.name}, {"predictions", m.predictions_path}});
    }
    j["repeats"] = repeats;
    j["train_fraction"] = train_fraction;
    j["base_seed"] = base_seed;
    j["seeds"] = seeds;
    j["match"] = {{"k", match.k},
                  {"caliper", match.caliper},
                  {"distance", match.distance_mode == DistanceMode::propensity ? "propensity" : "euclidean"}};
    j["grid_step"] = grid_step;
    j["curve_metric"] = fair_metric_name(curve_metric);
    j["strict_scaling"] = strict_scaling;
    return j.dump();
}

std::string ExperimentConfig::config_hash() const {
    const std::string text = to_json();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool metric_smaller_is_better(const std::string& metric) {
    return !(metric == "accuracy" || metric == "precision" || metric == "recall" || metric == "f1");
}

namespace {

std::unordered_map<int64_t, double> load_external_scores(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int id_col = table.column_index("row_id");
    const int score_col = table.column_index("score");
    if (id_col < 0 || score_col < 0) {
        throw ConfigError("external predictions file " + path + " needs row_id and score columns");
    }
    std::unordered_map<int64_t, double> scores;
    scores.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        scores[std::stoll(row[id_col])] = std::stod(row[score_col]);
    }
    return scores;
}

struct PreparedDataset {
    DatasetSpec spec;
    std::string id;
    Dataset data; // encoded + globally scaled (unless strict_scaling)
    Dataset unscaled;
    std::map<std::string, std::unordered_map<int64_t, double>> external; // method name -> scores
};

struct WorkUnit {
    size_t dataset_idx;
    size_t seed_idx;
};

} // namespace

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
    if (cfg.datasets.empty()) throw ConfigError("no datasets configured");
    if (cfg.methods.empty()) throw ConfigError("no methods configured");
    {
        std::vector<std::string> names;
        for (const auto& m : cfg.methods) names.push_back(m.name);
        std::sort(names.begin(), names.end());
        if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
            throw ConfigError("method names must be unique");
        }
    }
    const std::vector<uint64_t> seeds = cfg.resolved_seeds();
    if (seeds.empty()) throw ConfigError("no seeds configured (repeats = 0?)");

    // load everything up front; a bad path should fail the run, not a cell
    std::vector<PreparedDataset> prepared;
    for (const auto& spec : cfg.datasets) {
        PreparedDataset p;
        p.spec = spec;
        const DatasetSchema schema = load_schema(spec.schema_path, spec.protected_attr);
        p.id = schema.name + ":" + schema.protected_attribute;
        p.unscaled = load_dataset(spec.csv_path, schema);
        p.data = cfg.strict_scaling ? p.unscaled : minmax_scale(p.unscaled);
        for (const auto& m : cfg.methods) {
            if (m.kind == MethodSpec::Kind::external) {
                p.external[m.name] = load_external_scores(m.predictions_path);
            }
        }
        prepared.push_back(std::move(p));
    }

    ExperimentResults results;
    results.config = cfg;
    results.config_hash = cfg.config_hash();
    results.toolkit_version = kVersion;
    results.records.resize(prepared.size() * cfg.methods.size() * seeds.size());

    std::vector<std::vector<SubgroupReport>> subgroup_slots(prepared.size() * seeds.size() > 0
                                                                ? prepared.size()
                                                                : 0);
    for (auto& v : subgroup_slots) v.resize(seeds.size());
    std::vector<FairnessCurve> curve_slots(prepared.size());

    auto record_slot = [&](size_t d, size_t m, size_t s) -> CellResult& {
        return results.records[(d * cfg.methods.size() + m) * seeds.size() + s];
    };

    auto run_unit = [&](const WorkUnit& unit) {
        const PreparedDataset& p = prepared[unit.dataset_idx];
        const uint64_t seed = seeds[unit.seed_idx];

        auto fail_all = [&](const std::string& message) {
            for (size_t m = 0; m < cfg.methods.size(); ++m) {
                CellResult& cell = record_slot(unit.dataset_idx, m, unit.seed_idx);
                cell.dataset = p.id;
                cell.method = cfg.methods[m].name;
                cell.seed = seed;
                cell.ok = false;
                cell.error = message;
            }
        };

        SplitPair pair;
        std::unique_ptr<Learner> model;
        std::vector<double> scores;
        try {
            pair = split(p.data, cfg.train_fraction, seed);
            if (cfg.strict_scaling) {
                const ScalingParams params = fit_minmax(pair.train);
                pair.train = apply_minmax(pair.train, params);
                pair.test = apply_minmax(pair.test, params);
            }
            model = fit_learner(cfg.learner, pair.train.features, pair.train.labels);
            scores = model->predict(pair.test.features);
        } catch (const std::exception& e) {
            fail_all(e.what());
            return;
        }
        const uint64_t fingerprint = row_id_fingerprint(pair.test);

        // shared FairMatch fit for any method that needs it
        std::optional<FairMatchFit> fm;
        auto fairmatch_fit = [&]() -> const FairMatchFit& {
            if (!fm) fm = fit_fairmatch(*model, pair, cfg.match, cfg.grid_step);
            return *fm;
        };

        for (size_t m = 0; m < cfg.methods.size(); ++m) {
            const MethodSpec& method = cfg.methods[m];
            CellResult& cell = record_slot(unit.dataset_idx, m, unit.seed_idx);
            cell.dataset = p.id;
            cell.method = method.name;
            cell.seed = seed;
            cell.split_fingerprint = fingerprint;
            try {
                std::vector<int> pred;
                switch (method.kind) {
                    case MethodSpec::Kind::baseline:
                        pred = default_predict(scores);
                        break;
                    case MethodSpec::Kind::fairmatch: {
                        const FairMatchFit& fit = fairmatch_fit();
                        pred = calibrated_predict(scores, pair.test.pa, pair.test.row_ids,
                                                  fit.match, fit.thresholds);
                        cell.thresholds = fit.thresholds;
                        cell.matched_ratio =
                            fairpsm::matched_ratio(fit.match, pair.test.size());
                        break;
                    }
                    case MethodSpec::Kind::external: {
                        const auto& lookup = p.external.at(method.name);
                        std::vector<double> ext(pair.test.size());
                        for (size_t i = 0; i < pair.test.size(); ++i) {
                            auto it = lookup.find(pair.test.row_ids[i]);
                            if (it == lookup.end()) {
                                throw DataError("external predictions missing row_id " +
                                                std::to_string(pair.test.row_ids[i]));
                            }
                            ext[i] = it->second;
                        }
                        pred = default_predict(ext);
                        break;
                    }
                }
                cell.report = evaluate(pair.test.labels, pred, pair.test.pa);
                cell.gd_perf = performance_gd(cell.report);
                cell.gd_fair = fairness_gd(cell.report);
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.ok = false;
                cell.error = e.what();
            }
        }

        // audit artifacts for the report tables
        try {
            AuditConfig audit{cfg.match, seed};
            subgroup_slots[unit.dataset_idx][unit.seed_idx] = subgroup_report(*model, pair, audit);
            if (unit.seed_idx == 0) {
                const FairMatchFit& fit = fairmatch_fit();
                curve_slots[unit.dataset_idx] =
                    fairness_curve(*model, pair.test, fit.match, cfg.curve_metric,
                                   default_curve_grid(), 20, cfg.base_seed);
            }
        } catch (const std::exception&) {
            // subgroup/curve artifacts are best-effort; cell records hold the contract
        }
    };

    std::vector<WorkUnit> units;
    for (size_t d = 0; d < prepared.size(); ++d) {
        for (size_t s = 0; s < seeds.size(); ++s) units.push_back({d, s});
    }
    size_t jobs = cfg.jobs ? cfg.jobs : std::thread::hardware_concurrency();
    jobs = std::max<size_t>(1, std::min(jobs, units.size()));
    if (jobs == 1) {
        for (const auto& unit : units) run_unit(unit);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(jobs);
        for (size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&]() {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= units.size()) return;
                    run_unit(units[i]);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    for (size_t d = 0; d < prepared.size(); ++d) {
        results.subgroups[prepared[d].id] = std::move(subgroup_slots[d]);
        results.curves[prepared[d].id] = std::move(curve_slots[d]);
    }
    return results;
}

bool ExperimentResults::has_failures() const {
    return std::any_of(records.begin(), records.end(),
                       [](const CellResult& c) { return !c.ok; });
}

std::vector<double> ExperimentResults::metric_values(const std::string& dataset,
                                                     const std::string& method,
                                                     const std::string& metric) const {
    const auto& names = MetricReport::column_names();
    const auto col = std::find(names.begin(), names.end(), metric);
    std::vector<double> out;
    for (const auto& cell : records) {
        if (!cell.ok || cell.dataset != dataset || cell.method != method) continue;
        std::optional<double> v;
        if (col != names.end()) {
            v = cell.report.values()[static_cast<size_t>(col - names.begin())];
        } else if (metric == "gd_perf") {
            v = cell.gd_perf;
        } else if (metric == "gd_fair") {
            v = cell.gd_fair;
        } else {
            throw ConfigError("unknown metric \"" + metric + "\"");
        }
        if (v) out.push_back(*v);
    }
    return out;
}

std::map<std::string, RankTable> rank_methods(const ExperimentResults& results,
                                              const std::string& metric) {
    const bool smaller = metric_smaller_is_better(metric);
    std::map<std::string, RankTable> tables;
    std::vector<std::string> dataset_ids;
    for (const auto& cell : results.records) {
        if (std::find(dataset_ids.begin(), dataset_ids.end(), cell.dataset) == dataset_ids.end()) {
            dataset_ids.push_back(cell.dataset);
        }
    }
    for (const auto& id : dataset_ids) {
        std::map<std::string, std::vector<double>> groups;
        for (const auto& m : results.config.methods) {
            auto values = results.metric_values(id, m.name, metric);
            if (values.size() >= 2) groups[m.name] = std::move(values);
        }
        if (groups.empty()) continue;
        tables[id] = scott_knott(groups, smaller);
    }
    return tables;
}

// ---------------------------------------------------------------------------
// JSON archive
// ---------------------------------------------------------------------------

namespace {

ordered_json opt_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

std::optional<double> opt_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

ordered_json report_to_json_obj(const MetricReport& r) {
    ordered_json j;
    const auto& names = MetricReport::column_names();
    const auto vals = r.values();
    for (size_t i = 0; i < names.size(); ++i) j[names[i]] = opt_to_json(vals[i]);
    return j;
}

MetricReport report_from_json_obj(const nlohmann::json& j) {
    MetricReport r;
    r.accuracy = opt_from_json(j.at("accuracy"));
    r.precision = opt_from_json(j.at("precision"));
    r.recall = opt_from_json(j.at("recall"));
    r.f1 = opt_from_json(j.at("f1"));
    r.aod = opt_from_json(j.at("aod"));
    r.eod = opt_from_json(j.at("eod"));
    r.spd = opt_from_json(j.at("spd"));
    r.di = opt_from_json(j.at("di"));
    return r;
}

} // namespace

std::string ExperimentResults::to_json() const {
    ordered_json j;
    j["toolkit_version"] = toolkit_version;
    j["config_hash"] = config_hash;
    j["config"] = ordered_json::parse(config.to_json());
    auto& recs = j["records"] = ordered_json::array();
    for (const auto& cell : records) {
        ordered_json c;
        c["dataset"] = cell.dataset;
        c["method"] = cell.method;
        c["seed"] = cell.seed;
        c["ok"] = cell.ok;
        c["error"] = cell.error;
        c["metrics"] = report_to_json_obj(cell.report);
        c["gd_perf"] = opt_to_json(cell.gd_perf);
        c["gd_fair"] = opt_to_json(cell.gd_fair);
        c["matched_ratio"] = opt_to_json(cell.matched_ratio);
        if (cell.thresholds) {
            c["thresholds"] = ordered_json::parse(cell.thresholds->to_json());
        } else {
            c["thresholds"] = nullptr;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(cell.split_fingerprint));
        c["split_fingerprint"] = buf;
        recs.push_back(std::move(c));
    }
    return j.dump(2);
}

ExperimentResults ExperimentResults::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ExperimentResults results;
    results.toolkit_version = j.at("toolkit_version").get<std::string>();
    results.config_hash = j.at("config_hash").get<std::string>();

    const auto& cj = j.at("config");
    ExperimentConfig cfg;
    for (const auto& d : cj.at("datasets")) {
        cfg.datasets.push_back({d.at("schema").get<std::string>(), d.at("csv").get<std::string>(),
                                d.at("protected_attr").get<std::string>()});
    }
    cfg.learner = cj.at("learner").get<std::string>();
    for (const auto& m : cj.at("methods")) {
        MethodSpec spec;
        const std::string kind = m.at("kind").get<std::string>();
        spec.kind = kind == "baseline" ? MethodSpec::Kind::baseline
                    : kind == "fairmatch" ? MethodSpec::Kind::fairmatch
                                          : MethodSpec::Kind::external;
        spec.name = m.at("name").get<std::string>();
        spec.predictions_path = m.at("predictions").get<std::string>();
        cfg.methods.push_back(std::move(spec));
    }
    cfg.repeats = cj.at("repeats").get<size_t>();
    cfg.train_fraction = cj.at("train_fraction").get<double>();
    cfg.base_seed = cj.at("base_seed").get<uint64_t>();
    cfg.seeds = cj.at("seeds").get<std::vector<uint64_t>>();
    cfg.match.k = cj.at("match").at("k").get<size_t>();
    cfg.match.caliper = cj.at("match").at("caliper").get<double>();
    cfg.match.distance_mode = cj.at("match").at("distance").get<std::string>() == "propensity"
                                  ? DistanceMode::propensity
                                  : DistanceMode::euclidean_features;
    cfg.grid_step = cj.at("grid_step").get<double>();
    cfg.curve_metric = fair_metric_from_name(cj.at("curve_metric").get<std::string>());
    cfg.strict_scaling = cj.at("strict_scaling").get<bool>();
    results.config = std::move(cfg);

    for (const auto& c : j.at("records")) {
        CellResult cell;
        cell.dataset = c.at("dataset").get<std::string>();
        cell.method = c.at("method").get<std::string>();
        cell.seed = c.at("seed").get<uint64_t>();
        cell.ok = c.at("ok").get<bool>();
        cell.error = c.at("error").get<std::string>();
        cell.report = report_from_json_obj(c.at("metrics"));
        cell.gd_perf = opt_from_json(c.at("gd_perf"));
        cell.gd_fair = opt_from_json(c.at("gd_fair"));
        cell.matched_ratio = opt_from_json(c.at("matched_ratio"));
        if (!c.at("thresholds").is_null()) {
            const auto& t = c.at("thresholds");
            ThresholdPair tp;
            tp.theta_priv = t.at("theta_priv").get<double>();
            tp.theta_unpriv = t.at("theta_unpriv").get<double>();
            tp.p_value = opt_from_json(t.at("p_value"));
            tp.objective_dist = t.at("objective_dist").get<double>();
            tp.degenerate_fallback = t.at("degenerate_fallback").get<bool>();
            cell.thresholds = tp;
        }
        cell.split_fingerprint =
            std::stoull(c.at("split_fingerprint").get<std::string>(), nullptr, 16);
        results.records.push_back(std::move(cell));
    }
    return results;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

std::string sanitize_filename(std::string name) {
    for (char& ch : name) {
        if (ch == ':' || ch == '/' || ch == ' ') ch = '_';
    }
    return name;
}

std::string results_csv(const ExperimentResults& results) {
    std::ostringstream out;
    out << "dataset,method,seed,ok,error";
    for (const auto& name : MetricReport::column_names()) out << ',' << name;
    out << ",gd_perf,gd_fair,matched_ratio,theta_priv,theta_unpriv,p_value,split_fingerprint\n";
    auto cell = [&](const std::optional<double>& v) {
        out << ',';
        if (v) out << format_double(*v, 6);
    };
    for (const auto& r : results.records) {
        out << r.dataset << ',' << r.method << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
            << csv_escape(r.error);
        for (const auto& v : r.report.values()) cell(v);
        cell(r.gd_perf);
        cell(r.gd_fair);
        cell(r.matched_ratio);
        if (r.thresholds) {
            out << ',' << format_double(r.thresholds->theta_priv, 6) << ','
                << format_double(r.thresholds->theta_unpriv, 6);
            cell(r.thresholds->p_value);
        } else {
            out << ",,,";
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.split_fingerprint));
        out << ',' << buf << "\n";
    }
    return out.str();
}

// rows = metrics, columns = per-method mean and Scott-Knott rank
std::string method_comparison_csv(const ExperimentResults& results, const std::string& dataset) {
    std::vector<std::string> metrics = MetricReport::column_names();
    metrics.push_back("gd_perf");
    metrics.push_back("gd_fair");

    std::ostringstream out;
    out << "metric";
    for (const auto& m : results.config.methods) out << ',' << m.name << "_mean," << m.name << "_rank";
    out << "\n";
    for (const auto& metric : metrics) {
        const auto tables = rank_methods(results, metric);
        const RankTable* table = nullptr;
        if (auto it = tables.find(dataset); it != tables.end()) table = &it->second;
        out << metric;
        for (const auto& m : results.config.methods) {
            const auto values = results.metric_values(dataset, m.name, metric);
            out << ',';
            if (!values.empty()) out << format_double(summarize(values).mean, 2);
            out << ',';
            if (table) {
                try {
                    out << table->rank_of(m.name);
                } catch (const InputError&) {
                }
            }
        }
        out << "\n";
    }
    return out.str();
}

// Table of per-subset mean metric scores across seeds (paper-style layout).
std::string subgroup_mean_csv(const std::vector<SubgroupReport>& reports) {
    const auto& names = MetricReport::column_names();
    std::ostringstream out;
    out << "subset,ratio";
    for (const auto& n : names) out << ',' << n;
    out << "\n";
    const char* subsets[] = {"PSM_matched", "class_sampled", "pa_sampled", "wae_sampled",
                             "original"};
    for (const char* subset : subsets) {
        std::vector<double> ratios;
        std::vector<std::vector<double>> cols(names.size());
        for (const auto& report : reports) {
            const SubgroupRow* row = report.find(subset);
            if (!row || !row->error.empty()) continue;
            ratios.push_back(row->ratio);
            const auto vals = row->report.values();
            for (size_t c = 0; c < names.size(); ++c) {
                if (vals[c]) cols[c].push_back(*vals[c]);
            }
        }
        if (ratios.empty()) continue;
        out << subset << ',' << format_double(summarize(ratios).mean, 2);
        for (size_t c = 0; c < names.size(); ++c) {
            out << ',';
            if (!cols[c].empty()) out << round_half_away(summarize(cols[c]).mean);
        }
        out << "\n";
    }
    return out.str();
}

} // namespace

std::vector<std::string> emit_reports(const ExperimentResults& results,
                                      const std::vector<std::string>& formats,
                                      const std::string& out_dir) {
    for (const auto& f : formats) {
        if (f != "csv" && f != "json" && f != "svg") {
            throw ConfigError("unknown report format \"" + f + "\" (csv, json, svg)");
        }
    }
    std::vector<std::string> written;
    if (formats.empty()) return written;
    if (results.records.empty()) throw InputError("emit_reports: no records");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(out_dir) / name).string();
        write_text_file(path, content);
        written.push_back(path);
    };

    const bool csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
    const bool json = std::find(formats.begin(), formats.end(), "json") != formats.end();
    const bool svg = std::find(formats.begin(), formats.end(), "svg") != formats.end();

    if (csv) emit("results.csv", results_csv(results));
    if (json) emit("results.json", results.to_json());

    std::vector<std::string> dataset_ids;
    for (const auto& cell : results.records) {
        if (std::find(dataset_ids.begin(), dataset_ids.end(), cell.dataset) == dataset_ids.end()) {
            dataset_ids.push_back(cell.dataset);
        }
    }
    for (const auto& id : dataset_ids) {
        const std::string base = sanitize_filename(id);
        if (csv) {
            emit(base + "_methods.csv", method_comparison_csv(results, id));
            if (auto it = results.subgroups.find(id);
                it != results.subgroups.end() && !it->second.empty()) {
                emit(base + "_subgroup.csv", subgroup_mean_csv(it->second));
                const DeltaTable deltas = aggregate_deltas(it->second);
                emit(base + "_deltas_mean.csv", delta_table_to_csv(deltas, false));
                emit(base + "_deltas_std.csv", delta_table_to_csv(deltas, true));
            }
        }
        if (auto it = results.curves.find(id); it != results.curves.end() &&
                                               !it->second.fractions.empty()) {
            if (csv) emit(base + "_curve.csv", curve_to_csv(it->second));
            if (svg) {
                emit(base + "_curve.svg",
                     curve_to_svg(it->second, id + " (" + fair_metric_name(it->second.metric) + ")"));
            }
        }
    }
    return written;
}

} // namespace fairpsm
