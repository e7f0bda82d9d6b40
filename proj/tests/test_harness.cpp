#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fairpsm/errors.hpp"
#include "fairpsm/harness.hpp"
#include "fairpsm/report.hpp"
#include "helpers.hpp"

using namespace fairpsm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("fairpsm_test_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& file = "") const { return (path / file).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// writes a small biased CSV dataset plus its schema, returns the spec
DatasetSpec write_toy_dataset(const TempDir& dir, size_t n, uint64_t seed) {
    auto d = helpers::biased_dataset(n, seed);
    std::ostringstream csv;
    csv << "x0,x1,grp,label\n";
    for (size_t i = 0; i < d.size(); ++i) {
        csv << d.features.at(i, 0) << ',' << d.features.at(i, 1) << ','
            << (d.pa[i] ? "a" : "b") << ',' << d.labels[i] << "\n";
    }
    write_text_file(dir.str("toy.csv"), csv.str());
    write_text_file(dir.str("toy.json"), R"({
        "name": "toy",
        "label": {"column": "label", "favorable": "1"},
        "protected": {"column": "grp", "privileged": "a"},
        "features": [
            {"column": "x0", "kind": "numeric"},
            {"column": "x1", "kind": "numeric"}
        ]
    })");
    return {dir.str("toy.json"), dir.str("toy.csv"), ""};
}

ExperimentConfig toy_config(const TempDir& dir, size_t repeats) {
    ExperimentConfig cfg;
    cfg.datasets = {write_toy_dataset(dir, 400, 1234)};
    cfg.methods = {{MethodSpec::Kind::baseline, "baseline", ""},
                   {MethodSpec::Kind::fairmatch, "fairmatch", ""}};
    cfg.repeats = repeats;
    cfg.base_seed = 7;
    cfg.grid_step = 0.05;
    cfg.jobs = 2;
    return cfg;
}

} // namespace

TEST_CASE("run_experiment: complete grid, one record per cell") {
    TempDir dir("grid");
    auto cfg = toy_config(dir, 3);
    const auto results = run_experiment(cfg);
    CHECK(results.records.size() == 1 * 2 * 3);
    std::set<std::string> keys;
    for (const auto& r : results.records) {
        CHECK(r.ok);
        keys.insert(r.dataset + "|" + r.method + "|" + std::to_string(r.seed));
    }
    CHECK(keys.size() == 6); // no duplicates
    CHECK(!results.has_failures());
}

TEST_CASE("run_experiment: single dataset, method and seed") {
    TempDir dir("single");
    auto cfg = toy_config(dir, 1);
    cfg.methods = {{MethodSpec::Kind::baseline, "baseline", ""}};
    const auto results = run_experiment(cfg);
    REQUIRE(results.records.size() == 1);
    CHECK(results.records[0].ok);
    CHECK(results.records[0].report.accuracy.has_value());
}

TEST_CASE("run_experiment: every method sees the identical split") {
    TempDir dir("fingerprint");
    auto cfg = toy_config(dir, 4);
    const auto results = run_experiment(cfg);
    std::map<uint64_t, std::set<uint64_t>> fingerprints_by_seed;
    for (const auto& r : results.records) {
        fingerprints_by_seed[r.seed].insert(r.split_fingerprint);
    }
    REQUIRE(fingerprints_by_seed.size() == 4);
    for (const auto& [seed, prints] : fingerprints_by_seed) CHECK(prints.size() == 1);
}

TEST_CASE("run_experiment: determinism across runs and worker counts") {
    TempDir dir("determinism");
    auto cfg = toy_config(dir, 3);
    const auto a = run_experiment(cfg);
    cfg.jobs = 1;
    const auto b = run_experiment(cfg);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("run_experiment: external predictions join by row id") {
    TempDir dir("external");
    auto cfg = toy_config(dir, 2);
    // constant predictor supplied externally: score 0.9 for every row
    std::ostringstream preds;
    preds << "row_id,score\n";
    for (int64_t id = 0; id < 400; ++id) preds << id << ",0.9\n";
    write_text_file(dir.str("preds.csv"), preds.str());
    cfg.methods.push_back({MethodSpec::Kind::external, "always_yes", dir.str("preds.csv")});
    const auto results = run_experiment(cfg);
    for (const auto& r : results.records) {
        if (r.method != "always_yes") continue;
        REQUIRE(r.ok);
        CHECK(*r.report.recall == doctest::Approx(100)); // everything predicted favorable
        CHECK(*r.report.spd == doctest::Approx(0));
    }
}

TEST_CASE("run_experiment: config errors abort, cell failures do not") {
    TempDir dir("errors");
    auto cfg = toy_config(dir, 2);
    cfg.methods.clear();
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);

    cfg = toy_config(dir, 2);
    cfg.methods.push_back({MethodSpec::Kind::external, "broken", dir.str("missing.csv")});
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError); // unreadable config input

    // a method that fails per cell: external file present but missing ids
    write_text_file(dir.str("short.csv"), "row_id,score\n0,0.5\n");
    cfg = toy_config(dir, 2);
    cfg.methods.push_back({MethodSpec::Kind::external, "sparse", dir.str("short.csv")});
    const auto results = run_experiment(cfg);
    CHECK(results.has_failures());
    size_t failed = 0, succeeded = 0;
    for (const auto& r : results.records) {
        if (r.method == "sparse") {
            CHECK(!r.ok);
            ++failed;
        } else {
            CHECK(r.ok);
            ++succeeded;
        }
    }
    CHECK(failed == 2);
    CHECK(succeeded == 4);
}

TEST_CASE("rank_methods: identical distributions tie, dominated methods split") {
    TempDir dir("ranks");
    auto cfg = toy_config(dir, 5);
    const auto results = run_experiment(cfg);
    const auto tables = rank_methods(results, "accuracy");
    REQUIRE(tables.size() == 1);
    const auto& table = tables.begin()->second;
    CHECK(table.rank_of("baseline") >= 1);
    CHECK(table.rank_of("fairmatch") >= 1);

    // synthetic results: method A dominates B on every seed
    ExperimentResults fake;
    fake.config.methods = {{MethodSpec::Kind::baseline, "A", ""},
                           {MethodSpec::Kind::baseline, "B", ""}};
    for (int s = 0; s < 6; ++s) {
        CellResult a;
        a.dataset = "d:x";
        a.method = "A";
        a.seed = static_cast<uint64_t>(s);
        a.ok = true;
        a.report.spd = 2.0 + 0.1 * s;
        CellResult b = a;
        b.method = "B";
        b.report.spd = 30.0 + 0.1 * s;
        fake.records.push_back(a);
        fake.records.push_back(b);
    }
    const auto spd_tables = rank_methods(fake, "spd");
    CHECK(spd_tables.at("d:x").rank_of("A") == 1);
    CHECK(spd_tables.at("d:x").rank_of("B") == 2);

    // single method -> rank 1
    ExperimentResults solo = fake;
    solo.config.methods = {{MethodSpec::Kind::baseline, "A", ""}};
    solo.records.erase(std::remove_if(solo.records.begin(), solo.records.end(),
                                      [](const CellResult& c) { return c.method == "B"; }),
                       solo.records.end());
    CHECK(rank_methods(solo, "spd").at("d:x").rank_of("A") == 1);
}

TEST_CASE("emit_reports: formats control the files written") {
    TempDir dir("emit");
    TempDir out("emit_out");
    auto cfg = toy_config(dir, 2);
    const auto results = run_experiment(cfg);

    CHECK(emit_reports(results, {}, out.str()).empty());

    const auto files = emit_reports(results, {"csv", "json", "svg"}, out.str());
    std::set<std::string> names;
    for (const auto& f : files) names.insert(fs::path(f).filename().string());
    CHECK(names.count("results.csv") == 1);
    CHECK(names.count("results.json") == 1);
    CHECK(names.count("toy_grp_methods.csv") == 1);
    CHECK(names.count("toy_grp_subgroup.csv") == 1);
    CHECK(names.count("toy_grp_deltas_mean.csv") == 1);
    CHECK(names.count("toy_grp_deltas_std.csv") == 1);
    CHECK(names.count("toy_grp_curve.csv") == 1);
    CHECK(names.count("toy_grp_curve.svg") == 1);

    CHECK_THROWS_AS(emit_reports(results, {"pdf"}, out.str()), ConfigError);
}

TEST_CASE("results JSON archive round trip") {
    TempDir dir("archive");
    auto cfg = toy_config(dir, 2);
    const auto results = run_experiment(cfg);
    const std::string once = results.to_json();
    const auto reloaded = ExperimentResults::from_json(once);
    // records and config survive; curves/subgroups are report-only artifacts
    CHECK(reloaded.records.size() == results.records.size());
    CHECK(reloaded.config_hash == results.config_hash);
    CHECK(reloaded.to_json() == once);
}

TEST_CASE("config hash pins the full configuration") {
    TempDir dir("hash");
    auto cfg = toy_config(dir, 2);
    const auto h1 = cfg.config_hash();
    cfg.grid_step = 0.2;
    CHECK(cfg.config_hash() != h1);
}

TEST_CASE("byte-identical reports for identical configs") {
    TempDir dir("bytes");
    TempDir out1("bytes_out1");
    TempDir out2("bytes_out2");
    auto cfg = toy_config(dir, 2);
    const auto r1 = run_experiment(cfg);
    const auto r2 = run_experiment(cfg);
    const auto f1 = emit_reports(r1, {"csv", "json", "svg"}, out1.str());
    const auto f2 = emit_reports(r2, {"csv", "json", "svg"}, out2.str());
    REQUIRE(f1.size() == f2.size());
    for (size_t i = 0; i < f1.size(); ++i) {
        CHECK(slurp(f1[i]) == slurp(f2[i]));
    }
}
