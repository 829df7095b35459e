#include <catch_amalgamated.hpp>

#include "autoopt/commands.hpp"

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"

using namespace autoopt;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("autoopt_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

const char* kDesignConfig = R"({
  "master_seed": 5,
  "problems": [
    {"id": "f1", "dimension": 6, "seed": 1},
    {"id": "f1", "dimension": 6, "seed": 2},
    {"id": "f1", "dimension": 6, "seed": 3}
  ],
  "design": {
    "runs_per_instance": 2,
    "candidate_budget": 6,
    "candidates_per_iteration": 3,
    "population_size": 10,
    "budget_fe": 150
  }
})";

} // namespace

TEST_CASE("config defaults mirror the reference setup") {
    const auto cfg = load_config_text("{}");
    REQUIRE(cfg.design.population_size == 20);
    REQUIRE(cfg.design.budget_fe == 5000);
    REQUIRE(cfg.design.candidate_budget == 5000);
    REQUIRE(cfg.design.candidates_per_iteration == 10);
    REQUIRE(cfg.design.runs_per_instance == 10);
    REQUIRE(cfg.design.max_pathway_ops == 6);
    REQUIRE(cfg.compare.runs == 30);
    REQUIRE(cfg.compare.population_size == 50);
    REQUIRE(cfg.compare.budget_fe == 20000);
    REQUIRE(cfg.surrogate.training_size == 1000);
    REQUIRE(cfg.surrogate.latent_dim == 20);
}

TEST_CASE("unknown config keys are rejected") {
    REQUIRE_THROWS_AS(load_config_text(R"({"master_sed": 1})"), ConfigError);
    REQUIRE_THROWS_AS(load_config_text(R"({"design": {"budget": 5}})"), ConfigError);
    REQUIRE_THROWS_AS(load_config_text(R"({"problems": [{"id": "f1", "dims": 3}]})"), ConfigError);
}

TEST_CASE("config parse errors carry a line number") {
    try {
        load_config_text("{\n  \"master_seed\": 1,\n  broken\n}");
        FAIL("expected parse error");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("bad problem and mode values are caught at load time") {
    REQUIRE_THROWS_AS(load_config_text(R"({"problems": [{"id": "f42"}]})"), ConfigError);
    REQUIRE_THROWS_AS(load_config_text(R"({"design": {"surrogate": "sometimes"}})"),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(load_config_text(R"({"design": {"surrogate_space": "latent"}})"),
                      ConfigError);
}

TEST_CASE("desk-scale preset reduces every budget") {
    auto cfg = load_config_text("{}");
    apply_desk_scale(cfg);
    REQUIRE(cfg.design.candidate_budget <= 60);
    REQUIRE(cfg.compare.runs <= 5);
    REQUIRE(cfg.surrogate.training_size <= 60);
}

TEST_CASE("instance split follows the 2-train 1-test scheme") {
    const auto split = cli::split_instances(3, 11);
    REQUIRE(split.train.size() == 2);
    REQUIRE(split.test.size() == 1);
    std::set<int> all(split.train.begin(), split.train.end());
    all.insert(split.test.begin(), split.test.end());
    REQUIRE(all == std::set<int>{0, 1, 2});
    // reproducible per seed
    const auto again = cli::split_instances(3, 11);
    REQUIRE(split.train == again.train);
    const auto one = cli::split_instances(1, 4);
    REQUIRE(one.train == one.test);
    const auto four = cli::split_instances(4, 4);
    REQUIRE(four.train.size() == 2);
    REQUIRE(four.test.size() == 2);
}

TEST_CASE("cmd_design writes its three artifacts with stable bytes") {
    TempDir dir_a("design_a"), dir_b("design_b");
    auto cfg = load_config_text(kDesignConfig);
    cfg.output_dir = dir_a.str();
    cfg.config_hash = hash_config(cfg);
    std::ostringstream quiet;
    const auto art_a = cli::cmd_design(cfg, quiet);
    REQUIRE(fs::exists(art_a.best_graph_path));
    REQUIRE(fs::exists(art_a.trace_path));
    REQUIRE(fs::exists(art_a.holdout_path));

    // emitted files parse with the shipped readers
    const auto best = load_graph_file(art_a.best_graph_path);
    REQUIRE(validate(best, Catalog::for_kind(Kind::continuous)).valid());
    const auto trace = load_csv_file(art_a.trace_path);
    REQUIRE(trace.columns ==
            std::vector<std::string>{"candidate", "accepted", "challenger_mean", "best_ever_mean"});
    REQUIRE_FALSE(trace.rows.empty());
    REQUIRE(trace.annotations.count("config_hash") == 1);
    const auto holdout = load_csv_file(art_a.holdout_path);
    REQUIRE(holdout.columns == std::vector<std::string>{"instance", "run", "fitness"});
    REQUIRE(holdout.rows.size() == 2);  // one held-out instance, two runs

    // same config + seed => byte-identical outputs
    auto cfg_b = load_config_text(kDesignConfig);
    cfg_b.output_dir = dir_b.str();
    cfg_b.config_hash = hash_config(cfg_b);
    const auto art_b = cli::cmd_design(cfg_b, quiet);
    REQUIRE(read_file(art_a.best_graph_path) == read_file(art_b.best_graph_path));
    REQUIRE(read_file(art_a.trace_path) == read_file(art_b.trace_path));
    REQUIRE(read_file(art_a.holdout_path) == read_file(art_b.holdout_path));
}

TEST_CASE("design trace hashes differ when the seed differs") {
    TempDir dir_a("seed_a"), dir_b("seed_b");
    std::ostringstream quiet;
    auto cfg = load_config_text(kDesignConfig);
    cfg.output_dir = dir_a.str();
    cfg.config_hash = hash_config(cfg);
    const auto art_a = cli::cmd_design(cfg, quiet);
    cfg.master_seed = 6;
    cfg.output_dir = dir_b.str();
    cfg.config_hash = hash_config(cfg);
    const auto art_b = cli::cmd_design(cfg, quiet);
    REQUIRE(read_file(art_a.best_graph_path) != read_file(art_b.best_graph_path));
}

TEST_CASE("cmd_compare emits the table and a recomputable per-run dump") {
    TempDir dir("compare");
    auto cfg = load_config_text(R"({
      "master_seed": 3,
      "problems": [{"id": "f1", "dimension": 5, "seed": 1}],
      "compare": {"algorithms": ["DE", "random_search"], "runs": 4,
                   "budget_fe": 200, "population_size": 10, "per_run_dump": true}
    })");
    cfg.output_dir = dir.str();
    cfg.config_hash = hash_config(cfg);
    std::ostringstream quiet;
    const auto table_path = cli::cmd_compare(cfg, quiet);
    const auto table = load_csv_file(table_path);
    REQUIRE(table.columns ==
            std::vector<std::string>{"problem", "algorithm", "mean", "std", "runs"});
    REQUIRE(table.rows.size() == 2);

    const auto runs = load_csv_file((fs::path(dir.str()) / "compare_runs.csv").string());
    for (std::size_t row = 0; row < table.rows.size(); ++row) {
        const auto& algo = table.cell(row, "algorithm");
        double total = 0.0;
        int count = 0;
        for (std::size_t r = 0; r < runs.rows.size(); ++r)
            if (runs.cell(r, "algorithm") == algo) {
                total += runs.number(r, "fitness");
                ++count;
            }
        REQUIRE(count == 4);
        REQUIRE(table.number(row, "mean") == Catch::Approx(total / count).epsilon(1e-12));
    }
}

TEST_CASE("compare on a flat problem reports zero deviation") {
    TempDir dir("flat");
    auto cfg = load_config_text(R"({
      "master_seed": 3,
      "problems": [{"id": "constant", "dimension": 4, "value": 2.5}],
      "compare": {"algorithms": ["GA"], "runs": 3, "budget_fe": 100, "population_size": 10}
    })");
    cfg.output_dir = dir.str();
    cfg.config_hash = hash_config(cfg);
    std::ostringstream quiet;
    const auto table = load_csv_file(cli::cmd_compare(cfg, quiet));
    REQUIRE(table.number(0, "mean") == 2.5);
    REQUIRE(table.number(0, "std") == 0.0);
}

TEST_CASE("cmd_surrogate reports both spaces with tau in range") {
    TempDir dir("surrogate");
    auto cfg = load_config_text(R"({
      "master_seed": 7,
      "problems": [{"id": "f1", "dimension": 5, "seed": 1}],
      "surrogate": {"training_size": 14, "holdout_size": 8, "epochs": 10,
                     "n_trees": 20, "label_budget_fe": 60, "label_population": 6}
    })");
    cfg.output_dir = dir.str();
    cfg.config_hash = hash_config(cfg);
    std::ostringstream quiet;
    const auto report = load_csv_file(cli::cmd_surrogate(cfg, quiet));
    bool embed_row = false, raw_row = false;
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
        const double tau = report.number(r, "tau");
        REQUIRE(tau >= -1.0);
        REQUIRE(tau <= 1.0);
        embed_row |= report.cell(r, "space") == "RF_embed";
        raw_row |= report.cell(r, "space") == "RF_no_embed";
    }
    REQUIRE(embed_row);
    REQUIRE(raw_row);
}

TEST_CASE("cmd_validate accepts the shipped graphs and rejects corrupt files") {
    TempDir dir("validate");
    const auto good_path = (fs::path(dir.str()) / "beamform.graph").string();
    save_graph_file(fixtures::designed_beamform(), good_path);
    std::ostringstream log;
    REQUIRE(cli::cmd_validate(good_path, log));

    const auto bad_path = (fs::path(dir.str()) / "corrupt.graph").string();
    std::ofstream(bad_path) << "this is not a graph\n";
    REQUIRE_THROWS(cli::cmd_validate(bad_path, log));

    // an invalid but parseable graph reports false
    const auto invalid_path = (fs::path(dir.str()) / "small.graph").string();
    std::ofstream(invalid_path) << "q=1 entries=0 parallel=0\n0 choose choose_traverse\n";
    REQUIRE_FALSE(cli::cmd_validate(invalid_path, log));
}

TEST_CASE("cmd_run agrees with a direct library run") {
    TempDir dir("run");
    const auto graph_path = (fs::path(dir.str()) / "alg.graph").string();
    save_graph_file(fixtures::designed_f1(), graph_path);
    const auto problem = Problem::benchmark("f1", 6, 1);
    const auto out = cli::cmd_run(graph_path, problem, 9, 10, 200);
    RunConfig rc;
    rc.population_size = 10;
    rc.budget_fe = 200;
    rc.seed = 9;
    const auto direct = run(fixtures::designed_f1(), problem, rc);
    REQUIRE(out.at("best_fitness").get<double>() == direct.best_fitness);
    REQUIRE(out.at("evaluations_used").get<long long>() == direct.evaluations_used);
}

TEST_CASE("failed commands clean up their partial outputs") {
    TempDir dir("cleanup");
    auto cfg = load_config_text(R"({
      "master_seed": 1,
      "compare": {"algorithms": ["PSO"], "runs": 2, "budget_fe": 100, "population_size": 5},
      "problems": [{"id": "beamform", "elements": 4, "bits": 1, "seed": 1}]
    })");
    cfg.output_dir = dir.str();
    std::ostringstream quiet;
    REQUIRE_THROWS(cli::cmd_compare(cfg, quiet));  // PSO has no discrete variant
    REQUIRE_FALSE(fs::exists(fs::path(dir.str()) / "compare.csv"));
}

TEST_CASE("catalog command lists both design spaces") {
    std::ostringstream os;
    cli::cmd_catalog(os);
    REQUIRE(os.str().find("search_pso") != std::string::npos);
    REQUIRE(os.str().find("search_reset_creep") != std::string::npos);
}
