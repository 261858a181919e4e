#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "cqsim/json_io.hpp"
#include "cqsim/scenario.hpp"

using namespace cqsim;
namespace fs = std::filesystem;

namespace {

fs::path work_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "cqsim_tests" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, std::string* err_text = nullptr) {
    const fs::path errfile = fs::temp_directory_path() / "cqsim_tests" / "stderr.txt";
    fs::create_directories(errfile.parent_path());
    const std::string cmd = std::string(CQSIM_CLI_PATH) + " " + args + " 2>" + errfile.string();
    const int status = std::system(cmd.c_str());
    if (err_text) *err_text = slurp(errfile);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string config_path(const std::string& name) {
    return (fs::path(CQSIM_CONFIG_DIR) / name).string();
}

json small_compare_config() {
    json j = load_json(config_path("compare_default.json"));
    j["grid"]["nx"] = 161;
    j["grid"]["nq"] = 161;
    j["scheme"]["dt"] = 2e-5;
    return j;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
    const fs::path p = dir / name;
    save_json(p.string(), j);
    return p;
}

}  // namespace

TEST_CASE("scenario JSON round trip") {
    ScenarioConfig cfg = scenario_from_json(load_json(config_path("default_scenario.json")));
    const ScenarioConfig back = scenario_from_json(scenario_to_json(cfg));
    CHECK(back.params.epsilon == cfg.params.epsilon);
    CHECK(back.seed == cfg.seed);
    CHECK(back.schedule.size() == cfg.schedule.size());
    CHECK(back.nx == cfg.nx);
}

TEST_CASE("schedules must be ordered and measure after the window") {
    ScenarioConfig cfg = scenario_from_json(load_json(config_path("default_scenario.json")));

    ScenarioConfig bad = cfg;
    bad.schedule = {{ScheduleAction::Kind::EvolveTo, 2.0},
                    {ScheduleAction::Kind::EvolveTo, 1.0}};
    CHECK_THROWS_AS(validate_scenario(bad), SimError);

    ScenarioConfig early = cfg;
    ScheduleAction measure;
    measure.kind = ScheduleAction::Kind::Measure;
    early.schedule = {measure};
    CHECK_THROWS_AS(validate_scenario(early), SimError);

    ScenarioConfig target = cfg;
    ScheduleAction exp;
    exp.kind = ScheduleAction::Kind::Export;
    exp.target = "everything";
    target.schedule = {exp};
    CHECK_THROWS_AS(validate_scenario(target), SimError);
}

TEST_CASE("the runner is deterministic and self-consistent") {
    ScenarioConfig cfg = scenario_from_json(load_json(config_path("default_scenario.json")));
    cfg.schedule = {{ScheduleAction::Kind::EvolveTo, 10.0},
                    ScheduleAction{ScheduleAction::Kind::Measure}};

    const fs::path d1 = work_dir("run1"), d2 = work_dir("run2");
    const ScenarioResult r1 = run_scenario(cfg, d1.string());
    const ScenarioResult r2 = run_scenario(cfg, d2.string());
    CHECK(r1.manifest.dump() == r2.manifest.dump());
    CHECK(slurp(d1 / "manifest.json") == slurp(d2 / "manifest.json"));

    const auto& ev = r1.manifest.at("events").at(0);
    const double x_m = ev.at("record").at("x_m").get<double>();
    const double t_m = ev.at("record").at("t_m").get<double>();
    const double q_m = ev.at("q_m").get<double>();
    CHECK(q_m == x_m / (cfg.params.lambda * t_m));
    CHECK(ev.at("sigma_Qm").get<double>() == cfg.params.sigma_C / (cfg.params.lambda * t_m));

    ScenarioConfig reseeded = cfg;
    reseeded.seed = cfg.seed + 1;
    const ScenarioResult r3 = run_scenario(reseeded, work_dir("run3").string());
    CHECK(r3.manifest.at("events").at(0).at("q_prime").get<double>() !=
          ev.at("q_prime").get<double>());
}

TEST_CASE("cli simulate is reproducible byte for byte") {
    const fs::path d1 = work_dir("cli_sim1"), d2 = work_dir("cli_sim2");
    CHECK(run_cli("simulate --config " + config_path("default_scenario.json") + " --out " +
                  d1.string()) == 0);
    CHECK(run_cli("simulate --config " + config_path("default_scenario.json") + " --out " +
                  d2.string()) == 0);
    const std::string m1 = slurp(d1 / "manifest.json");
    CHECK(!m1.empty());
    CHECK(m1 == slurp(d2 / "manifest.json"));
}

TEST_CASE("cli simulate rejects a non-positive interaction window") {
    const fs::path d = work_dir("cli_bad");
    json j = load_json(config_path("default_scenario.json"));
    j["params"]["epsilon"] = 0.0;
    const fs::path cfg = write_config(d, "bad.json", j);
    std::string err;
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + d.string(), &err) == 1);
    CHECK(err.find("NonPositiveDuration") != std::string::npos);
}

TEST_CASE("cli compare passes at the working point and flags weak coupling") {
    const fs::path d = work_dir("cli_cmp");
    const fs::path cfg = write_config(d, "small.json", small_compare_config());
    CHECK(run_cli("compare --config " + cfg.string() + " --out " + d.string()) == 0);
    const json summary = load_json((d / "compare_summary.json").string());
    CHECK(summary.at("l1_advection").get<double>() < 1e-3);
    CHECK(summary.at("l1_full_hybrid").get<double>() < 5e-3);

    json weak = small_compare_config();
    weak["params"]["lambda"] = 0.01;
    const fs::path wcfg = write_config(d, "weak.json", weak);
    std::string err;
    CHECK(run_cli("compare --config " + wcfg.string() + " --out " + d.string(), &err) == 3);
    CHECK(err.find("gate failed") != std::string::npos);
}

TEST_CASE("cli compare reports step-size violations as numerical failures") {
    const fs::path d = work_dir("cli_cfl");
    json j = small_compare_config();
    // fine grid, big step: the first step already exceeds the advective limit
    j["grid"]["nx"] = 1601;
    j["grid"]["nq"] = 1601;
    j["scheme"]["dt"] = 0.005;
    const fs::path cfg = write_config(d, "cfl.json", j);
    std::string err;
    CHECK(run_cli("compare --config " + cfg.string() + " --out " + d.string(), &err) == 2);
    CHECK(err.find("CflViolation") != std::string::npos);
}

TEST_CASE("cli mixture-equiv gates on pointwise agreement") {
    const fs::path d = work_dir("cli_meq");
    CHECK(run_cli("mixture-equiv --out " + d.string()) == 0);
    CHECK(fs::exists(d / "equiv_report.csv"));

    std::string err;
    CHECK(run_cli("mixture-equiv --spec " + config_path("phase_specs_negative.json") + " --out " +
                      d.string(),
                  &err) == 3);
    CHECK(err.find("equivalence gate failed") != std::string::npos);
}

TEST_CASE("cli sample gates, warns, and reproduces") {
    const fs::path d1 = work_dir("cli_smp1"), d2 = work_dir("cli_smp2");
    std::string err;
    CHECK(run_cli("sample --config " + config_path("default_scenario.json") + " --n 2000 --out " +
                      d1.string(),
                  &err) == 0);
    CHECK(err.find("underpowered") != std::string::npos);
    CHECK(run_cli("sample --config " + config_path("default_scenario.json") + " --n 2000 --out " +
                  d2.string()) == 0);
    CHECK(slurp(d1 / "samples.csv") == slurp(d2 / "samples.csv"));

    CHECK(run_cli("sample --config " + config_path("default_scenario.json") + " --n 50 --out " +
                  d1.string()) == 1);

    const json rep = load_json((d1 / "ks_report.json").string());
    CHECK(rep.at("gate_applied").get<bool>() == false);
}

TEST_CASE("manifests are self-contained") {
    ScenarioConfig cfg = scenario_from_json(load_json(config_path("default_scenario.json")));
    cfg.schedule = {{ScheduleAction::Kind::EvolveTo, 10.0},
                    ScheduleAction{ScheduleAction::Kind::Measure}};
    const ScenarioResult first = run_scenario(cfg, work_dir("selfcontained1").string());

    // Re-running the config embedded in the manifest reproduces the manifest.
    const ScenarioConfig embedded = scenario_from_json(first.manifest.at("config"));
    const ScenarioResult second = run_scenario(embedded, work_dir("selfcontained2").string());
    CHECK(first.manifest.dump() == second.manifest.dump());
}

TEST_CASE("density CSV carries the quantity and time header") {
    const fs::path d = work_dir("csv_header");
    const GaussianMixture1D mix({{1.0, 0.0, 1.0}});
    const Grid1D g = cover(mix, 8.0, 101);
    write_density_csv((d / "density.csv").string(), "pointer_density", 2.5, g,
                      mix.sample_pdf(g));
    const std::string text = slurp(d / "density.csv");
    CHECK(text.find("# quantity=pointer_density t=2.5") == 0);
    CHECK(text.find("coordinate,value") != std::string::npos);
}

TEST_CASE("cli simulate writes figures when asked") {
    const fs::path d = work_dir("cli_svg");
    CHECK(run_cli("simulate --config " + config_path("default_scenario.json") + " --out " +
                  d.string() + " --svg") == 0);
    CHECK(fs::exists(d / "initial_0.svg"));
    CHECK(fs::exists(d / "pointer_split_4.svg"));
}

TEST_CASE("posterior export requires a measurement") {
    ScenarioConfig cfg = scenario_from_json(load_json(config_path("default_scenario.json")));
    ScheduleAction exp;
    exp.kind = ScheduleAction::Kind::Export;
    exp.target = "posterior";
    cfg.schedule = {exp};
    CHECK_THROWS_AS(run_scenario(cfg, work_dir("posterior_early").string()), SimError);
}

TEST_CASE("noisy measurements flow through the manifest") {
    ScenarioConfig cfg = scenario_from_json(load_json(config_path("default_scenario.json")));
    ScheduleAction measure;
    measure.kind = ScheduleAction::Kind::Measure;
    measure.noisy = true;
    measure.sigma_m = 0.05;
    cfg.schedule = {{ScheduleAction::Kind::EvolveTo, 10.0}, measure};
    const ScenarioResult r = run_scenario(cfg, work_dir("noisy").string());
    const auto& ev = r.manifest.at("events").at(0);
    CHECK(ev.at("mode") == "noisy");
    CHECK(ev.at("record").at("sigma_m").get<double>() == 0.05);
    CHECK(ev.at("posterior").at("quantum").size() == 2);
}
