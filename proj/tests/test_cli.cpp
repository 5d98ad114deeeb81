#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "corpus.hpp"
#include "storebench/cli.hpp"
#include "storebench/fixtures.hpp"
#include "storebench/process.hpp"
#include "storebench/server.hpp"
#include "support.hpp"

using namespace storebench;
using nlohmann::json;
namespace t = storebench::testing;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = dispatch(args, out, err);
    return Run{code, out.str(), err.str()};
}

/// Sets an environment variable for the scope.
class ScopedEnv {
public:
    ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) { setenv(name_.c_str(), value.c_str(), 1); }
    ~ScopedEnv() { unsetenv(name_.c_str()); }

private:
    std::string name_;
};

std::string benchmark_for(const t::TempDir& dir, const std::string& shop) {
    const std::string path = (dir / (shop + "-bench.json")).string();
    REQUIRE(run({"gen-tasks", "fixture:" + shop, "--out", path}).code == kExitOk);
    return path;
}

}  // namespace

TEST_CASE("exit code constants") {
    CHECK(kExitOk == 0);
    CHECK(kExitUsage == 1);
    CHECK(kExitValidation == 2);
    CHECK(kExitHalt == 3);
    CHECK(kExitRuntime == 4);
}

TEST_CASE("usage errors and help") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"validate"}).code == kExitUsage);
    CHECK(run({"bench", "x.json"}).code == kExitUsage);
    CHECK(run({"analyze", "fixture:tiny", "--max-pages", "many"}).code == kExitUsage);
    const Run help = run({"--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("gen-tasks") != std::string::npos);
    CHECK(help.out.find("SHOPGYM_") != std::string::npos);
    CHECK(run({"bench", "--help"}).code == kExitOk);
}

TEST_CASE("fixture subcommands") {
    const Run list = run({"fixture", "list"});
    CHECK(list.code == kExitOk);
    for (const auto& name : fixture_names()) CHECK(list.out.find(name + "\n") != std::string::npos);

    t::TempDir dir;
    CHECK(run({"fixture", "init", dir.path().string(), "--shop", "tiny"}).code == kExitOk);
    CHECK(std::filesystem::exists(dir / "tiny" / "products.json"));
    CHECK_FALSE(std::filesystem::exists(dir / "mock_cookware"));
    CHECK(run({"fixture", "init", dir.path().string(), "--shop", "nope"}).code == kExitUsage);
    CHECK(run({"fixture"}).code == kExitUsage);
}

TEST_CASE("gen-tasks writes a validated benchmark") {
    t::TempDir dir;
    const std::string path = benchmark_for(dir, "mock_cookware");
    const BenchmarkFile file = load_benchmark(path);
    CHECK(file.shop_slug == "mock_cookware");
    CHECK(file.hard_long_horizon.empty());

    const Run printed = run({"gen-tasks", "fixture:tiny"});
    CHECK(printed.code == kExitOk);
    CHECK(benchmark_from_json(json::parse(printed.out)).shop_slug == "tiny");

    const std::string with_journeys = (dir / "j.json").string();
    const std::string audit = (dir / "audit.json").string();
    const Run polished = run({"gen-tasks", "fixture:tiny", "--journeys", "3", "--generator", "stub-polish", "--out",
                              with_journeys, "--audit-out", audit});
    CHECK(polished.code == kExitOk);
    CHECK(load_benchmark(with_journeys).hard_long_horizon.size() == 3);
    CHECK(json::parse(t::slurp(audit))["exit_code"] == 0);

    const std::string halted = (dir / "halted.json").string();
    const Run stubborn = run({"gen-tasks", "fixture:tiny", "--journeys", "3", "--generator", "stub-stubborn", "--out", halted});
    CHECK(stubborn.code == kExitHalt);
    CHECK(stubborn.err.find("halted:") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(halted));

    CHECK(run({"gen-tasks", "fixture:nope"}).code == kExitUsage);
}

TEST_CASE("gen-tasks applies overrides and rejects ungrounded ones") {
    t::TempDir dir;
    REQUIRE(run({"fixture", "init", dir.path().string(), "--shop", "mock_cookware"}).code == kExitOk);
    const auto bundle = dir / "mock_cookware";
    std::filesystem::create_directories(bundle / "data_sources");
    Task replaced = t::make_task("mock_cookware-browse-1", TaskType::shopping, "Open the Knives collection and add any knife.",
                                 "/collections/knives", "navigation");
    t::spit(bundle / "data_sources" / "hand.json", json::array({json(replaced)}).dump());
    const std::string out = (dir / "b.json").string();
    CHECK(run({"gen-tasks", bundle.string(), "--out", out}).code == kExitOk);
    CHECK(load_benchmark(out).find("mock_cookware-browse-1")->intent == replaced.intent);

    t::spit(bundle / "data_sources" / "bad.json", json::array({json(t::planted_tasks()[1])}).dump());
    const Run rejected = run({"gen-tasks", bundle.string(), "--out", out});
    CHECK(rejected.code == kExitValidation);
    CHECK(rejected.err.find("unknown-product") != std::string::npos);
}

TEST_CASE("validate reports issues and sets the exit code") {
    t::TempDir dir;
    const std::string clean = benchmark_for(dir, "mock_cookware");
    const Run ok = run({"validate", clean, "fixture:mock_cookware"});
    CHECK(ok.code == kExitOk);

    BenchmarkFile file = load_benchmark(clean);
    for (auto task : t::planted_tasks()) {
        task.bundle_tag = BundleTag::hard_long_horizon;
        file.hard_long_horizon.push_back(task.id);
        file.tasks.push_back(task);
    }
    const std::string planted = (dir / "planted.json").string();
    save_benchmark(file, planted);
    const std::string issues = (dir / "issues.json").string();
    const Run bad = run({"validate", planted, "fixture:mock_cookware", "--issues-out", issues});
    CHECK(bad.code == kExitValidation);
    CHECK(bad.out.find("4 error(s), 3 warning(s)") != std::string::npos);
    CHECK(json::parse(t::slurp(issues)).size() == 7);

    t::spit(dir / "broken.json", R"({"tasks": 3})");
    CHECK(run({"validate", (dir / "broken.json").string(), "fixture:mock_cookware"}).code == kExitValidation);
    CHECK(run({"validate", (dir / "missing.json").string(), "fixture:mock_cookware"}).code == kExitRuntime);
}

TEST_CASE("analyze and compare") {
    t::TempDir dir;
    const std::string a = (dir / "a.json").string();
    const std::string b = (dir / "b.json").string();
    const std::string graph = (dir / "g.json").string();
    const Run first = run({"analyze", "fixture:tiny", "--name", "tiny", "--out", a, "--graph-out", graph});
    CHECK(first.code == kExitOk);
    CHECK(first.out.find("report tiny") != std::string::npos);
    CHECK(json::parse(t::slurp(a))["graph"]["nodes"] == 52);
    CHECK(json::parse(t::slurp(graph)).contains("edges"));
    CHECK(run({"analyze", "fixture:tiny", "--collapse-routes", "--json", "--out", b}).code == kExitOk);
    CHECK(run({"analyze", "fixture:tiny", "--surface-rule", "no-equals"}).code == kExitUsage);

    const Run cmp = run({"compare", a, b});
    CHECK(cmp.code == kExitOk);
    CHECK(cmp.out.find("avg_out_degree") != std::string::npos);
    CHECK(run({"compare", a}).code == kExitUsage);
    CHECK(run({"analyze", "http://127.0.0.1:1"}).code == kExitRuntime);
}

TEST_CASE("bench runs against in-process and HTTP environments") {
    t::TempDir dir;
    const std::string bench = benchmark_for(dir, "tiny");
    const std::string results = (dir / "results.json").string();
    const Run local = run({"bench", bench, "--env", "fixture:tiny", "--profile", "browsergym", "--repeats", "1", "--out", results});
    CHECK(local.code == kExitOk);
    CHECK(local.out.find("profile browsergym, 1 repeats") != std::string::npos);
    CHECK(json::parse(t::slurp(results))["profile"]["name"] == "browsergym");

    Storefront sf(fixture_shop("tiny"));
    StorefrontServer server(sf, "127.0.0.1", 0);
    const Run remote = run({"bench", bench, "--env", server.base_url(), "--repeats", "1", "--json"});
    CHECK(remote.code == kExitOk);
    CHECK(json::parse(remote.out)["bundles"]["easy_short_horizon"]["pass_rate"] == 1.0);

    CHECK(run({"bench", bench, "--env", "fixture:tiny", "--profile", "turbo"}).code == kExitUsage);
    CHECK(run({"bench", bench, "--env", "fixture:tiny", "--repeats", "0"}).code == kExitUsage);
    CHECK(run({"bench", bench, "--env", "http://127.0.0.1:1", "--repeats", "1"}).code == kExitRuntime);
}

TEST_CASE("reset talks to a running storefront") {
    Storefront sf(fixture_shop("tiny"));
    StorefrontServer server(sf, "127.0.0.1", 0);
    CHECK(run({"reset", "--env", server.base_url()}).code == kExitOk);
    CHECK(run({"reset", "--env", server.base_url(), "--scope", "everything"}).code == kExitUsage);
    CHECK(run({"reset", "--env", server.base_url(), "--scope", "session"}).code == kExitUsage);
    CHECK(run({"reset", "--env", "http://127.0.0.1:1"}).code == kExitRuntime);
}

TEST_CASE("flags override environment variables, which override the config file") {
    t::TempDir dir;
    t::spit(dir / "config.json", R"({"gen-tasks": {"journeys": 2, "generator": "stub-stubborn"}})");
    const std::string config = (dir / "config.json").string();
    CHECK(run({"--config", config, "gen-tasks", "fixture:tiny"}).code == kExitHalt);
    {
        ScopedEnv env("SHOPGYM_GENERATOR", "stub");
        CHECK(run({"--config", config, "gen-tasks", "fixture:tiny"}).code == kExitOk);
        CHECK(run({"--config", config, "gen-tasks", "fixture:tiny", "--generator", "stub-stubborn"}).code == kExitHalt);
    }
    {
        ScopedEnv env("SHOPGYM_CONFIG", config);
        CHECK(run({"gen-tasks", "fixture:tiny"}).code == kExitHalt);
    }
    t::spit(dir / "top.json", R"({"journeys": 1, "generator": "stub-stubborn"})");
    CHECK(run({"--config", (dir / "top.json").string(), "gen-tasks", "fixture:tiny"}).code == kExitHalt);
    t::spit(dir / "bad.json", "{");
    CHECK(run({"--config", (dir / "bad.json").string(), "gen-tasks", "fixture:tiny"}).code == kExitRuntime);
}

TEST_CASE("serve runs until interrupted") {
    const std::string command = "timeout --preserve-status -s INT 2 " + std::string(STOREBENCH_BINARY) +
                                " serve fixture:tiny --host 127.0.0.1 --port 0";
    const ProcessResult r = run_process(command, "", std::chrono::seconds(20));
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("serving tiny at http://127.0.0.1:") != std::string::npos);
    CHECK(r.out.find("stopped") != std::string::npos);

    const ProcessResult bad = run_process(std::string(STOREBENCH_BINARY) + " serve fixture:nope", "", std::chrono::seconds(20));
    CHECK(bad.exit_code == kExitUsage);
}
