#include "storebench/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <pthread.h>

#include "storebench/analyzer.hpp"
#include "storebench/browser.hpp"
#include "storebench/catalog.hpp"
#include "storebench/fixtures.hpp"
#include "storebench/journey.hpp"
#include "storebench/runner.hpp"
#include "storebench/server.hpp"
#include "storebench/task.hpp"
#include "storebench/taskgen.hpp"
#include "storebench/validator.hpp"

namespace storebench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr const char* kEnvPrefix = "SHOPGYM_";

constexpr const char* kPrecedenceNote =
    "Settings resolve as: command-line flags, then SHOPGYM_<OPTION> environment variables, then the JSON\n"
    "config file given by --config or SHOPGYM_CONFIG. Config keys are option names with dashes turned\n"
    "into underscores, at top level or under a per-subcommand object.\n"
    "Exit codes: 0 success, 1 usage, 2 validation errors, 3 polish-loop halt, 4 runtime failure.";

std::string env_name(const std::string& key) {
    std::string out = kEnvPrefix;
    for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string config_key(const std::string& key) {
    std::string out = key;
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

void assign(const json& v, std::string& out) { out = v.is_string() ? v.get<std::string>() : v.dump(); }
void assign(const json& v, bool& out) {
    if (!v.is_boolean()) throw UsageError("config value must be a boolean");
    out = v.get<bool>();
}
template <typename T>
std::enable_if_t<std::is_arithmetic_v<T>> assign(const json& v, T& out) {
    if (!v.is_number()) throw UsageError("config value must be a number");
    out = v.get<T>();
}
void assign(const json& v, std::vector<std::string>& out) {
    out.clear();
    if (v.is_array()) {
        for (const auto& item : v) out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
    } else {
        out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
}

/// Registers options that also read SHOPGYM_ variables and config-file defaults.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* option(const std::string& key, T& target, const std::string& description) {
        setters_[config_key(key)] = [&target, key](const json& v) {
            try {
                assign(v, target);
            } catch (const std::exception& e) {
                throw UsageError("config key '" + config_key(key) + "': " + e.what());
            }
        };
        return app_->add_option("--" + key, target, description)->envname(env_name(key))->capture_default_str();
    }

    CLI::Option* flag(const std::string& key, bool& target, const std::string& description) {
        setters_[config_key(key)] = [&target, key](const json& v) {
            try {
                assign(v, target);
            } catch (const std::exception& e) {
                throw UsageError("config key '" + config_key(key) + "': " + e.what());
            }
        };
        return app_->add_flag("--" + key, target, description)->envname(env_name(key));
    }

    void apply(const json& config) const {
        if (!config.is_object()) return;
        auto section = [&](const json& scope) {
            for (const auto& [key, setter] : setters_) {
                if (scope.contains(key) && !scope[key].is_object()) setter(scope[key]);
            }
        };
        section(config);
        if (config.contains(app_->get_name()) && config[app_->get_name()].is_object()) section(config[app_->get_name()]);
    }

    CLI::App* app() const { return app_; }

private:
    CLI::App* app_;
    std::map<std::string, std::function<void(const json&)>> setters_;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

/// Config path from --config (scanned before parsing) or SHOPGYM_CONFIG.
std::optional<fs::path> config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return fs::path(args[i + 1]);
        if (args[i].rfind("--config=", 0) == 0) return fs::path(args[i].substr(9));
    }
    if (const char* env = std::getenv("SHOPGYM_CONFIG"); env && *env) return fs::path(env);
    return std::nullopt;
}

ShopBundle load_bundle_source(const std::string& source) {
    if (source.rfind("fixture:", 0) == 0) {
        const std::string name = source.substr(8);
        const auto names = fixture_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) throw UsageError("unknown fixture '" + name + "'");
        return fixture_shop(name);
    }
    if (!fs::is_directory(source)) throw UsageError("bundle directory not found: " + source);
    return load_shop_bundle(source);
}

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

/// A storefront reached over HTTP or hosted in-process from a bundle source.
struct Environment {
    std::unique_ptr<Storefront> storefront;
    std::string url;

    explicit Environment(const std::string& source) {
        if (is_url(source)) {
            url = source;
        } else {
            storefront = std::make_unique<Storefront>(load_bundle_source(source));
        }
    }

    std::unique_ptr<Transport> transport() const {
        return storefront ? make_storefront_transport(*storefront) : make_http_transport(url);
    }
    std::unique_ptr<Fetcher> fetcher() const {
        return storefront ? make_storefront_fetcher(*storefront) : make_http_fetcher(url);
    }
};

// ---------------------------------------------------------------------------
// Subcommands

struct ServeArgs {
    std::string bundle;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::uint64_t seed = 0;
};

int run_serve(const ServeArgs& a, std::ostream& out) {
    // Block the stop signals before the server threads start so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    Storefront storefront(load_bundle_source(a.bundle), StorefrontOptions{a.seed});
    StorefrontServer server(storefront, a.host, a.port);
    out << "serving " << storefront.bundle().shop_slug() << " at " << server.base_url() << std::endl;
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    out << "stopped" << std::endl;
    return kExitOk;
}

struct GenArgs {
    std::string bundle;
    std::size_t journeys = 0;
    std::string generator = "stub";
    std::string out;
    std::string audit_out;
    std::string overrides;
    std::uint64_t seed = 0;
    double timeout = 120;
    std::string domain = "http://127.0.0.1:8080";
};

int run_gen_tasks(const GenArgs& a, std::ostream& out, std::ostream& err) {
    const ShopBundle bundle = load_bundle_source(a.bundle);
    GeneratorConfig config;
    config.seed = a.seed;
    std::vector<Task> short_tasks = generate_short_tasks(bundle, config);
    std::vector<Task> journeys;
    std::optional<json> audit;
    if (a.journeys > 0) {
        auto generator = is_stub_generator_name(a.generator) ? make_stub_generator(a.generator, bundle)
                                                             : make_process_generator(a.generator);
        JourneyOptions options;
        options.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout * 1000));
        options.prompt.domain = a.domain;
        JourneyResult result = generate_journeys(*generator, bundle, a.journeys, options);
        audit = audit_log(result);
        if (!a.audit_out.empty()) {
            write_file(a.audit_out, audit->dump(2) + "\n");
        } else {
            err << audit->dump(2) << "\n";
        }
        if (result.halted()) {
            err << "halted: " << result.halt_reason << "\n";
            return result.exit_code;
        }
        journeys = std::move(result.tasks);
    }

    const fs::path overrides = a.overrides.empty() && !is_url(a.bundle) && a.bundle.rfind("fixture:", 0) != 0
                                   ? fs::path(a.bundle) / "data_sources"
                                   : fs::path(a.overrides);
    if (!overrides.empty()) {
        std::vector<Task> all = std::move(short_tasks);
        all.insert(all.end(), journeys.begin(), journeys.end());
        all = apply_overrides(std::move(all), overrides);
        short_tasks.clear();
        journeys.clear();
        for (auto& t : all) (t.id.find("-e2e-v1-") != std::string::npos ? journeys : short_tasks).push_back(std::move(t));
    }

    const BenchmarkFile file = assemble_benchmark(bundle, std::move(short_tasks), std::move(journeys));
    const std::string text = json(file).dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        write_file(a.out, text);
        out << "wrote " << file.tasks.size() << " tasks to " << a.out << "\n";
    }
    return kExitOk;
}

struct ValidateArgs {
    std::string benchmark;
    std::string bundle;
    std::string issues_out;
};

int run_validate(const ValidateArgs& a, std::ostream& out) {
    const ShopBundle bundle = load_bundle_source(a.bundle);
    if (!fs::exists(a.benchmark)) throw std::runtime_error("benchmark file not found: " + a.benchmark);
    const BenchmarkFile file = load_benchmark(a.benchmark);
    const auto issues = validate(file.tasks, bundle);
    const Disposition d = exit_disposition(issues);
    out << d.report;
    if (!d.report.empty() && d.report.back() != '\n') out << "\n";
    if (!a.issues_out.empty()) write_file(a.issues_out, json(issues).dump(2) + "\n");
    return d.code;
}

struct AnalyzeArgs {
    std::string target;
    std::size_t max_pages = 1000;
    std::size_t max_depth = 10;
    std::size_t concurrency = 4;
    bool collapse_routes = false;
    bool heuristic_surfaces = false;
    std::vector<std::string> surface_rules;
    std::string name;
    std::string out;
    std::string graph_out;
    bool json_output = false;
};

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
    CrawlLimits limits;
    limits.max_pages = a.max_pages;
    limits.max_depth = a.max_depth;
    limits.concurrency = std::max<std::size_t>(1, a.concurrency);
    limits.collapse_routes = a.collapse_routes;
    if (a.heuristic_surfaces) limits.surface_rules = heuristic_surface_rules();
    for (const auto& spec : a.surface_rules) {
        try {
            limits.surface_rules.push_back(parse_surface_rule(spec));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    const Environment env(a.target);
    auto fetcher = env.fetcher();
    const CrawlResult result = crawl(*fetcher, limits);
    const ComplexityReport report = make_report(a.name.empty() ? a.target : a.name, result);
    const json document = to_json(report);
    if (!a.out.empty()) write_file(a.out, document.dump(2) + "\n");
    if (!a.graph_out.empty()) write_file(a.graph_out, to_json(result.graph).dump(2) + "\n");
    if (a.json_output) {
        out << document.dump(2) << "\n";
    } else {
        char line[160];
        out << "report " << report.name << "\n";
        std::snprintf(line, sizeof line, "  %-16s %zu\n  %-16s %zu\n  %-16s %zu\n", "pages", report.pages, "nodes",
                      report.nodes, "edges", report.edges);
        out << line;
        std::snprintf(line, sizeof line, "  %-16s %.3f\n  %-16s %.3f\n  %-16s %.3f\n  %-16s %.3f\n  %-16s %.3f\n",
                      "avg_out_degree", report.avg_out_degree, "tree_depth", report.tree_depth, "fill", report.fill_count,
                      "click", report.click_count, "choice", report.choice_count);
        out << line;
        if (!result.graph.fetch_errors.empty()) out << "  fetch errors: " << result.graph.fetch_errors.size() << "\n";
    }
    return kExitOk;
}

struct CompareArgs {
    std::vector<std::string> reports;
    std::string out;
    bool json_output = false;
};

int run_compare(const CompareArgs& a, std::ostream& out) {
    if (a.reports.size() < 2) throw UsageError("compare needs at least two reports");
    std::vector<ComplexityReport> reports;
    for (const auto& path : a.reports) reports.push_back(report_from_json(json::parse(read_file(path))));
    const Comparison c = compare_report(reports);
    if (!a.out.empty()) write_file(a.out, c.document.dump(2) + "\n");
    out << (a.json_output ? c.document.dump(2) + "\n" : c.table);
    return kExitOk;
}

struct BenchArgs {
    std::string benchmark;
    std::string env;
    std::string agent = "scripted";
    std::string judge = "rules";
    std::string profile = "internal";
    int repeats = kDefaultRepeats;
    std::string out;
    double timeout = 120;
    bool json_output = false;
};

int run_bench(const BenchArgs& a, std::ostream& out) {
    if (a.repeats < 1) throw UsageError("--repeats must be at least 1");
    BenchOptions options;
    try {
        options.profile = profile_by_name(a.profile);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    options.repeats = a.repeats;
    if (!fs::exists(a.benchmark)) throw std::runtime_error("benchmark file not found: " + a.benchmark);
    const BenchmarkFile file = load_benchmark(a.benchmark);
    const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout * 1000));
    AgentFactory agents;
    if (a.agent == "scripted") {
        agents = [] { return make_scripted_agent(); };
    } else {
        agents = [command = a.agent, timeout] { return make_process_agent(command, timeout); };
    }
    std::unique_ptr<Judge> judge = a.judge == "stub"    ? make_stub_judge()
                                   : a.judge == "rules" ? make_rules_judge()
                                                        : make_process_judge(a.judge, timeout);
    const Environment env(a.env);
    auto transport = env.transport();
    const BenchResult result = run_benchmark(file, *transport, agents, *judge, options);
    const json document = to_json(result, options);
    if (!a.out.empty()) write_file(a.out, document.dump(2) + "\n");
    if (a.json_output) {
        out << document.dump(2) << "\n";
    } else {
        out << "profile " << options.profile.name << ", " << options.repeats << " repeats, " << file.tasks.size()
            << " tasks\n"
            << render_table(result.report);
    }
    return kExitOk;
}

struct ResetArgs {
    std::string env = "http://127.0.0.1:8080";
    std::string scope = "all";
    std::string session;
};

int run_reset(const ResetArgs& a, std::ostream& out) {
    if (a.scope != "all" && a.scope != "session") throw UsageError("--scope must be session or all");
    if (a.scope == "session" && a.session.empty()) throw UsageError("--scope session needs --session");
    const Environment env(a.env);
    auto transport = env.transport();
    const Response r = transport->send(Request{"POST", "/__reset?scope=" + a.scope, {}, {}, a.session});
    if (r.status != 200) throw std::runtime_error("reset failed with HTTP " + std::to_string(r.status));
    out << r.body << (r.body.empty() || r.body.back() != '\n' ? "\n" : "");
    return kExitOk;
}

struct FixtureArgs {
    std::string directory;
    std::vector<std::string> shops;
};

int run_fixture_init(const FixtureArgs& a, std::ostream& out) {
    const auto names = fixture_names();
    std::vector<std::string> chosen = a.shops.empty() ? names : a.shops;
    for (const auto& name : chosen) {
        if (std::find(names.begin(), names.end(), name) == names.end()) throw UsageError("unknown fixture '" + name + "'");
    }
    for (const auto& name : chosen) {
        const fs::path target = fs::path(a.directory) / name;
        save_shop_bundle(fixture_shop(name), target);
        out << "wrote " << target.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app("Sandbox storefront benchmark toolkit", "storebench");
    app.footer(kPrecedenceNote);
    app.require_subcommand(1);
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file")->envname("SHOPGYM_CONFIG");

    std::vector<std::unique_ptr<Options>> registries;
    auto command = [&](const std::string& name, const std::string& description) {
        registries.push_back(std::make_unique<Options>(app.add_subcommand(name, description)));
        return registries.back().get();
    };

    ServeArgs serve;
    {
        Options* o = command("serve", "Serve a shop bundle over HTTP until interrupted");
        o->app()->add_option("bundle", serve.bundle, "Bundle directory or fixture:<name>")->required();
        o->option("host", serve.host, "Listen address");
        o->option("port", serve.port, "Listen port; 0 picks a free port");
        o->option("seed", serve.seed, "Engine seed");
    }

    GenArgs gen;
    {
        Options* o = command("gen-tasks", "Generate and validate a benchmark file for a shop");
        o->app()->add_option("bundle", gen.bundle, "Bundle directory or fixture:<name>")->required();
        o->option("journeys", gen.journeys, "Number of long-horizon journeys to author");
        o->option("generator", gen.generator, "Generator command, or stub, stub-polish, stub-stubborn");
        o->option("out", gen.out, "Benchmark output path; standard output when empty");
        o->option("audit-out", gen.audit_out, "Polish-loop audit log path; standard error when empty");
        o->option("overrides", gen.overrides, "Hand-authored task directory; defaults to <bundle>/data_sources");
        o->option("seed", gen.seed, "Generator seed");
        o->option("timeout", gen.timeout, "Seconds per generator call");
        o->option("domain", gen.domain, "Storefront origin named in the journey prompt");
    }

    ValidateArgs val;
    {
        Options* o = command("validate", "Validate a benchmark file against a shop bundle");
        o->app()->add_option("benchmark", val.benchmark, "Benchmark JSON")->required();
        o->app()->add_option("bundle", val.bundle, "Bundle directory or fixture:<name>")->required();
        o->option("issues-out", val.issues_out, "Write the issue list as JSON");
    }

    AnalyzeArgs an;
    {
        Options* o = command("analyze", "Crawl a storefront and report structural complexity");
        o->app()->add_option("target", an.target, "Base URL, bundle directory or fixture:<name>")->required();
        o->option("max-pages", an.max_pages, "Page fetch limit");
        o->option("max-depth", an.max_depth, "Link depth limit");
        o->option("concurrency", an.concurrency, "Parallel fetches per level");
        o->flag("collapse-routes", an.collapse_routes, "Merge /products/<handle> style routes into one node");
        o->flag("heuristic-surfaces", an.heuristic_surfaces, "Also detect common theme drawers and dropdowns");
        o->option("surface-rule", an.surface_rules, "Extra surface selector, surface=selector (repeatable)");
        o->option("name", an.name, "Report name; defaults to the target");
        o->option("out", an.out, "Report JSON path");
        o->option("graph-out", an.graph_out, "Transition graph JSON path");
        o->flag("json", an.json_output, "Print the report as JSON");
    }

    CompareArgs cmp;
    {
        Options* o = command("compare", "Compare complexity reports");
        o->app()->add_option("reports", cmp.reports, "Report JSON files")->required();
        o->option("out", cmp.out, "Comparison JSON path");
        o->flag("json", cmp.json_output, "Print the comparison as JSON");
    }

    BenchArgs bench;
    {
        Options* o = command("bench", "Run agents against a benchmark with gating and aggregation");
        o->app()->add_option("benchmark", bench.benchmark, "Benchmark JSON")->required();
        o->option("env", bench.env, "Storefront base URL, bundle directory or fixture:<name>")->required();
        o->option("agent", bench.agent, "Agent command, or scripted");
        o->option("judge", bench.judge, "Judge command, or stub or rules");
        o->option("profile", bench.profile, "browsergym or internal");
        o->option("repeats", bench.repeats, "Rollouts per task");
        o->option("out", bench.out, "Results JSON path");
        o->option("timeout", bench.timeout, "Seconds per agent step or judge call");
        o->flag("json", bench.json_output, "Print the results as JSON");
    }

    ResetArgs reset;
    {
        Options* o = command("reset", "Reset a running storefront");
        o->option("env", reset.env, "Storefront base URL");
        o->option("scope", reset.scope, "session or all");
        o->option("session", reset.session, "Session token for --scope session");
    }

    FixtureArgs fixture;
    CLI::App* fixture_cmd = app.add_subcommand("fixture", "Bundled test shops");
    fixture_cmd->require_subcommand(1);
    CLI::App* fixture_list = fixture_cmd->add_subcommand("list", "List bundled shops");
    CLI::App* fixture_init = fixture_cmd->add_subcommand("init", "Write bundled shops as bundle directories");
    fixture_init->add_option("directory", fixture.directory, "Output directory")->required();
    fixture_init->add_option("--shop", fixture.shops, "Shop to write (repeatable); all when omitted");

    try {
        if (auto path = config_path(args)) {
            const json config = parse_json_lenient(read_file(*path));
            for (const auto& r : registries) r->apply(config);
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const CLI::App* failing = &app;
        for (CLI::App* sub : app.get_subcommands()) failing = sub;
        err << failing->help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    try {
        if (app.got_subcommand("serve")) return run_serve(serve, out);
        if (app.got_subcommand("gen-tasks")) return run_gen_tasks(gen, out, err);
        if (app.got_subcommand("validate")) return run_validate(val, out);
        if (app.got_subcommand("analyze")) return run_analyze(an, out);
        if (app.got_subcommand("compare")) return run_compare(cmp, out);
        if (app.got_subcommand("bench")) return run_bench(bench, out);
        if (app.got_subcommand("reset")) return run_reset(reset, out);
        if (fixture_list->parsed()) {
            for (const auto& name : fixture_names()) out << name << "\n";
            return kExitOk;
        }
        if (fixture_init->parsed()) return run_fixture_init(fixture, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TaskSchemaError& e) {
        err << "invalid benchmark: " << e.what() << "\n";
        return kExitValidation;
    } catch (const AssemblyError& e) {
        err << "benchmark rejected: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace storebench
