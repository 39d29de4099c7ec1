// shardsim: command line front end for the sharded scheduling simulator.

#include "shard_sched/engine.hpp"
#include "shard_sched/report.hpp"
#include "shard_sched/scenarios.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <thread>

using namespace shard_sched;

namespace {

constexpr int exit_config = 1;
constexpr int exit_invariant = 2;

struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App* app, ConfigFlags& f, std::initializer_list<std::string_view> skip = {}) {
    app->add_option("--config", f.config_path, "key = value config file; flags override it");
    for (auto key : config_keys()) {
        if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
        std::string name(key);
        std::string dashed = name;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        std::string names = "--" + name;
        if (dashed != name) names += ",--" + dashed;
        f.options[name] = app->add_option(names, f.values[name], "config field " + name);
    }
}

RunConfig resolve(const ConfigFlags& f) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
    for (const auto& [key, opt] : f.options) {
        if (opt->count() > 0) c.set(key, f.values.at(key));
    }
    c.validate();
    return c;
}

std::ostream& open_or(std::ofstream& file, const std::string& path, std::ostream& fallback) {
    if (path.empty()) return fallback;
    file.open(path);
    if (!file) throw ConfigError("output", "cannot write '" + path + "'");
    return file;
}

Rational add(Rational a, Rational b) { return Rational(a.num * b.den + b.num * a.den, a.den * b.den); }

// "0.05..0.30", "0.05..0.30:0.05", or "0.05,1/144,0.1"
std::vector<Rational> parse_rho_list(const std::string& text) {
    std::vector<Rational> out;
    if (auto dots = text.find(".."); dots != std::string::npos) {
        const Rational lo = Rational::parse(text.substr(0, dots));
        std::string rest = text.substr(dots + 2);
        Rational step{1, 20};
        if (auto colon = rest.find(':'); colon != std::string::npos) {
            step = Rational::parse(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
        }
        const Rational hi = Rational::parse(rest);
        if (step.num == 0) throw ConfigError("rho", "range step must be positive");
        for (Rational r = lo; r <= hi; r = add(r, step)) out.push_back(r);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(Rational::parse(item));
    if (out.empty()) throw ConfigError("rho", "empty list");
    return out;
}

std::vector<std::int64_t> parse_b_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoll(item));
        } catch (const std::exception&) {
            throw ConfigError("b", "not an integer: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("b", "empty list");
    return out;
}

void print_summary(std::ostream& out, const Summary& s, const RunResult& r) {
    out << "injected " << s.injected << ", committed " << s.committed << ", aborted " << s.aborted
        << ", unfinished " << s.unfinished_at_end << '\n'
        << "avg pending " << fixed6(s.avg_pending) << ", max pending " << s.max_pending << '\n'
        << "avg latency " << fixed6(s.avg_latency) << ", max latency " << s.max_latency << '\n'
        << "growth: " << (r.growth.growing ? "growing" : "stable") << " (slope " << fixed6(r.growth.slope)
        << ", r2 " << fixed6(r.growth.r2) << ")\n";
    const auto& st = r.stability;
    out << "bounds: " << (st.precondition ? "asserted" : "not asserted (rate above the precondition)")
        << ", pending " << st.max_pending << "/" << st.pending_limit << ", latency " << st.max_latency << "/"
        << st.latency_limit;
    if (st.epoch_limit) out << ", epoch " << st.max_epoch_length << "/" << st.epoch_limit;
    out << '\n';
    if (!st.ok) out << "violations: " << st.violation_count << ", first: " << st.first_violation << '\n';
}

int cmd_run(const ConfigFlags& f, bool dump) {
    const RunConfig config = resolve(f);
    if (dump) {
        dump_config(std::cout, config);
        return 0;
    }
    const auto result = run(config);
    std::ofstream csv_file;
    write_rounds_csv(open_or(csv_file, config.csv, std::cout), result.metrics);
    const auto summary = summarize(result.metrics);
    if (!config.summary.empty()) {
        std::ofstream sf;
        write_summary_csv(open_or(sf, config.summary, std::cout), summary, result.growth, result.stability);
    }
    print_summary(std::cerr, summary, result);
    const auto atomic = check_atomicity(result.metrics);
    if (!atomic.ok) throw InvariantError("atomicity: " + atomic.first_failure);
    const auto order = check_ledger_order(result.metrics, result.serialization);
    if (!order.ok) throw InvariantError("ledger order: " + order.first_failure);
    if (!result.stability.ok) throw InvariantError("bound check: " + result.stability.first_violation);
    return 0;
}

int cmd_sweep(const ConfigFlags& f, const std::string& rho_text, const std::string& b_text, unsigned threads,
              const std::string& out_path, const std::string& plots) {
    const RunConfig base = resolve(f);
    const auto rhos = parse_rho_list(rho_text);
    const auto bs = parse_b_list(b_text);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto points = sweep(base, rhos, bs, threads);
    std::ofstream file;
    write_sweep_csv(open_or(file, out_path, std::cout), points);
    if (!plots.empty()) {
        std::ofstream p(plots + "/pending.svg");
        std::ofstream l(plots + "/latency.svg");
        if (!p || !l) throw ConfigError("plots", "cannot write into '" + plots + "'");
        write_pending_svg(p, points);
        write_latency_svg(l, points);
    }
    return 0;
}

int cmd_verify() {
    int failures = 0;
    auto line = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "PASS " : "FAIL ") << what << '\n';
        if (!ok) ++failures;
    };

    const auto bds = run_bds_example();
    const std::array<std::uint32_t, 4> colors{0, 1, 1, 0};
    const std::array<Round, 4> bds_latency{6, 10, 10, 6};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& t = bds.txns[i];
        line(t.color == colors[i] && t.committed && *t.committed - bds.t == bds_latency[i],
             "bds example T" + std::to_string(t.id) + ": color " + std::to_string(t.color) + ", commit t+" +
                 (t.committed ? std::to_string(*t.committed - bds.t) : std::string("never")));
    }

    const auto fds = run_fds_example();
    const Round start = fds.t + 1;
    // frozen: T1, T4 home clusters of diameter 3, T3 waits behind them, T2 in the top layer
    const std::array<Round, 4> queued{start + 6, start + 14, start + 6, start + 6};
    const std::array<Round, 4> committed{start + 13, start + 29, start + 20, start + 13};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& t = fds.txns[i];
        const bool ok = t.queued == queued[i] && t.committed == committed[i];
        line(ok, "fds example T" + std::to_string(t.id) + ": d " + std::to_string(t.d) + ", queued t+" +
                     (t.queued ? std::to_string(*t.queued - start) : std::string("never")) + ", committed t+" +
                     (t.committed ? std::to_string(*t.committed - start) : std::string("never")));
        if (t.committed && *t.committed > start + 5 * static_cast<Round>(t.d)) {
            std::cout << "     note: T" << t.id << " commits after t+5d (it queues behind conflicting transactions)\n";
        }
    }

    RunConfig c;
    c.scheduler = SchedulerKind::bds;
    c.s = 16;
    c.k = 4;
    c.b = 2;
    c.rho = Rational(1, 72);
    c.rounds = 3000;
    const auto r = run(c);
    line(r.stability.precondition && r.stability.ok, "bds bounds at s=16, k=4, b=2, rho=1/72 over 3000 rounds");
    line(check_atomicity(r.metrics).ok && check_ledger_order(r.metrics, r.serialization).ok,
         "bds atomicity and ledger order");

    c.scheduler = SchedulerKind::fds;
    c.topology = "line";
    c.s = 8;
    c.rho = Rational(1, 20);
    c.abort_prob = 0.1;
    const auto rf = run(c);
    line(check_atomicity(rf.metrics).ok && check_ledger_order(rf.metrics, rf.serialization).ok &&
             check_pairwise_consistency(rf.metrics).ok,
         "fds atomicity and ledger order on an 8-shard line");
    return failures ? exit_invariant : 0;
}

int cmd_check_adversary(const std::string& path, const std::string& rho_text, std::int64_t b) {
    std::ifstream in(path);
    if (!in) throw ConfigError("trace", "cannot open '" + path + "'");
    const auto trace = read_trace(in);
    const auto rho = Rational::parse(rho_text);
    const auto res = check_admissible(trace, rho, b);
    if (res.admissible) {
        std::cout << "admissible: " << trace.size() << " transactions over " << trace.rounds() << " rounds, rho "
                  << rho.str() << ", b " << b << '\n';
        return 0;
    }
    const auto& v = *res.violation;
    std::cout << "not admissible: " << v.shard.name() << " rounds [" << v.first << ", " << v.last << "] congestion "
              << v.congestion << " > " << v.allowed << '\n';
    return exit_invariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sharded blockchain transaction scheduling simulator"};
    app.require_subcommand(1);

    ConfigFlags run_flags;
    bool dump = false;
    auto* run_cmd = app.add_subcommand("run", "single run; per-round CSV on stdout or --csv, summary on stderr");
    add_config_flags(run_cmd, run_flags);
    run_cmd->add_flag("--dump-config", dump, "print the resolved config and exit");

    ConfigFlags sweep_flags;
    std::string rho_list = "0.05..0.30";
    std::string b_list = "1000,3000";
    unsigned threads = 0;
    std::string sweep_out, plots;
    auto* sweep_cmd = app.add_subcommand("sweep", "one run per (rho, b); aggregate CSV");
    add_config_flags(sweep_cmd, sweep_flags, {"rho", "b"});
    sweep_cmd->add_option("--rho", rho_list, "list 'a,b,c' or range 'lo..hi[:step]' (step 0.05)");
    sweep_cmd->add_option("--b", b_list, "comma separated burstiness values");
    sweep_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    sweep_cmd->add_option("--out", sweep_out, "aggregate CSV path (default stdout)");
    sweep_cmd->add_option("--plots", plots, "directory for pending.svg and latency.svg");

    auto* verify_cmd = app.add_subcommand("verify", "worked examples and bound checks");

    std::string trace_path, adv_rho = "1/10";
    std::int64_t adv_b = 1;
    auto* check_cmd = app.add_subcommand("check-adversary", "admissibility audit of a trace file");
    check_cmd->add_option("--trace", trace_path, "trace file")->required();
    check_cmd->add_option("--rho", adv_rho, "injection rate");
    check_cmd->add_option("--b", adv_b, "burstiness");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_config;
    }

    try {
        if (*run_cmd) return cmd_run(run_flags, dump);
        if (*sweep_cmd) return cmd_sweep(sweep_flags, rho_list, b_list, threads, sweep_out, plots);
        if (*verify_cmd) return cmd_verify();
        if (*check_cmd) return cmd_check_adversary(trace_path, adv_rho, adv_b);
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return exit_invariant;
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const std::invalid_argument*>(&e)) {
            std::cerr << "config error: " << e.what() << '\n';
            return exit_config;
        }
        std::cerr << "invariant violation: " << e.what() << '\n';
        return exit_invariant;
    }
    return 0;
}
