#include "shard_sched/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace shard_sched {

namespace {

constexpr std::array<std::string_view, 21> keys = {
    "scheduler", "topology", "s",     "k",       "rho",      "b",      "rounds",
    "seed",      "adversary", "strategy", "burst_round", "burst_rounds", "accounts_per_shard", "abort_prob",
    "c",         "c1",       "coloring", "retry_aborts", "trace", "csv", "summary"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(std::string(key), "not a valid number: '" + std::string(value) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(std::string(key), "expected true or false, got '" + std::string(value) + "'");
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

const char* to_string(SchedulerKind kind) { return kind == SchedulerKind::bds ? "bds" : "fds"; }
const char* to_string(AdversaryKind kind) { return kind == AdversaryKind::token_bucket ? "token_bucket" : "theorem1"; }

std::span<const std::string_view> config_keys() { return keys; }

void RunConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    const std::string k_str(key);
    try {
        if (key == "scheduler") {
            if (value == "bds") scheduler = SchedulerKind::bds;
            else if (value == "fds") scheduler = SchedulerKind::fds;
            else throw ConfigError(k_str, "expected bds or fds, got '" + std::string(value) + "'");
        } else if (key == "topology") {
            if (value != "uniform" && value != "line" && value.substr(0, 5) != "file:") {
                throw ConfigError(k_str, "expected uniform, line or file:<path>, got '" + std::string(value) + "'");
            }
            topology = value;
        } else if (key == "s") {
            s = parse_number<std::uint32_t>(key, value);
        } else if (key == "k") {
            k = parse_number<std::uint32_t>(key, value);
        } else if (key == "rho") {
            rho = Rational::parse(value);
        } else if (key == "b") {
            b = parse_number<std::int64_t>(key, value);
        } else if (key == "rounds") {
            rounds = parse_number<Round>(key, value);
        } else if (key == "seed") {
            seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "adversary") {
            if (value == "token_bucket") adversary = AdversaryKind::token_bucket;
            else if (value == "theorem1") adversary = AdversaryKind::theorem1;
            else throw ConfigError(k_str, "expected token_bucket or theorem1, got '" + std::string(value) + "'");
        } else if (key == "strategy") {
            strategy = parse_strategy(value);
        } else if (key == "burst_round") {
            burst_round = parse_number<Round>(key, value);
        } else if (key == "burst_rounds") {
            burst_rounds = parse_number<Round>(key, value);
        } else if (key == "accounts_per_shard") {
            accounts_per_shard = parse_number<std::uint32_t>(key, value);
        } else if (key == "abort_prob") {
            abort_prob = parse_number<double>(key, value);
        } else if (key == "c") {
            c = parse_number<std::uint32_t>(key, value);
        } else if (key == "c1") {
            c1 = parse_number<double>(key, value);
        } else if (key == "coloring") {
            coloring = parse_coloring(value);
        } else if (key == "retry_aborts") {
            retry_aborts = parse_bool(key, value);
        } else if (key == "trace") {
            trace = value;
        } else if (key == "csv") {
            csv = value;
        } else if (key == "summary") {
            summary = value;
        } else {
            throw ConfigError(k_str, "unknown key");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(k_str, e.what());
    }
}

void RunConfig::validate() const {
    if (s < 1) throw ConfigError("s", "must be at least 1");
    if (k < 1) throw ConfigError("k", "must be at least 1");
    if (rho > Rational(1, 1)) throw ConfigError("rho", "must be at most 1, got " + rho.str());
    if (b < 1) throw ConfigError("b", "must be at least 1");
    if (rounds < 0) throw ConfigError("rounds", "must be non-negative");
    if (burst_round < 0) throw ConfigError("burst_round", "must be non-negative");
    if (burst_rounds < 1) throw ConfigError("burst_rounds", "must be at least 1");
    if (accounts_per_shard < 1) throw ConfigError("accounts_per_shard", "must be at least 1");
    if (!(abort_prob >= 0.0 && abort_prob <= 1.0)) throw ConfigError("abort_prob", "must be in [0, 1]");
    if (c < 1) throw ConfigError("c", "must be at least 1");
    if (!(c1 > 0.0)) throw ConfigError("c1", "must be positive");
    if (scheduler == SchedulerKind::bds && topology == "line" && s > 1) {
        throw ConfigError("topology", "the bds scheduler needs a uniform topology");
    }
    if (topology.substr(0, 5) == "file:" && topology.size() == 5) throw ConfigError("topology", "empty file path");
}

AdversaryParams RunConfig::adversary_params() const {
    AdversaryParams p;
    p.rho = rho;
    p.b = b;
    p.k = k;
    p.seed = seed;
    p.strategy = strategy;
    p.burst_round = burst_round;
    p.burst_rounds = burst_rounds;
    p.accounts_per_shard = accounts_per_shard;
    return p;
}

RunConfig parse_config(std::istream& in, RunConfig base) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        }
        base.set(trim(view.substr(0, eq)), view.substr(eq + 1));
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in, std::move(base));
}

void dump_config(std::ostream& out, const RunConfig& c) {
    out << "scheduler = " << to_string(c.scheduler) << '\n'
        << "topology = " << c.topology << '\n'
        << "s = " << c.s << '\n'
        << "k = " << c.k << '\n'
        << "rho = " << c.rho.str() << '\n'
        << "b = " << c.b << '\n'
        << "rounds = " << c.rounds << '\n'
        << "seed = " << c.seed << '\n'
        << "adversary = " << to_string(c.adversary) << '\n'
        << "strategy = " << to_string(c.strategy) << '\n'
        << "burst_round = " << c.burst_round << '\n'
        << "burst_rounds = " << c.burst_rounds << '\n'
        << "accounts_per_shard = " << c.accounts_per_shard << '\n'
        << "abort_prob = " << format_double(c.abort_prob) << '\n'
        << "c = " << c.c << '\n'
        << "c1 = " << format_double(c.c1) << '\n'
        << "coloring = " << to_string(c.coloring) << '\n'
        << "retry_aborts = " << (c.retry_aborts ? "true" : "false") << '\n'
        << "trace = " << c.trace << '\n'
        << "csv = " << c.csv << '\n'
        << "summary = " << c.summary << '\n';
}

}  // namespace shard_sched
