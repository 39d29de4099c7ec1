#pragma once

#include "shard_sched/adversary.hpp"
#include "shard_sched/coloring.hpp"

#include <iosfwd>
#include <string_view>

namespace shard_sched {

enum class SchedulerKind : std::uint8_t { bds, fds };
enum class AdversaryKind : std::uint8_t { token_bucket, theorem1 };

const char* to_string(SchedulerKind kind);
const char* to_string(AdversaryKind kind);

/// Bad field value; `field` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct RunConfig {
    SchedulerKind scheduler = SchedulerKind::bds;
    std::string topology = "uniform";  // uniform | line | file:<path>
    std::uint32_t s = 16;
    std::uint32_t k = 4;
    Rational rho{1, 72};
    std::int64_t b = 2;
    Round rounds = 2000;
    std::uint64_t seed = 1;
    AdversaryKind adversary = AdversaryKind::token_bucket;
    Strategy strategy = Strategy::uniform_random;
    Round burst_round = 1000;
    Round burst_rounds = 1;
    std::uint32_t accounts_per_shard = 1;
    double abort_prob = 0.0;
    std::uint32_t c = 4;
    double c1 = 60.0;
    ColoringStrategy coloring = ColoringStrategy::greedy;
    bool retry_aborts = false;
    std::string trace;    // replay this trace file instead of generating
    std::string csv;      // per-round output
    std::string summary;  // summary output

    /// Sets one field from text. Throws ConfigError on an unknown key or bad value.
    void set(std::string_view key, std::string_view value);
    /// Range checks across fields. Throws ConfigError.
    void validate() const;
    AdversaryParams adversary_params() const;
    bool operator==(const RunConfig&) const = default;
};

/// Field names in dump order.
std::span<const std::string_view> config_keys();

/// Flat `key = value` lines; `#` starts a comment. Unset keys keep defaults.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
void dump_config(std::ostream& out, const RunConfig& config);

}  // namespace shard_sched
