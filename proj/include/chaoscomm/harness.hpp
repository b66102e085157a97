#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "chaoscomm/errors.hpp"

namespace chaoscomm {

/// All problems found in a configuration, one message per entry.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    [[nodiscard]] const std::vector<std::string> &problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Names accepted for the `experiment` key, in documentation order.
[[nodiscard]] const std::vector<std::string> &experiment_names();

/// Keys (with default values) accepted by an experiment, including the
/// shared ones. Throws ConfigError for an unknown experiment.
[[nodiscard]] std::map<std::string, std::string> experiment_defaults(const std::string &experiment);

struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> params;  // every key, defaults filled in
    std::uint64_t seed{1};
    std::filesystem::path output_dir{"out"};

    friend bool operator==(const ExperimentConfig &, const ExperimentConfig &) = default;
};

/// Parses `key = value` lines (`#` starts a comment). Checks key names, value
/// types and the invariants of the types they feed, and reports every problem
/// at once with its line number.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);

/// Applies `key=value` overrides on top of a parsed config and revalidates.
void apply_overrides(ExperimentConfig &cfg, const std::vector<std::string> &overrides);

/// `key = value` lines that parse_config turns back into the same config.
[[nodiscard]] std::string echo_config(const ExperimentConfig &cfg);

struct Verdict {
    int criterion{0};
    std::string name;
    bool pass{false};
    std::string detail;
};

struct RunReport {
    std::string experiment;
    std::map<std::string, std::string> inputs;
    std::vector<std::pair<std::string, std::string>> metrics;
    std::vector<Verdict> verdicts;
    std::vector<std::string> notes;
    std::vector<std::filesystem::path> artifacts;
    double wall_seconds{0.0};

    [[nodiscard]] bool all_pass() const;
};

/// Runs the configured experiment and writes its artifacts into
/// cfg.output_dir. Files are written to a temporary name and renamed into
/// place; if the run throws, every file it already produced is removed.
[[nodiscard]] RunReport run_experiment(const ExperimentConfig &cfg);

/// Flat `key = value` summary (no wall time, so it is byte-stable).
void write_summary(std::ostream &out, const RunReport &report);

}  // namespace chaoscomm
