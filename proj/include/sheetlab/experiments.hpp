#pragma once

// Named experiments behind the command-line runner. Each experiment takes
// key=value parameters with documented defaults, rejects unknown keys and
// returns a table whose pass column encodes its acceptance threshold.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sheetlab {

/// Bad experiment name, unknown key or unparsable value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Resolved parameters: defaults overlaid by the given values.
class Params {
public:
    Params(std::map<std::string, std::string> defaults, const std::map<std::string, std::string>& given);

    const std::string& str(const std::string& key) const;
    double real(const std::string& key) const;
    int integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<int> integers(const std::string& key) const;

    const std::map<std::string, std::string>& resolved() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    bool passed = true;
};

struct ExperimentInfo {
    std::string name;
    std::string summary;
    std::map<std::string, std::string> defaults;
};

/// All experiments in a fixed order.
const std::vector<ExperimentInfo>& experiment_catalog();

/// Splits "key=value" tokens; throws ConfigError on malformed tokens or
/// repeated keys.
std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& tokens);

/// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& file);

/// Runs one experiment. Throws ConfigError for configuration problems.
Table run_experiment(const std::string& name, const Params& params);

/// '#'-prefixed metadata (experiment, resolved config, version, wall time)
/// followed by the CSV table.
void write_table(std::ostream& out, const std::string& name, const Params& params, const Table& table,
                 double wall_seconds);

extern const char* const kVersion;

}  // namespace sheetlab
