#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Batch front door. Subcommands: region, gap, evolve, rates, ghp, deficit,
// quotient, renyi. Global flags: --out-dir, --seed, --threads, --tol.
// Config files are flat `key = value` text with `#` comments; unknown keys
// are errors. Exit codes: 0 success, 1 verdict failure, 2 usage error.

namespace fdlab {

struct RunConfig {
    std::map<std::string, std::string> kv;  // insertion-normalized key/value map

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_num(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
};

RunConfig parse_config_text(const std::string& text);
std::string config_echo(const RunConfig& cfg);  // re-parses to an identical map

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdlab
