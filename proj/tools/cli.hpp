#pragma once

#include <string>

namespace opiniondrift::cli {

// Each command loads and validates the JSON config, runs the computation,
// and only then writes its outputs into out_dir, so a failing run leaves no
// partial files. Exit codes: 0 success (simulate: converged), 2 simulate hit
// max_steps, 1 error (oracle-check also uses 1 for a failed comparison).

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 bool verbose);
int cmd_attraction_range(const std::string& config_path,
                         const std::string& out_dir, bool verbose);
int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              unsigned jobs, bool verbose);
int cmd_compare(const std::string& config_path, const std::string& out_dir,
                bool verbose);
int cmd_oracle_check(const std::string& config_path, const std::string& out_dir,
                     bool verbose);

/// OPINIONDRIFT_OUT, when set, overrides the --out flag.
std::string resolve_out_dir(const std::string& flag_value);

}  // namespace opiniondrift::cli
