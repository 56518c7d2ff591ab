#pragma once

#include <string>

#include "yamabe/config.hpp"

namespace yamabe {

// Exit codes: 0 success, 1 hypothesis/audit failure, 2 config error,
// 3 solver non-convergence.
int cmd_q(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_mu(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_continue(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_qinf(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_audit(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_bubble(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_models(const std::string& out_dir, bool quiet);

int run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir,
                bool quiet);

}  // namespace yamabe
