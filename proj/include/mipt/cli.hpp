#pragma once

#include <string>

// Batch experiment runner. A JSON config selects one named experiment
// and its grids; outputs are deterministic CSV files plus a JSON run
// manifest. Exit codes: 0 success, 2 config validation failure,
// 3 run finished but some grid points errored (recorded in the
// manifest). Relative output prefixes resolve against $MIPTLAB_OUT
// when it is set.

namespace mipt::cli {

struct RunOptions {
  int workers = 1;
  bool emit_plot_script = false;
};

int run_config_file(const std::string& path, const RunOptions& options);

// full argv entry point used by the miptlab binary
int main_entry(int argc, char** argv);

} // namespace mipt::cli
