#pragma once

namespace fieldnet {

/// Command-line driver. Subcommands: generate, evaluate, compare, graph.
/// Returns 0 on success, 1 on validation/usage errors, 2 on runtime failure.
int cli_main(int argc, const char* const* argv);

}  // namespace fieldnet
