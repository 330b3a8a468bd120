#pragma once

namespace ssvm {

/// Command-line entry point. Subcommands: gen, train, eval, compare-caching,
/// trace-plot. Returns 0 on success, 2 on validation/usage errors, 3 when a
/// certificate was requested but training ended uncertified.
int cli_main(int argc, const char* const* argv);

}  // namespace ssvm
