#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "kpz/config.hpp"

namespace kpz {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2, kExitVerification = 3 };

struct RunOptions {
    /// Output directory; defaults to $KPZ_OUTPUT_ROOT/<subcommand>-seed<seed>.
    std::optional<std::string> out_dir;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
};

/// Output root from KPZ_OUTPUT_ROOT, "runs" when unset.
std::string output_root();
/// KPZ_JOBS when set, otherwise `fallback`.
int jobs_from_env(int fallback);

std::string sha256_file(const std::string& path);

/// Validates, creates the output directory (an existing one is an error),
/// dispatches and writes manifest.json. Returns an ExitCode.
int run(RunConfig cfg, const RunOptions& opt, std::ostream& log);

}  // namespace kpz
