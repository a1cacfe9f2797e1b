#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace todalab::cli {

// Subcommand bodies, shared by main() and the in-process tests.
// Each reads a JSON config, writes reports under out_dir, and returns the
// process exit code (0 = success, 1 = usage/config error, 2 = failure).
int cmd_spectrum(const std::filesystem::path& config, const std::filesystem::path& out_dir);
int cmd_solve(const std::filesystem::path& config, const std::filesystem::path& out_dir);
int cmd_verify(const std::filesystem::path& config, const std::filesystem::path& out_dir);
int cmd_entropy(const std::filesystem::path& config, const std::filesystem::path& out_dir);
int cmd_lemma_pq(const std::filesystem::path& config, const std::filesystem::path& out_dir,
                 std::uint64_t seed);

} // namespace todalab::cli
