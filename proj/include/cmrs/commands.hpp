#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace cmrs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDegraded = 2;

struct CliOptions {
    std::string config_path;
    std::string out_path;  // overrides output.csv when non-empty
    int threads = 0;       // 0: hardware parallelism
    std::optional<std::uint64_t> seed;
};

/// Each command returns an exit code: 0 ok, 2 degraded points or failed
/// verification, 1 error. Errors are reported on `err` as a single line
/// "error: <code>: <message>".
int cmd_allocate(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_diagnose(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_verify(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_weights(int M, std::ostream& out, std::ostream& err);

}  // namespace cmrs
