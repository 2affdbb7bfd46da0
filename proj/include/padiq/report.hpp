#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "padiq/dsl.hpp"

namespace padiq {

struct RunOptions {
  bool compare_oracle = false;
  std::uint64_t seed = 1;
  bool parallel = false;
  // Testing hook: perturbs every oracle value so each comparison mismatches.
  bool inject_mismatch = false;
  long unbounded_truncation = 16;  // T for cells unbounded above
  long zsum_truncation = 20;       // T for infinite gamma sums
};

struct CommandReport {
  std::string command;
  bool ok = false;
  std::optional<bool> oracle_match;
  nlohmann::json body;  // command-specific fields
  double wall_time_ms = 0;
};

struct Report {
  long prime = 0;
  RunOptions options;
  std::vector<CommandReport> commands;

  std::size_t failures() const;  // failed commands plus oracle mismatches
  bool ok() const { return failures() == 0; }
  // Wall-time fields are the only nondeterministic output.
  nlohmann::json to_json(bool with_times = true) const;
};

nlohmann::json value_json(const CyclotomicNumber& z);

CommandReport run_command(const dsl::Job& job, const dsl::Command& cmd, const RunOptions& opts);
Report run_job(const dsl::Job& job, const RunOptions& opts = {});

}  // namespace padiq
