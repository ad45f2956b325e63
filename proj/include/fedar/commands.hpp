#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedar/experiment.hpp"

namespace fedar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitIo = 3;

// Writes rounds.csv, trust.csv and summary.txt under out_dir.
int cmd_run(const std::filesystem::path& config_path,
            std::optional<std::uint64_t> seed,
            const std::filesystem::path& out_dir, std::ostream& log);

// vary: "batch_epochs" or "stragglers". One sub-directory per cell plus
// comparison.csv.
int cmd_sweep(const std::filesystem::path& config_path, std::string_view vary,
              std::optional<std::uint64_t> seed,
              const std::filesystem::path& out_dir, std::ostream& log);

int cmd_table2(std::ostream& out);

// Cell names and configs for a sweep over `base`. Throws ConfigError for an
// unknown axis or a straggler count larger than the reliable client pool.
std::vector<std::pair<std::string, ExperimentConfig>> sweep_cells(
    const ExperimentConfig& base, std::string_view vary);

}  // namespace fedar::cli
