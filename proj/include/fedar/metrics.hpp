#pragma once

#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedar/experiment.hpp"
#include "fedar/server.hpp"

namespace fedar::cli {

// round,mode,participants,on_time,late,rejected_deviation,rejected_similarity,
// test_loss,test_accuracy,virtual_time
inline constexpr const char* kRoundsHeader =
    "round,mode,participants,on_time,late,rejected_deviation,"
    "rejected_similarity,test_loss,test_accuracy,virtual_time";

void write_rounds_csv(std::ostream& out,
                      std::span<const server::RoundRecord> records);

// One row per round (row 0 holds the initial scores), one column per client.
void write_trust_csv(std::ostream& out, const ExperimentConfig& config,
                     std::span<const server::RoundRecord> records);

void write_summary(std::ostream& out, const ExperimentConfig& config,
                   std::span<const server::RoundRecord> records);

struct SweepCell {
  std::string name;
  std::vector<server::RoundRecord> records;
};

// rounds.csv rows of every cell, prefixed by a `cell` column.
void write_comparison_csv(std::ostream& out, std::span<const SweepCell> cells);

}  // namespace fedar::cli
