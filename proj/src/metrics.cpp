#include "fedar/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace fedar::cli {
namespace {

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_round_row(std::ostream& out, const server::RoundRecord& r) {
  using server::ClientStatus;
  out << r.round << ',' << to_string(r.mode) << ',' << r.participants.size()
      << ',' << r.count(ClientStatus::kOnTime) << ','
      << r.count(ClientStatus::kLate) << ','
      << r.count(ClientStatus::kRejectedDeviation) << ','
      << r.count(ClientStatus::kRejectedSimilarity) << ','
      << num(r.test_loss) << ',' << num(r.test_accuracy) << ','
      << num(r.virtual_time) << '\n';
}

}  // namespace

void write_rounds_csv(std::ostream& out,
                      std::span<const server::RoundRecord> records) {
  out << kRoundsHeader << '\n';
  for (const auto& r : records) write_round_row(out, r);
}

void write_trust_csv(std::ostream& out, const ExperimentConfig& config,
                     std::span<const server::RoundRecord> records) {
  std::vector<std::string> ids;
  for (const auto& c : config.clients) ids.push_back(c.id);
  out << "round";
  for (const auto& id : ids) out << ',' << id;
  out << '\n' << 0;
  for (std::size_t i = 0; i < ids.size(); ++i) out << ',' << config.trust.initial;
  out << '\n';
  for (const auto& r : records) {
    out << r.round;
    for (const auto& id : ids) {
      const auto it = r.trust.find(id);
      out << ',' << (it == r.trust.end() ? config.trust.initial : it->second);
    }
    out << '\n';
  }
}

void write_summary(std::ostream& out, const ExperimentConfig& config,
                   std::span<const server::RoundRecord> records) {
  using server::ClientStatus;
  out << "experiment: " << config.name << '\n';
  out << "seed: " << config.seed << '\n';
  out << "mode: " << to_string(config.server.mode) << '\n';
  out << "rounds: " << records.size() << '\n';
  if (!records.empty()) {
    out << "final_test_accuracy: " << num(records.back().test_accuracy) << '\n';
    out << "final_test_loss: " << num(records.back().test_loss) << '\n';
    out << "virtual_time: " << num(records.back().virtual_time) << '\n';
  }
  out << "rounds_to_target: ";
  const auto hit = std::find_if(records.begin(), records.end(), [&](const auto& r) {
    return config.task.target_accuracy &&
           r.test_accuracy >= *config.task.target_accuracy;
  });
  if (hit == records.end()) {
    out << "not reached\n";
  } else {
    out << hit->round << '\n';
  }

  struct Counts {
    int on_time = 0, late = 0, rejected_deviation = 0, rejected_similarity = 0;
    int interested = 0;
  };
  std::map<std::string, Counts> counts;
  for (const auto& r : records) {
    for (const auto& p : r.participants) {
      auto& c = counts[p.id];
      switch (p.status) {
        case ClientStatus::kOnTime: ++c.on_time; break;
        case ClientStatus::kLate: ++c.late; break;
        case ClientStatus::kRejectedDeviation: ++c.rejected_deviation; break;
        case ClientStatus::kRejectedSimilarity: ++c.rejected_similarity; break;
      }
    }
    for (const auto& id : r.interested) ++counts[id].interested;
  }

  out << "\nclient,on_time,late,rejected_deviation,rejected_similarity,"
         "interested,final_trust\n";
  for (const auto& cfg : config.clients) {
    const Counts c = counts[cfg.id];
    int trust = config.trust.initial;
    if (!records.empty()) {
      if (const auto it = records.back().trust.find(cfg.id);
          it != records.back().trust.end()) {
        trust = it->second;
      }
    }
    out << cfg.id << ',' << c.on_time << ',' << c.late << ','
        << c.rejected_deviation << ',' << c.rejected_similarity << ','
        << c.interested << ',' << trust << '\n';
  }
}

void write_comparison_csv(std::ostream& out, std::span<const SweepCell> cells) {
  out << "cell," << kRoundsHeader << '\n';
  for (const auto& cell : cells) {
    for (const auto& r : cell.records) {
      out << cell.name << ',';
      write_round_row(out, r);
    }
  }
}

}  // namespace fedar::cli
