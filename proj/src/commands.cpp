#include "fedar/commands.hpp"

#include <fstream>
#include <ios>

#include "fedar/config_io.hpp"
#include "fedar/errors.hpp"
#include "fedar/metrics.hpp"
#include "fedar/server.hpp"

namespace fedar::cli {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  writer(out);
  out.flush();
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

std::vector<server::RoundRecord> run_into(const ExperimentConfig& cfg,
                                          const fs::path& dir,
                                          std::ostream& log) {
  auto setup = server::build_setup(cfg);
  for (const auto& note : setup.notes) log << note << '\n';
  auto records = server::run_experiment(std::move(setup));
  for (const auto& r : records) {
    for (const auto& note : r.notes) log << note << '\n';
  }

  fs::create_directories(dir);
  write_file(dir / "rounds.csv",
             [&](std::ostream& o) { write_rounds_csv(o, records); });
  write_file(dir / "trust.csv",
             [&](std::ostream& o) { write_trust_csv(o, cfg, records); });
  write_file(dir / "summary.txt",
             [&](std::ostream& o) { write_summary(o, cfg, records); });
  return records;
}

// Maps exceptions onto exit codes.
template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const PartitionError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const LoadError& e) {
    log << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    log << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    log << "io error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

std::vector<std::pair<std::string, ExperimentConfig>> sweep_cells(
    const ExperimentConfig& base, std::string_view vary) {
  std::vector<std::pair<std::string, ExperimentConfig>> cells;
  if (vary == "batch_epochs") {
    for (const auto& [batch, epochs] : base.sweep.batch_epochs) {
      ExperimentConfig cfg = base;
      cfg.task.batch_size = batch;
      cfg.task.local_epochs = epochs;
      cfg.name = base.name + "_B" + std::to_string(batch) + "_E" +
                 std::to_string(epochs);
      cells.emplace_back("B" + std::to_string(batch) + "_E" + std::to_string(epochs),
                         std::move(cfg));
    }
  } else if (vary == "stragglers") {
    for (const int count : base.sweep.straggler_counts) {
      ExperimentConfig cfg = base;
      int converted = 0;
      for (auto& c : cfg.clients) {
        if (converted == count) break;
        if (c.behavior.kind != clientsim::BehaviorKind::kReliable) continue;
        c.behavior.kind = clientsim::BehaviorKind::kStraggler;
        c.behavior.late_probability = base.sweep.straggler_late_probability;
        ++converted;
      }
      if (converted < count) {
        throw ConfigError("sweep.straggler_counts",
                          "only " + std::to_string(converted) +
                              " reliable clients can become stragglers");
      }
      cfg.name = base.name + "_stragglers_" + std::to_string(count);
      cells.emplace_back("stragglers_" + std::to_string(count), std::move(cfg));
    }
  } else {
    throw ConfigError("--vary", "unknown sweep axis '" + std::string(vary) +
                                    "' (expected batch_epochs or stragglers)");
  }
  for (auto& [name, cfg] : cells) cfg.validate();
  return cells;
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed,
            const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    const auto records = run_into(cfg, out_dir, log);
    log << "wrote " << records.size() << " rounds to " << out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_sweep(const fs::path& config_path, std::string_view vary,
              std::optional<std::uint64_t> seed, const fs::path& out_dir,
              std::ostream& log) {
  return guarded(log, [&] {
    ExperimentConfig base = load_config(config_path);
    if (seed) base.seed = *seed;
    std::vector<SweepCell> results;
    for (auto& [name, cfg] : sweep_cells(base, vary)) {
      log << "cell " << name << '\n';
      results.push_back({name, run_into(cfg, out_dir / name, log)});
    }
    fs::create_directories(out_dir);
    write_file(out_dir / "comparison.csv",
               [&](std::ostream& o) { write_comparison_csv(o, results); });
    return kExitOk;
  });
}

int cmd_table2(std::ostream& out) {
  out << "# Twelve-robot federation (ids, label sets, sample counts).\n"
      << dump_config(table2_config());
  return kExitOk;
}

}  // namespace fedar::cli
