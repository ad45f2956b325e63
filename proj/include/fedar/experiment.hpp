#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedar/clientsim.hpp"
#include "fedar/numcore.hpp"
#include "fedar/resource.hpp"
#include "fedar/trust.hpp"

namespace fedar {

enum class AggregationMode { kSync, kAsync };

const char* to_string(AggregationMode mode);

struct ServerOptions {
  AggregationMode mode = AggregationMode::kSync;
  bool deviation_gate = true;
  bool similarity_gate = true;
  double similarity_threshold = 0.99;
  // Async: alpha_u = mixing * n_u / n.
  double async_mixing = 1.0;
  bool merge_late = false;
  // Async rounds close at close_factor * timeout.
  double async_close_factor = 2.0;
  // A straggler marked late arrives at (1 + late_delay_fraction) * timeout.
  double late_delay_fraction = 0.5;
  // Train participants (and run kernels) with the OpenMP code path.
  bool parallel = true;

  void validate() const;
};

enum class DataSource { kAuto, kSynthetic, kIdx };

struct DataConfig {
  DataSource source = DataSource::kAuto;
  // Directory holding train-images-idx3-ubyte / train-labels-idx1-ubyte.
  // Empty means: use FEDAR_MNIST_DIR when source is auto.
  std::string idx_dir;
  std::size_t pool_size = 12000;
  std::size_t test_cap = 2000;
  double noise_sd = 0.45;
  int max_shift = 4;

  void validate() const;
};

struct ClientConfig {
  std::string id;
  std::set<int> labels;
  std::size_t samples = 0;
  resource::ResourceProfile resources{1024.0, 100.0, 100.0};
  double battery_drain = 0.0;
  bool resource_noise = false;
  clientsim::ClientBehavior behavior;
  // Descriptive only; does not affect computation.
  std::string activation;

  void validate() const;
};

// Grids for the `sweep` command.
struct SweepOptions {
  std::vector<std::pair<std::size_t, int>> batch_epochs{
      {10, 20}, {20, 5}, {10, 5}, {20, 20}};
  std::vector<int> straggler_counts{0, 2, 4};
  double straggler_late_probability = 0.8;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  resource::TaskSpec task;
  trust::TrustConstants trust;
  trust::FailureRateBasis failure_basis =
      trust::FailureRateBasis::kParticipation;
  ServerOptions server;
  clientsim::CostModel cost;
  DataConfig data;
  SweepOptions sweep;
  std::vector<ClientConfig> clients;
  std::size_t num_features = numcore::kImageFeatures;
  std::size_t num_classes = numcore::kDigitClasses;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// The twelve-robot federation: ids, label sets, sample counts and the
// activation column, with all robots reliable.
ExperimentConfig table2_config();

}  // namespace fedar
