#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedar/clientsim.hpp"
#include "fedar/experiment.hpp"
#include "fedar/feddata.hpp"
#include "fedar/numcore.hpp"
#include "fedar/resource.hpp"
#include "fedar/trust.hpp"

namespace fedar::server {

using ClientId = std::string;
using numcore::ModelParams;

enum class ClientStatus { kOnTime, kLate, kRejectedDeviation, kRejectedSimilarity };

const char* to_string(ClientStatus status);

struct ParticipantOutcome {
  ClientId id;
  ClientStatus status = ClientStatus::kOnTime;
  double arrival_time = 0.0;  // relative to the round start
  double distance = 0.0;      // to the round's starting global model
  std::size_t samples = 0;
  bool merged = false;        // contributed to the new global model
};

struct RoundRecord {
  int round = 0;
  AggregationMode mode = AggregationMode::kSync;
  std::vector<ClientId> ra_list;
  std::vector<ClientId> eligible;
  std::vector<ClientId> interested;
  // Participants in virtual-arrival order.
  std::vector<ParticipantOutcome> participants;
  double gamma = 0.0;  // deviation threshold used this round
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  trust::Snapshot trust;
  double virtual_time = 0.0;  // clock at round end
  std::vector<std::string> notes;

  std::size_t count(ClientStatus status) const;
};

// ---- aggregation primitives -------------------------------------------

// n_u / sum(n) for each entry.
std::vector<double> sync_weights(std::span<const std::size_t> sample_counts);

// sum_u weights[u] * models[u]; reduces per coordinate in model order.
ModelParams weighted_sum(std::span<const ModelParams* const> models,
                         std::span<const double> weights,
                         numcore::Exec exec = numcore::Exec::kSerial);

// w <- (1 - alpha) w + alpha * update
void async_merge(ModelParams& global, const ModelParams& update, double alpha);

// Cumulative update-direction histories for the similarity gate.
class SimilarityState {
 public:
  void add(const ClientId& id, const ModelParams& update,
           const ModelParams& base);
  // Largest cosine similarity between `id`'s history and any other client's
  // nonzero history; -1 when there is nothing to compare against.
  double max_similarity(const ClientId& id) const;
  std::size_t dimension() const noexcept { return dim_; }

 private:
  std::size_t dim_ = 0;
  std::map<ClientId, std::vector<double>> history_;
};

std::pair<double, double> evaluate_global(const ModelParams& params,
                                          const numcore::Batch& test_set,
                                          numcore::Exec exec = numcore::Exec::kSerial);

// A client as the server sees it.
struct SimClient {
  ClientId id;
  data::ClientDataset dataset;
  clientsim::ClientBehavior behavior;
  resource::ResourceTracker resources;
};

// Everything needed to run rounds; the data is already built.
struct ExperimentSetup {
  resource::TaskSpec task;
  trust::TrustConstants trust;
  trust::FailureRateBasis failure_basis = trust::FailureRateBasis::kParticipation;
  ServerOptions server;
  clientsim::CostModel cost;
  std::vector<SimClient> clients;
  std::vector<data::Sample> test_set;
  std::size_t num_features = numcore::kImageFeatures;
  std::size_t num_classes = numcore::kDigitClasses;
  std::uint64_t seed = 1;
  std::vector<std::string> notes;
};

// Builds datasets (synthetic or IDX), partitions them, poisons what the
// behaviors ask for and seeds the resource trackers.
ExperimentSetup build_setup(const ExperimentConfig& config);

// The orchestrator: a single event loop over a virtual clock.
class Simulation {
 public:
  explicit Simulation(ExperimentSetup setup);

  RoundRecord run_round_sync(std::uint64_t round_seed);
  RoundRecord run_round_async(std::uint64_t round_seed);
  // Next round in the configured mode with the derived round seed.
  RoundRecord run_round();

  std::uint64_t round_seed(int round) const;

  const ModelParams& global() const noexcept { return global_; }
  void set_global(ModelParams params);
  const trust::TrustLedger& ledger() const noexcept { return ledger_; }
  double clock() const noexcept { return clock_; }
  int rounds_run() const noexcept { return round_; }
  std::optional<double> gamma() const noexcept { return gamma_; }
  const ExperimentSetup& setup() const noexcept { return setup_; }
  std::size_t total_samples() const noexcept { return total_samples_; }

 private:
  RoundRecord run_round_impl(AggregationMode mode, std::uint64_t round_seed);
  std::vector<clientsim::BehaviorOutcome> train(
      const std::vector<std::size_t>& who, std::uint64_t round_seed) const;

  ExperimentSetup setup_;
  std::map<ClientId, std::size_t> index_;
  trust::TrustLedger ledger_;
  ModelParams global_;
  SimilarityState similarity_;
  numcore::Batch test_batch_;
  std::optional<double> gamma_;
  std::size_t total_samples_ = 0;
  double clock_ = 0.0;
  int round_ = 0;
};

// Registers clients, initializes trust, then runs rounds until max_rounds
// or the target accuracy. One record per round.
std::vector<RoundRecord> run_experiment(const ExperimentConfig& config);
std::vector<RoundRecord> run_experiment(ExperimentSetup setup);

}  // namespace fedar::server
