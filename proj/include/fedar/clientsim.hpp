#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fedar/feddata.hpp"
#include "fedar/numcore.hpp"
#include "fedar/resource.hpp"

namespace fedar::clientsim {

using ClientId = std::string;

enum class BehaviorKind { kReliable, kStraggler, kPoisoner };

const char* to_string(BehaviorKind kind);

struct ClientBehavior {
  BehaviorKind kind = BehaviorKind::kReliable;
  double late_probability = 0.0;
  double latency_multiplier = 1.0;
  // Label flipping applied to the client's training data at setup.
  std::optional<data::PoisonSpec> poison;
  // Multiplies every submitted parameter.
  std::optional<double> deviant_scale;

  void validate() const;
};

// Virtual-time cost of a local update. Transmission is the same for every
// client.
struct CostModel {
  double base_compute_cost = 0.001;  // per SGD step
  double transmission_cost = 0.1;
};

struct ClientUpdateResult {
  ClientId client_id;
  numcore::ModelParams params;
  std::size_t samples_used = 0;
  double virtual_latency = 0.0;
  double local_loss = 0.0;
};

// ClientUpdate: E local epochs of minibatch SGD from the global params. The
// batches are shuffled once per call from `client_seed` and reused across
// epochs. Throws DataError for an empty dataset.
ClientUpdateResult client_update(const data::ClientDataset& dataset,
                                 const ClientBehavior& behavior,
                                 const numcore::ModelParams& global,
                                 const resource::TaskSpec& spec,
                                 const CostModel& cost,
                                 std::uint64_t client_seed,
                                 numcore::Exec exec = numcore::Exec::kSerial);

struct BehaviorOutcome {
  ClientUpdateResult result;
  bool is_late = false;
};

BehaviorOutcome apply_behavior(ClientUpdateResult result,
                               const ClientBehavior& behavior,
                               std::uint64_t client_seed);

}  // namespace fedar::clientsim
