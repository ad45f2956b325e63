#include "fedar/clientsim.hpp"

#include <cmath>

#include "fedar/errors.hpp"
#include "fedar/rng.hpp"

namespace fedar::clientsim {
namespace {

constexpr std::uint64_t kBatchStream = 0xba7c;
constexpr std::uint64_t kLateStream = 0x1a7e;

}  // namespace

const char* to_string(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::kReliable:
      return "reliable";
    case BehaviorKind::kStraggler:
      return "straggler";
    case BehaviorKind::kPoisoner:
      return "poisoner";
  }
  return "unknown";
}

void ClientBehavior::validate() const {
  if (!(late_probability >= 0.0 && late_probability <= 1.0)) {
    throw ConfigError("behavior.late_probability", "must lie in [0, 1]");
  }
  if (!(latency_multiplier > 0.0) || !std::isfinite(latency_multiplier)) {
    throw ConfigError("behavior.latency_multiplier", "must be > 0");
  }
  if (deviant_scale && !std::isfinite(*deviant_scale)) {
    throw ConfigError("behavior.deviant_scale", "must be finite");
  }
  if (poison && !(poison->flip_fraction >= 0.0 && poison->flip_fraction <= 1.0)) {
    throw ConfigError("behavior.flip_fraction", "must lie in [0, 1]");
  }
  if (kind == BehaviorKind::kReliable &&
      (late_probability != 0.0 || poison || deviant_scale)) {
    throw ConfigError("behavior",
                      "a reliable client cannot be late or poisoned");
  }
}

ClientUpdateResult client_update(const data::ClientDataset& dataset,
                                 const ClientBehavior& behavior,
                                 const numcore::ModelParams& global,
                                 const resource::TaskSpec& spec,
                                 const CostModel& cost,
                                 std::uint64_t client_seed,
                                 numcore::Exec exec) {
  if (dataset.size() == 0) {
    throw DataError("client '" + dataset.client_id + "' has no data");
  }
  const auto batches = data::shuffle_and_batch(
      dataset, spec.batch_size, derive_seed(client_seed, kBatchStream));

  numcore::ModelParams w = global;
  for (int epoch = 0; epoch < spec.local_epochs; ++epoch) {
    for (const numcore::Batch& b : batches) {
      numcore::train_step(w, b, spec.eta, exec);
    }
  }

  double total_loss = 0.0;
  for (const numcore::Batch& b : batches) {
    total_loss += numcore::loss(w, b, exec) * static_cast<double>(b.rows());
  }

  ClientUpdateResult result;
  result.client_id = dataset.client_id;
  result.params = std::move(w);
  result.samples_used = dataset.size();
  result.virtual_latency =
      cost.base_compute_cost * behavior.latency_multiplier *
          static_cast<double>(spec.local_epochs) *
          static_cast<double>(batches.size()) +
      cost.transmission_cost;
  result.local_loss = total_loss / static_cast<double>(dataset.size());
  return result;
}

BehaviorOutcome apply_behavior(ClientUpdateResult result,
                               const ClientBehavior& behavior,
                               std::uint64_t client_seed) {
  BehaviorOutcome out{std::move(result), false};
  if (behavior.kind == BehaviorKind::kReliable) return out;

  if (behavior.deviant_scale) {
    for (double& v : out.result.params.flat()) v *= *behavior.deviant_scale;
  }
  if (behavior.late_probability > 0.0) {
    Rng rng(derive_seed(client_seed, kLateStream));
    std::bernoulli_distribution late(behavior.late_probability);
    out.is_late = late(rng);
  }
  return out;
}

}  // namespace fedar::clientsim
