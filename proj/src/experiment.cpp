#include "fedar/experiment.hpp"

#include <cmath>

#include "fedar/errors.hpp"

namespace fedar {
namespace {

// Re-throws a nested ConfigError with `prefix` prepended to its field.
template <typename Fn>
void with_prefix(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(e.field().empty() ? prefix : prefix + "." + e.field(),
                      e.message());
  }
}

ClientConfig robot(int index, std::set<int> labels, std::size_t samples,
                   std::string activation, resource::ResourceProfile res,
                   double speed) {
  ClientConfig c;
  c.id = "robot" + std::string(index < 10 ? "0" : "") + std::to_string(index);
  c.labels = std::move(labels);
  c.samples = samples;
  c.resources = res;
  c.behavior.latency_multiplier = speed;
  c.activation = std::move(activation);
  return c;
}

}  // namespace

const char* to_string(AggregationMode mode) {
  return mode == AggregationMode::kSync ? "sync" : "async";
}

void ServerOptions::validate() const {
  if (!(similarity_threshold > -1.0)) {
    throw ConfigError("server.similarity_threshold", "must be > -1");
  }
  if (!(async_mixing > 0.0 && async_mixing <= 1.0)) {
    throw ConfigError("server.async_mixing", "must lie in (0, 1]");
  }
  if (!(async_close_factor >= 1.0)) {
    throw ConfigError("server.async_close_factor", "must be >= 1");
  }
  if (!(late_delay_fraction > 0.0)) {
    throw ConfigError("server.late_delay_fraction", "must be > 0");
  }
}

void DataConfig::validate() const {
  if (pool_size == 0) throw ConfigError("data.pool_size", "must be > 0");
  if (!(noise_sd >= 0.0)) throw ConfigError("data.noise_sd", "must be >= 0");
  if (max_shift < 0) throw ConfigError("data.max_shift", "must be >= 0");
  if (source == DataSource::kIdx && idx_dir.empty()) {
    throw ConfigError("data.idx_dir", "required when source is idx");
  }
}

void ClientConfig::validate() const {
  if (id.empty()) throw ConfigError("id", "must not be empty");
  if (labels.empty()) throw ConfigError("labels", "must not be empty");
  with_prefix("resources", [&] { resources.validate(); });
  if (!(battery_drain >= 0.0)) {
    throw ConfigError("battery_drain", "must be >= 0");
  }
  behavior.validate();
}

void ExperimentConfig::validate() const {
  if (num_features == 0) throw ConfigError("num_features", "must be > 0");
  if (num_classes < 2) throw ConfigError("num_classes", "must be >= 2");
  task.validate();
  trust.validate();
  server.validate();
  data.validate();
  if (!(cost.base_compute_cost >= 0.0)) {
    throw ConfigError("cost.base_compute_cost", "must be >= 0");
  }
  if (!(cost.transmission_cost >= 0.0)) {
    throw ConfigError("cost.transmission_cost", "must be >= 0");
  }
  if (clients.empty()) throw ConfigError("clients", "at least one client");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const std::string prefix = "clients[" + std::to_string(i) + "]";
    with_prefix(prefix, [&] { clients[i].validate(); });
    for (const int label : clients[i].labels) {
      if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
        throw ConfigError(prefix + ".labels",
                          "label " + std::to_string(label) + " out of range");
      }
    }
    if (!seen.insert(clients[i].id).second) {
      throw ConfigError(prefix + ".id", "duplicate client id '" +
                                            clients[i].id + "'");
    }
  }
}

ExperimentConfig table2_config() {
  ExperimentConfig cfg;
  cfg.name = "table2";
  cfg.seed = 1;
  cfg.task.requirement = {256.0, 10.0, 20.0};
  cfg.task.min_trust = 30;
  cfg.task.timeout = 5.0;
  cfg.task.batch_size = 20;
  cfg.task.local_epochs = 5;
  cfg.task.eta = 0.01;
  cfg.task.max_rounds = 30;

  const std::set<int> all{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  // Hardware varies per robot; every robot meets the default requirement.
  cfg.clients = {
      robot(1, all, 1000, "softmax", {2048, 100, 100}, 1.0),
      robot(2, all, 1000, "relu", {1024, 80, 90}, 1.1),
      robot(3, {0, 1, 2, 3}, 400, "softmax", {512, 40, 60}, 1.5),
      robot(4, all, 1000, "softmax", {2048, 100, 100}, 1.0),
      robot(5, {4, 5, 6}, 300, "relu", {384, 30, 50}, 1.6),
      robot(6, {7, 8, 9}, 300, "relu", {384, 30, 50}, 1.6),
      robot(7, all, 1000, "softmax", {1536, 90, 95}, 1.0),
      robot(8, all, 1000, "relu", {1024, 80, 90}, 1.2),
      robot(9, {5, 6, 8}, 300, "softmax", {512, 40, 60}, 1.5),
      robot(10, all, 1000, "softmax", {2048, 100, 100}, 1.0),
      robot(11, all, 1000, "relu", {1024, 80, 90}, 1.1),
      robot(12, all, 1000, "softmax", {1536, 90, 95}, 1.0),
  };
  return cfg;
}

}  // namespace fedar
