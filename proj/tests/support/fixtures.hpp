// Small hand-built federations for server tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "fedar/rng.hpp"
#include "fedar/server.hpp"

namespace fixture {

using namespace fedar;

// n samples over `features` inputs; class c lights up input c % features.
inline data::ClientDataset toy_dataset(const std::string& id, std::size_t n,
                                       std::size_t features, int classes,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  std::uniform_int_distribution<int> label(0, classes - 1);
  data::ClientDataset ds{id, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    data::Sample s;
    s.label = label(rng);
    s.features.resize(features);
    for (double& v : s.features) v = u(rng);
    s.features[static_cast<std::size_t>(s.label) % features] += 0.7;
    ds.label_set.insert(s.label);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

inline server::SimClient toy_client(const std::string& id, std::size_t n,
                                    clientsim::ClientBehavior behavior = {},
                                    resource::ResourceProfile res = {100, 100, 100},
                                    double drain = 0.0) {
  return server::SimClient{id, toy_dataset(id, n, 4, 3, stable_hash(id)),
                           behavior,
                           resource::ResourceTracker(res, {drain, false, 0})};
}

// Four inputs, three classes, permissive task, gates on.
inline server::ExperimentSetup toy_setup(std::vector<server::SimClient> clients) {
  server::ExperimentSetup s;
  s.num_features = 4;
  s.num_classes = 3;
  s.task.requirement = {10, 1, 5};
  s.task.min_trust = 0;
  s.task.timeout = 1.0;
  s.task.batch_size = 5;
  s.task.local_epochs = 2;
  s.task.eta = 0.1;
  s.task.max_rounds = 10;
  s.clients = std::move(clients);
  s.test_set = toy_dataset("test", 60, 4, 3, 99).samples;
  s.seed = 3;
  return s;
}

inline clientsim::ClientBehavior straggler(double p) {
  clientsim::ClientBehavior b;
  b.kind = clientsim::BehaviorKind::kStraggler;
  b.late_probability = p;
  return b;
}

inline clientsim::ClientBehavior deviant(double scale) {
  clientsim::ClientBehavior b;
  b.kind = clientsim::BehaviorKind::kPoisoner;
  b.deviant_scale = scale;
  return b;
}

}  // namespace fixture
