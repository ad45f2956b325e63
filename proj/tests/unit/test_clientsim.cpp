#include "doctest.h"

#include <cmath>

#include "fedar/clientsim.hpp"
#include "fedar/errors.hpp"
#include "../support/fixtures.hpp"

using namespace fedar;
using clientsim::BehaviorKind;
using clientsim::ClientBehavior;
using numcore::ModelParams;

namespace {

resource::TaskSpec task(std::size_t batch, int epochs, double eta = 0.1) {
  resource::TaskSpec t;
  t.batch_size = batch;
  t.local_epochs = epochs;
  t.eta = eta;
  return t;
}

ModelParams small_random(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0, 0.2);
  ModelParams w(4, 3);
  for (double& v : w.flat()) v = n(rng);
  return w;
}

}  // namespace

TEST_CASE("client_update: zero epochs returns the global model") {
  const auto ds = fixture::toy_dataset("c", 40, 4, 3, 1);
  const ModelParams w = small_random(2);
  const clientsim::CostModel cost;
  const auto r = clientsim::client_update(ds, {}, w, task(10, 0), cost, 5);
  CHECK(r.params == w);
  CHECK(r.virtual_latency == cost.transmission_cost);
  CHECK(r.samples_used == 40);
  CHECK(r.client_id == "c");
}

TEST_CASE("client_update: one full batch, one epoch is one gradient step") {
  const auto ds = fixture::toy_dataset("c", 40, 4, 3, 1);
  const ModelParams w = small_random(3);
  const auto r = clientsim::client_update(ds, {}, w, task(40, 1, 0.3), {}, 5);
  const auto expect =
      numcore::sgd_step(w, numcore::gradient(w, data::to_batch(ds.samples)), 0.3);
  // Same step; the batch rows come in a shuffled order.
  CHECK(numcore::param_distance(r.params, expect) < 1e-12);
}

TEST_CASE("client_update: B=20, E=5 on 1000 samples takes 250 steps") {
  const auto ds = fixture::toy_dataset("c", 1000, 4, 3, 1);
  const clientsim::CostModel cost{0.001, 0.1};
  ClientBehavior b;
  b.latency_multiplier = 2.0;
  const auto r = clientsim::client_update(ds, b, ModelParams(4, 3), task(20, 5), cost, 5);
  CHECK(r.virtual_latency == doctest::Approx(0.001 * 2.0 * 250 + 0.1).epsilon(1e-12));
}

TEST_CASE("client_update: deterministic and execution-independent") {
  const auto ds = fixture::toy_dataset("c", 300, 4, 3, 8);
  const ModelParams w = small_random(4);
  const auto a = clientsim::client_update(ds, {}, w, task(7, 3), {}, 11);
  const auto b = clientsim::client_update(ds, {}, w, task(7, 3), {}, 11);
  const auto c = clientsim::client_update(ds, {}, w, task(7, 3), {}, 11,
                                          numcore::Exec::kParallel);
  const auto d = clientsim::client_update(ds, {}, w, task(7, 3), {}, 12);
  CHECK(a.params == b.params);
  CHECK(a.params == c.params);
  CHECK(a.local_loss == c.local_loss);
  CHECK_FALSE(a.params == d.params);
}

TEST_CASE("client_update: local training lowers local loss") {
  int lowered = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto ds = fixture::toy_dataset("c", 50, 4, 3, 100 + t);
    const ModelParams w = small_random(200 + t);
    const double before = numcore::loss(w, data::to_batch(ds.samples));
    const auto r = clientsim::client_update(ds, {}, w, task(10, 2, 0.5), {}, t);
    lowered += r.local_loss <= before;
  }
  CHECK(lowered >= 95);
}

TEST_CASE("client_update: empty dataset is a data error") {
  const data::ClientDataset empty{"e", {}, {}};
  CHECK_THROWS_AS(clientsim::client_update(empty, {}, ModelParams(4, 3), task(5, 1), {}, 1),
                  DataError);
}

TEST_CASE("apply_behavior") {
  const auto ds = fixture::toy_dataset("c", 20, 4, 3, 1);
  const auto r = clientsim::client_update(ds, {}, small_random(1), task(5, 1), {}, 1);

  const auto reliable = clientsim::apply_behavior(r, {}, 3);
  CHECK(reliable.result.params == r.params);
  CHECK_FALSE(reliable.is_late);

  const auto unit = clientsim::apply_behavior(r, fixture::deviant(1.0), 3);
  CHECK(unit.result.params == r.params);

  const auto scaled = clientsim::apply_behavior(r, fixture::deviant(10.0), 3);
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    CHECK(scaled.result.params.flat()[i] == 10.0 * r.params.flat()[i]);
  }

  int late = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    CHECK(clientsim::apply_behavior(r, fixture::straggler(1.0), seed).is_late);
    late += clientsim::apply_behavior(r, fixture::straggler(0.3), seed).is_late;
    CHECK(clientsim::apply_behavior(r, fixture::straggler(0.3), seed).is_late ==
          clientsim::apply_behavior(r, fixture::straggler(0.3), seed).is_late);
  }
  CHECK(late > 250);
  CHECK(late < 350);
}

TEST_CASE("behavior validation") {
  ClientBehavior b;
  CHECK_NOTHROW(b.validate());
  b.late_probability = 0.1;
  CHECK_THROWS_AS(b.validate(), ConfigError);
  b = fixture::straggler(1.5);
  CHECK_THROWS_AS(b.validate(), ConfigError);
  b = {};
  b.poison = data::PoisonSpec{0.5, 1};
  CHECK_THROWS_AS(b.validate(), ConfigError);
  b.kind = BehaviorKind::kPoisoner;
  CHECK_NOTHROW(b.validate());
  b.latency_multiplier = 0.0;
  CHECK_THROWS_AS(b.validate(), ConfigError);
}
