#include "fedar/server.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>

#include "fedar/errors.hpp"
#include "fedar/rng.hpp"
#include "fedar/selection.hpp"

namespace fedar::server {
namespace {

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kPartitionStream = 0x9a27;
constexpr std::uint64_t kPoisonStream = 0x9015;
constexpr std::uint64_t kResourceStream = 0x2e50;
constexpr std::uint64_t kRoundStream = 0x20d0;
constexpr std::uint64_t kSelectStream = 0x5e1e;

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

numcore::Exec exec_for(const ServerOptions& opts) {
  return opts.parallel ? numcore::Exec::kParallel : numcore::Exec::kSerial;
}

std::vector<data::Sample> load_pool(const ExperimentConfig& config,
                                    std::vector<std::string>& notes) {
  std::string dir = config.data.idx_dir;
  if (config.data.source == DataSource::kAuto && dir.empty()) {
    if (const char* env = std::getenv("FEDAR_MNIST_DIR"); env && *env) dir = env;
  }
  const bool use_idx = config.data.source == DataSource::kIdx ||
                       (config.data.source == DataSource::kAuto && !dir.empty());
  if (use_idx) {
    const std::filesystem::path base(dir);
    notes.push_back("data: IDX files from " + base.string());
    auto pool = data::load_idx(base / "train-images-idx3-ubyte",
                               base / "train-labels-idx1-ubyte");
    if (pool.size() > config.data.pool_size) {
      Rng rng(derive_seed(config.seed, kDataStream));
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(config.data.pool_size);
    }
    return pool;
  }
  notes.push_back("data: synthetic digits");
  return data::synth_digits(
      config.data.pool_size, static_cast<int>(config.num_classes),
      derive_seed(config.seed, kDataStream),
      data::SynthOptions{config.data.noise_sd, config.data.max_shift});
}

}  // namespace

const char* to_string(ClientStatus status) {
  switch (status) {
    case ClientStatus::kOnTime:
      return "on_time";
    case ClientStatus::kLate:
      return "late";
    case ClientStatus::kRejectedDeviation:
      return "rejected_deviation";
    case ClientStatus::kRejectedSimilarity:
      return "rejected_similarity";
  }
  return "unknown";
}

std::size_t RoundRecord::count(ClientStatus status) const {
  return static_cast<std::size_t>(
      std::count_if(participants.begin(), participants.end(),
                    [&](const ParticipantOutcome& p) { return p.status == status; }));
}

std::pair<double, double> evaluate_global(const ModelParams& params,
                                          const numcore::Batch& test_set,
                                          numcore::Exec exec) {
  if (test_set.empty()) throw DataError("evaluation needs a nonempty test set");
  return {numcore::loss(params, test_set, exec),
          numcore::accuracy(params, test_set, exec)};
}

ExperimentSetup build_setup(const ExperimentConfig& config) {
  config.validate();
  ExperimentSetup setup;
  setup.task = config.task;
  setup.trust = config.trust;
  setup.failure_basis = config.failure_basis;
  setup.server = config.server;
  setup.cost = config.cost;
  setup.num_features = config.num_features;
  setup.num_classes = config.num_classes;
  setup.seed = config.seed;

  auto pool = load_pool(config, setup.notes);
  for (const auto& s : pool) {
    if (s.features.size() != config.num_features) {
      throw ConfigError("num_features", "data has " +
                                            std::to_string(s.features.size()) +
                                            " features per sample");
    }
  }

  std::vector<data::PartitionEntry> table;
  for (const ClientConfig& c : config.clients) {
    table.push_back({c.id, c.labels, c.samples});
  }
  auto fed = data::partition(table, std::move(pool),
                             derive_seed(config.seed, kPartitionStream),
                             config.data.test_cap);
  for (auto& w : fed.warnings) setup.notes.push_back("warning: " + w);

  for (std::size_t i = 0; i < config.clients.size(); ++i) {
    const ClientConfig& c = config.clients[i];
    const std::uint64_t client_key = stable_hash(c.id);
    data::ClientDataset ds = std::move(fed.clients[i]);
    if (c.behavior.poison) {
      data::PoisonSpec spec = *c.behavior.poison;
      spec.label_map_seed = derive_seed(config.seed, kPoisonStream, client_key,
                                        spec.label_map_seed);
      ds = data::poison(ds, spec, static_cast<int>(config.num_classes));
    }
    resource::ResourceTracker tracker(
        c.resources, {c.battery_drain, c.resource_noise,
                      derive_seed(config.seed, kResourceStream, client_key)});
    setup.clients.push_back(
        SimClient{c.id, std::move(ds), c.behavior, std::move(tracker)});
  }
  setup.test_set = std::move(fed.test_set);
  return setup;
}

Simulation::Simulation(ExperimentSetup setup)
    : setup_(std::move(setup)),
      ledger_(setup_.trust, setup_.failure_basis),
      global_(setup_.num_features, setup_.num_classes) {
  setup_.task.validate();
  setup_.server.validate();
  for (std::size_t i = 0; i < setup_.clients.size(); ++i) {
    const SimClient& c = setup_.clients[i];
    c.behavior.validate();
    ledger_.register_client(c.id);
    index_.emplace(c.id, i);
    total_samples_ += c.dataset.size();
  }
  test_batch_ = data::to_batch(setup_.test_set);
}

void Simulation::set_global(ModelParams params) {
  if (!params.same_shape(global_)) {
    throw ConfigError("global model differs in shape");
  }
  global_ = std::move(params);
}

std::uint64_t Simulation::round_seed(int round) const {
  return derive_seed(setup_.seed, kRoundStream,
                     static_cast<std::uint64_t>(round));
}

RoundRecord Simulation::run_round() {
  return run_round_impl(setup_.server.mode, round_seed(round_ + 1));
}

RoundRecord Simulation::run_round_sync(std::uint64_t round_seed) {
  return run_round_impl(AggregationMode::kSync, round_seed);
}

RoundRecord Simulation::run_round_async(std::uint64_t round_seed) {
  return run_round_impl(AggregationMode::kAsync, round_seed);
}

std::vector<clientsim::BehaviorOutcome> Simulation::train(
    const std::vector<std::size_t>& who, std::uint64_t round_seed) const {
  std::vector<clientsim::BehaviorOutcome> out(who.size());
  std::vector<std::exception_ptr> errors(who.size());
  const numcore::Exec exec = exec_for(setup_.server);

  const auto work = [&](std::size_t k) {
    try {
      const SimClient& c = setup_.clients[who[k]];
      const std::uint64_t client_seed =
          derive_seed(round_seed, stable_hash(c.id));
      out[k] = clientsim::apply_behavior(
          clientsim::client_update(c.dataset, c.behavior, global_, setup_.task,
                                   setup_.cost, client_seed, exec),
          c.behavior, client_seed);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const auto n = static_cast<std::ptrdiff_t>(who.size());
  if (exec == numcore::Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n; ++k) work(static_cast<std::size_t>(k));
  } else {
    for (std::ptrdiff_t k = 0; k < n; ++k) work(static_cast<std::size_t>(k));
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

RoundRecord Simulation::run_round_impl(AggregationMode mode,
                                       std::uint64_t round_seed) {
  const int m = ++round_;
  const resource::TaskSpec& task = setup_.task;
  const ServerOptions& opts = setup_.server;
  const double timeout = task.timeout_for_round(m);
  const double round_start = clock_;

  RoundRecord rec;
  rec.round = m;
  rec.mode = mode;

  // Resource gate. Clients without data abstain.
  for (SimClient& c : setup_.clients) {
    if (c.dataset.size() == 0) continue;
    if (resource::check_resource(c.resources.availability(m), task.requirement)) {
      rec.ra_list.push_back(c.id);
    }
  }

  const trust::Snapshot before = ledger_.snapshot();
  rec.eligible = selection::eligible(before, rec.ra_list, task.min_trust);
  const auto sel =
      selection::select_participants(rec.eligible, task.client_fraction,
                                     task.subsample_ratio,
                                     derive_seed(round_seed, kSelectStream));
  rec.interested = sel.interested;
  ledger_.open_round(m, sel.participants);
  ledger_.credit_interested(sel.interested);

  if (sel.participants.empty()) {
    rec.notes.push_back("round " + std::to_string(m) +
                        ": no eligible clients, round skipped");
  }

  std::vector<std::size_t> who;
  for (const ClientId& id : sel.participants) who.push_back(index_.at(id));
  auto outcomes = train(who, round_seed);
  for (const std::size_t i : who) setup_.clients[i].resources.record_participation();

  // Virtual arrival times; stragglers marked late land after the timeout.
  struct Pending {
    std::size_t slot;
    double arrival;
    bool on_time;
  };
  std::vector<Pending> arrivals;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const double latency = outcomes[k].result.virtual_latency;
    const bool late = outcomes[k].is_late || latency > timeout;
    const double arrival =
        outcomes[k].is_late
            ? std::max(latency, timeout * (1.0 + opts.late_delay_fraction))
            : latency;
    arrivals.push_back({k, arrival, !late});
  }
  std::sort(arrivals.begin(), arrivals.end(),
            [&](const Pending& a, const Pending& b) {
              if (a.arrival != b.arrival) return a.arrival < b.arrival;
              return outcomes[a.slot].result.client_id <
                     outcomes[b.slot].result.client_id;
            });

  // Deviation threshold for this round.
  const ModelParams start = global_;
  std::vector<double> distances(outcomes.size());
  std::vector<double> on_time_distances;
  for (const Pending& p : arrivals) {
    distances[p.slot] = numcore::param_distance(start, outcomes[p.slot].result.params);
    if (p.on_time) on_time_distances.push_back(distances[p.slot]);
  }
  double gamma = std::numeric_limits<double>::infinity();
  if (task.gamma) {
    gamma = *task.gamma;
  } else if (gamma_) {
    gamma = *gamma_;
  } else if (!on_time_distances.empty()) {
    gamma = task.gamma_scale * median(on_time_distances);
  }
  rec.gamma = gamma;

  const auto gate = [&](const Pending& p) {
    const auto& result = outcomes[p.slot].result;
    if (opts.deviation_gate && distances[p.slot] > gamma) {
      return ClientStatus::kRejectedDeviation;
    }
    if (opts.similarity_gate) {
      similarity_.add(result.client_id, result.params, start);
      if (similarity_.max_similarity(result.client_id) >
          opts.similarity_threshold) {
        return ClientStatus::kRejectedSimilarity;
      }
    }
    return ClientStatus::kOnTime;
  };

  const double close_time = timeout * opts.async_close_factor;
  const numcore::Exec exec = exec_for(opts);
  std::vector<const ModelParams*> accepted;
  std::vector<std::size_t> accepted_counts;
  std::vector<double> accepted_distances;
  double last_merge = 0.0;

  for (const Pending& p : arrivals) {
    const auto& result = outcomes[p.slot].result;
    ParticipantOutcome po;
    po.id = result.client_id;
    po.arrival_time = p.arrival;
    po.distance = distances[p.slot];
    po.samples = result.samples_used;

    if (p.on_time) {
      po.status = gate(p);
    } else {
      po.status = ClientStatus::kLate;
    }
    const bool mergeable =
        po.status == ClientStatus::kOnTime ||
        (mode == AggregationMode::kAsync && po.status == ClientStatus::kLate &&
         opts.merge_late && p.arrival <= close_time &&
         gate(p) == ClientStatus::kOnTime);

    if (mergeable) {
      po.merged = true;
      if (mode == AggregationMode::kSync) {
        accepted.push_back(&result.params);
        accepted_counts.push_back(result.samples_used);
      } else {
        const double alpha = opts.async_mixing *
                             static_cast<double>(result.samples_used) /
                             static_cast<double>(total_samples_);
        async_merge(global_, result.params, alpha);
        last_merge = std::max(last_merge, p.arrival);
      }
      if (po.status == ClientStatus::kOnTime) {
        accepted_distances.push_back(po.distance);
      }
    }
    rec.participants.push_back(std::move(po));
  }

  const bool any_merged =
      std::any_of(rec.participants.begin(), rec.participants.end(),
                  [](const ParticipantOutcome& p) { return p.merged; });
  if (mode == AggregationMode::kSync && any_merged) {
    global_ = weighted_sum(accepted, sync_weights(accepted_counts), exec);
  }
  if (!any_merged && !sel.participants.empty()) {
    rec.notes.push_back("round " + std::to_string(m) +
                        ": no accepted updates, global model unchanged");
  }

  // One trust update per participant, in arrival order.
  for (const ParticipantOutcome& po : rec.participants) {
    const bool in_time = po.status != ClientStatus::kLate;
    const bool deviant = po.status == ClientStatus::kRejectedDeviation ||
                         po.status == ClientStatus::kRejectedSimilarity;
    ledger_.update_trust_score(m, po.id, in_time, deviant);
  }

  if (!task.gamma && !accepted_distances.empty()) {
    gamma_ = task.gamma_scale * median(accepted_distances);
  }

  double elapsed = timeout;
  if (mode == AggregationMode::kAsync) elapsed = std::max(timeout, last_merge);
  clock_ = round_start + elapsed;
  rec.virtual_time = clock_;

  if (!test_batch_.empty()) {
    const auto [l, a] = evaluate_global(global_, test_batch_, exec);
    rec.test_loss = l;
    rec.test_accuracy = a;
  } else {
    rec.test_loss = std::numeric_limits<double>::quiet_NaN();
    rec.test_accuracy = std::numeric_limits<double>::quiet_NaN();
  }
  rec.trust = ledger_.snapshot();
  for (const auto& [id, score] : rec.trust) {
    if (before.at(id) < task.min_trust && score >= task.min_trust) {
      rec.notes.push_back("round " + std::to_string(m) + ": " + id +
                          " regained the minimum trust");
    }
  }
  return rec;
}

std::vector<RoundRecord> run_experiment(ExperimentSetup setup) {
  Simulation sim(std::move(setup));
  std::vector<RoundRecord> records;
  const auto& task = sim.setup().task;
  for (int m = 1; m <= task.max_rounds; ++m) {
    records.push_back(sim.run_round());
    if (task.target_accuracy &&
        records.back().test_accuracy >= *task.target_accuracy) {
      break;
    }
  }
  return records;
}

std::vector<RoundRecord> run_experiment(const ExperimentConfig& config) {
  return run_experiment(build_setup(config));
}

}  // namespace fedar::server
