#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace fedar::resource {

struct ResourceProfile {
  double memory_mb = 0.0;
  double bandwidth_mbps = 0.0;
  double battery_pct = 0.0;

  void validate() const;
  bool operator==(const ResourceProfile&) const = default;
};

// A published FL task: what a client must offer and how training runs.
struct TaskSpec {
  ResourceProfile requirement;
  int min_trust = 0;
  double timeout = 1.0;
  // Per-round override of `timeout`; round m uses entry m-1 when present.
  std::vector<double> timeout_schedule;
  // Fixed deviation threshold; empty means calibrate from the honest median.
  std::optional<double> gamma;
  double gamma_scale = 3.0;
  std::size_t batch_size = 20;
  int local_epochs = 5;
  double eta = 0.01;
  double client_fraction = 1.0;
  double subsample_ratio = 1.0;
  int max_rounds = 30;
  std::optional<double> target_accuracy;

  double timeout_for_round(int round) const;
  void validate() const;
};

// Componentwise dominance, inclusive.
bool check_resource(const ResourceProfile& avail, const ResourceProfile& req);

// Tracks one client's resources over a run: battery drains on every round
// the client trains, memory and bandwidth fluctuate by seeded noise.
class ResourceTracker {
 public:
  struct Options {
    double drain_per_round = 0.0;
    bool noise = false;
    std::uint64_t seed = 0;
  };

  ResourceTracker(ResourceProfile profile, Options options);

  ResourceProfile availability(int round_index) const;
  void record_participation();

  const ResourceProfile& profile() const noexcept { return profile_; }
  int participations() const noexcept { return participations_; }

 private:
  ResourceProfile profile_;
  Options options_;
  double battery_;
  int participations_ = 0;
};

}  // namespace fedar::resource
