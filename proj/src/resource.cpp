#include "fedar/resource.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedar/errors.hpp"
#include "fedar/rng.hpp"

namespace fedar::resource {

void ResourceProfile::validate() const {
  const auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!nonneg(memory_mb)) throw ConfigError("memory_mb", "must be >= 0");
  if (!nonneg(bandwidth_mbps)) {
    throw ConfigError("bandwidth_mbps", "must be >= 0");
  }
  if (!nonneg(battery_pct) || battery_pct > 100.0) {
    throw ConfigError("battery_pct", "must lie in [0, 100]");
  }
}

double TaskSpec::timeout_for_round(int round) const {
  const auto idx = static_cast<std::size_t>(round - 1);
  if (round >= 1 && idx < timeout_schedule.size()) return timeout_schedule[idx];
  return timeout;
}

void TaskSpec::validate() const {
  requirement.validate();
  if (!(timeout > 0.0)) throw ConfigError("task.timeout", "must be > 0");
  for (std::size_t i = 0; i < timeout_schedule.size(); ++i) {
    if (!(timeout_schedule[i] > 0.0)) {
      throw ConfigError("task.timeout_schedule[" + std::to_string(i) + "]",
                        "must be > 0");
    }
  }
  if (gamma && !(*gamma > 0.0)) throw ConfigError("task.gamma", "must be > 0");
  if (!(gamma_scale > 0.0)) throw ConfigError("task.gamma_scale", "must be > 0");
  if (batch_size == 0) throw ConfigError("task.batch_size", "must be >= 1");
  if (local_epochs < 0) throw ConfigError("task.local_epochs", "must be >= 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ConfigError("task.eta", "must be a finite number >= 0");
  }
  if (!(client_fraction > 0.0 && client_fraction <= 1.0)) {
    throw ConfigError("task.client_fraction", "must lie in (0, 1]");
  }
  if (!(subsample_ratio > 0.0 && subsample_ratio <= 1.0)) {
    throw ConfigError("task.subsample_ratio", "must lie in (0, 1]");
  }
  if (max_rounds < 0) throw ConfigError("task.max_rounds", "must be >= 0");
  if (target_accuracy && !(*target_accuracy >= 0.0 && *target_accuracy <= 1.0)) {
    throw ConfigError("task.target_accuracy", "must lie in [0, 1]");
  }
}

bool check_resource(const ResourceProfile& avail, const ResourceProfile& req) {
  return avail.memory_mb >= req.memory_mb &&
         avail.bandwidth_mbps >= req.bandwidth_mbps &&
         avail.battery_pct >= req.battery_pct;
}

ResourceTracker::ResourceTracker(ResourceProfile profile, Options options)
    : profile_(profile), options_(options), battery_(profile.battery_pct) {
  profile_.validate();
  if (!(options_.drain_per_round >= 0.0)) {
    throw ConfigError("battery_drain", "must be >= 0");
  }
}

ResourceProfile ResourceTracker::availability(int round_index) const {
  ResourceProfile now = profile_;
  now.battery_pct = battery_;
  if (options_.noise) {
    Rng rng(derive_seed(options_.seed, static_cast<std::uint64_t>(round_index)));
    std::uniform_real_distribution<double> factor(0.8, 1.0);
    now.memory_mb *= factor(rng);
    now.bandwidth_mbps *= factor(rng);
  }
  return now;
}

void ResourceTracker::record_participation() {
  ++participations_;
  battery_ = std::max(0.0, battery_ - options_.drain_per_round);
}

}  // namespace fedar::resource
