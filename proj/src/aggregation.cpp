#include <cmath>
#include <numeric>

#include "fedar/errors.hpp"
#include "fedar/server.hpp"

namespace fedar::server {

std::vector<double> sync_weights(std::span<const std::size_t> sample_counts) {
  const std::size_t total =
      std::accumulate(sample_counts.begin(), sample_counts.end(), std::size_t{0});
  if (total == 0) throw DataError("aggregation over zero samples");
  std::vector<double> weights;
  weights.reserve(sample_counts.size());
  for (const std::size_t n : sample_counts) {
    weights.push_back(static_cast<double>(n) / static_cast<double>(total));
  }
  return weights;
}

ModelParams weighted_sum(std::span<const ModelParams* const> models,
                         std::span<const double> weights, numcore::Exec exec) {
  if (models.empty()) throw DataError("aggregation over zero models");
  if (models.size() != weights.size()) {
    throw ConfigError("one weight per model is required");
  }
  for (const ModelParams* m : models) {
    if (!m->same_shape(*models.front())) {
      throw ConfigError("aggregated models differ in shape");
    }
  }

  ModelParams out(models.front()->num_features(), models.front()->num_classes());
  auto dst = out.flat();
  const auto size = static_cast<std::ptrdiff_t>(dst.size());
  if (exec == numcore::Exec::kParallel) {
#pragma omp parallel for schedule(static) if (size >= 4096)
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      double acc = 0.0;
      for (std::size_t u = 0; u < models.size(); ++u) {
        acc += weights[u] * models[u]->flat()[static_cast<std::size_t>(i)];
      }
      dst[static_cast<std::size_t>(i)] = acc;
    }
  } else {
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      double acc = 0.0;
      for (std::size_t u = 0; u < models.size(); ++u) {
        acc += weights[u] * models[u]->flat()[static_cast<std::size_t>(i)];
      }
      dst[static_cast<std::size_t>(i)] = acc;
    }
  }
  return out;
}

void async_merge(ModelParams& global, const ModelParams& update, double alpha) {
  if (!global.same_shape(update)) {
    throw ConfigError("merged model differs in shape");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("mixing weight must lie in [0, 1]");
  }
  auto g = global.flat();
  const auto u = update.flat();
  // Written as g + alpha (u - g) so alpha = 1 reproduces u exactly.
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = alpha == 1.0 ? u[i] : (1.0 - alpha) * g[i] + alpha * u[i];
  }
}

void SimilarityState::add(const ClientId& id, const ModelParams& update,
                          const ModelParams& base) {
  if (!update.same_shape(base)) throw ConfigError("update differs in shape");
  if (dim_ == 0) dim_ = update.size();
  if (update.size() != dim_) {
    throw ConfigError("similarity history dimension is fixed per experiment");
  }
  auto& h = history_[id];
  if (h.empty()) h.assign(dim_, 0.0);
  const auto u = update.flat();
  const auto b = base.flat();
  for (std::size_t i = 0; i < dim_; ++i) h[i] += u[i] - b[i];
}

double SimilarityState::max_similarity(const ClientId& id) const {
  const auto self = history_.find(id);
  if (self == history_.end()) return -1.0;
  const auto norm = [](const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  };
  const double self_norm = norm(self->second);
  if (self_norm == 0.0) return -1.0;

  double best = -1.0;
  for (const auto& [other, h] : history_) {
    if (other == id) continue;
    const double other_norm = norm(h);
    if (other_norm == 0.0) continue;
    const double dot = std::inner_product(h.begin(), h.end(),
                                          self->second.begin(), 0.0);
    best = std::max(best, dot / (self_norm * other_norm));
  }
  return best;
}

}  // namespace fedar::server
