#include "fedar/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedar/errors.hpp"
#include "numcore_kernels.hpp"

namespace fedar::numcore {
namespace {

void require_compatible(const ModelParams& params, const Batch& batch) {
  if (params.num_classes() == 0) {
    throw ConfigError("model has no classes");
  }
  if (params.num_features() != batch.num_features()) {
    throw ConfigError("shape mismatch: model expects " +
                      std::to_string(params.num_features()) +
                      " features, batch has " +
                      std::to_string(batch.num_features()));
  }
}

void require_labels(const ModelParams& params, const Batch& batch) {
  for (const int y : batch.labels()) {
    if (y < 0 || static_cast<std::size_t>(y) >= params.num_classes()) {
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(params.num_classes()) + ")");
    }
  }
}

}  // namespace

Batch::Batch(std::size_t num_features, std::vector<double> inputs,
             std::vector<int> labels)
    : features_(num_features),
      inputs_(std::move(inputs)),
      labels_(std::move(labels)) {
  if (inputs_.size() != labels_.size() * features_) {
    throw ConfigError("batch inputs hold " + std::to_string(inputs_.size()) +
                      " values, expected " + std::to_string(labels_.size()) +
                      " rows of " + std::to_string(features_));
  }
  row_start_.reserve(labels_.size() + 1);
  std::vector<std::size_t> per_feature(features_, 0);
  for (std::size_t r = 0; r < labels_.size(); ++r) {
    for (std::size_t f = 0; f < features_; ++f) {
      const double v = inputs_[r * features_ + f];
      if (!std::isfinite(v)) throw DataError("non-finite input value");
      if (v != 0.0) {
        nonzero_.push_back(static_cast<std::uint32_t>(f));
        nonzero_values_.push_back(v);
        ++per_feature[f];
      }
    }
    row_start_.push_back(nonzero_.size());
  }

  // Transpose into columns; position[f] is the next free slot of feature f.
  std::vector<std::size_t> position(features_, 0);
  for (std::size_t f = 0; f < features_; ++f) {
    if (per_feature[f] == 0) continue;
    touched_.push_back(static_cast<std::uint32_t>(f));
    position[f] = col_start_.back();
    col_start_.push_back(col_start_.back() + per_feature[f]);
  }
  col_rows_.resize(nonzero_.size());
  col_values_.resize(nonzero_.size());
  for (std::size_t r = 0; r < labels_.size(); ++r) {
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      const std::size_t slot = position[nonzero_[k]]++;
      col_rows_[slot] = static_cast<std::uint32_t>(r);
      col_values_[slot] = nonzero_values_[k];
    }
  }
}

Matrix forward(const ModelParams& params, const Batch& batch, Exec exec) {
  require_compatible(params, batch);
  Matrix out{batch.rows(), params.num_classes(),
             std::vector<double>(batch.rows() * params.num_classes())};
  if (exec == Exec::kParallel) {
    kernels::softmax_rows_omp(params, batch, out.values);
  } else {
    kernels::softmax_rows_serial(params, batch, out.values);
  }
  return out;
}

double loss(const ModelParams& params, const Batch& batch, Exec exec) {
  require_compatible(params, batch);
  require_labels(params, batch);
  if (batch.empty()) throw DataError("loss of an empty batch");
  const Matrix probs = forward(params, batch, exec);
  double total = 0.0;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const double p = probs.row(r)[static_cast<std::size_t>(batch.labels()[r])];
    total += -std::log(std::max(p, kLogClamp));
  }
  return total / static_cast<double>(batch.rows());
}

namespace {

// (softmax - onehot) / rows
Matrix output_delta(const ModelParams& params, const Batch& batch, Exec exec) {
  Matrix delta = forward(params, batch, exec);
  const double scale = 1.0 / static_cast<double>(batch.rows());
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    double* d = delta.values.data() + r * delta.cols;
    d[static_cast<std::size_t>(batch.labels()[r])] -= 1.0;
    for (std::size_t c = 0; c < delta.cols; ++c) d[c] *= scale;
  }
  return delta;
}

void accumulate(const Batch& batch, const Matrix& delta, Gradient& grad,
                Exec exec) {
  if (exec == Exec::kParallel) {
    kernels::accumulate_gradient_omp(batch, delta.values, grad);
  } else {
    kernels::accumulate_gradient_serial(batch, delta.values, grad);
  }
}

void require_eta(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ConfigError("learning rate must be a finite nonnegative number");
  }
}

}  // namespace

Gradient gradient(const ModelParams& params, const Batch& batch, Exec exec) {
  require_compatible(params, batch);
  require_labels(params, batch);
  if (batch.empty()) throw DataError("gradient of an empty batch");

  const Matrix delta = output_delta(params, batch, exec);
  Gradient grad(params.num_features(), params.num_classes());
  accumulate(batch, delta, grad, exec);
  return grad;
}

void train_step(ModelParams& params, const Batch& batch, double eta,
                Exec exec) {
  require_compatible(params, batch);
  require_labels(params, batch);
  require_eta(eta);
  if (batch.empty()) throw DataError("gradient of an empty batch");

  const Matrix delta = output_delta(params, batch, exec);

  // Scratch gradient kept zero between calls; only touched rows are dirtied.
  thread_local Gradient scratch;
  if (!scratch.same_shape(params)) {
    scratch = Gradient(params.num_features(), params.num_classes());
  }
  accumulate(batch, delta, scratch, exec);

  const std::size_t classes = params.num_classes();
  auto w = params.weights();
  auto g = scratch.weights();
  for (const std::uint32_t f : batch.touched_features()) {
    double* wf = w.data() + static_cast<std::size_t>(f) * classes;
    double* gf = g.data() + static_cast<std::size_t>(f) * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      wf[c] -= eta * gf[c];
      gf[c] = 0.0;
    }
  }
  auto b = params.bias();
  auto gb = scratch.bias();
  for (std::size_t c = 0; c < classes; ++c) {
    b[c] -= eta * gb[c];
    gb[c] = 0.0;
  }
}

void sgd_step_inplace(ModelParams& params, const Gradient& grad, double eta) {
  if (!params.same_shape(grad)) {
    throw ConfigError("gradient shape does not match parameters");
  }
  require_eta(eta);
  auto p = params.flat();
  const auto g = grad.flat();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= eta * g[i];
}

ModelParams sgd_step(const ModelParams& params, const Gradient& grad,
                     double eta) {
  ModelParams next = params;
  sgd_step_inplace(next, grad, eta);
  return next;
}

double accuracy(const ModelParams& params, const Batch& batch, Exec exec) {
  if (batch.empty()) throw DataError("accuracy of an empty batch");
  const Matrix probs = forward(params, batch, exec);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto row = probs.row(r);
    // max_element returns the first maximum, i.e. the lowest tied index.
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    if (best == batch.labels()[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.rows());
}

double param_distance(const ModelParams& a, const ModelParams& b) {
  if (!a.same_shape(b)) throw ConfigError("parameter shapes differ");
  const auto x = a.flat();
  const auto y = b.flat();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

bool all_finite(const ModelParams& params) {
  const auto v = params.flat();
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace fedar::numcore
