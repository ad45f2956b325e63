#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fedar::numcore {

inline constexpr std::size_t kImageFeatures = 784;
inline constexpr std::size_t kDigitClasses = 10;

// Probabilities are clamped here before taking the log.
inline constexpr double kLogClamp = 1e-12;

// Which kernel family runs a computation. Both produce bit-identical results;
// the serial family is the reference used by the tests.
enum class Exec { kSerial, kParallel };

namespace detail {
struct ParamsTag {};
struct GradientTag {};
}  // namespace detail

// Dense (features x classes) weight matrix plus a bias vector, stored as one
// flat buffer: weights row-major first, then the bias.
template <typename Tag>
class ParamTensor {
 public:
  ParamTensor() = default;
  ParamTensor(std::size_t num_features, std::size_t num_classes)
      : features_(num_features),
        classes_(num_classes),
        values_((num_features + 1) * num_classes, 0.0) {}

  std::size_t num_features() const noexcept { return features_; }
  std::size_t num_classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> flat() noexcept { return values_; }
  std::span<const double> flat() const noexcept { return values_; }

  std::span<double> weights() noexcept {
    return flat().first(features_ * classes_);
  }
  std::span<const double> weights() const noexcept {
    return flat().first(features_ * classes_);
  }
  std::span<double> bias() noexcept { return flat().last(classes_); }
  std::span<const double> bias() const noexcept { return flat().last(classes_); }

  double& weight(std::size_t feature, std::size_t cls) {
    return values_[feature * classes_ + cls];
  }
  double weight(std::size_t feature, std::size_t cls) const {
    return values_[feature * classes_ + cls];
  }

  bool same_shape(const auto& other) const noexcept {
    return features_ == other.num_features() && classes_ == other.num_classes();
  }

  bool operator==(const ParamTensor&) const = default;

 private:
  std::size_t features_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> values_;
};

using ModelParams = ParamTensor<detail::ParamsTag>;
using Gradient = ParamTensor<detail::GradientTag>;

// Row-major dense matrix; used for the (batch x classes) probability output.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

// A minibatch of flattened inputs with their labels. The nonzero column
// offsets of every row are indexed at construction so kernels can skip the
// blank background of digit images.
class Batch {
 public:
  Batch() = default;
  Batch(std::size_t num_features, std::vector<double> inputs,
        std::vector<int> labels);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t num_features() const noexcept { return features_; }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> inputs() const noexcept { return inputs_; }
  std::span<const double> row(std::size_t r) const {
    return inputs().subspan(r * features_, features_);
  }
  std::span<const int> labels() const noexcept { return labels_; }

  std::span<const std::uint32_t> nonzero(std::size_t r) const {
    return std::span<const std::uint32_t>(nonzero_).subspan(
        row_start_[r], row_start_[r + 1] - row_start_[r]);
  }
  // Values at nonzero(r), packed.
  std::span<const double> nonzero_values(std::size_t r) const {
    return std::span<const double>(nonzero_values_).subspan(
        row_start_[r], row_start_[r + 1] - row_start_[r]);
  }
  // Sorted features that are nonzero in at least one row.
  std::span<const std::uint32_t> touched_features() const noexcept {
    return touched_;
  }
  // Column view of touched_features()[k]: rows in ascending order and their
  // values.
  std::span<const std::uint32_t> column_rows(std::size_t k) const {
    return std::span<const std::uint32_t>(col_rows_).subspan(
        col_start_[k], col_start_[k + 1] - col_start_[k]);
  }
  std::span<const double> column_values(std::size_t k) const {
    return std::span<const double>(col_values_).subspan(
        col_start_[k], col_start_[k + 1] - col_start_[k]);
  }

 private:
  std::size_t features_ = 0;
  std::vector<double> inputs_;
  std::vector<int> labels_;
  std::vector<std::uint32_t> nonzero_;
  std::vector<double> nonzero_values_;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::uint32_t> touched_;
  std::vector<std::size_t> col_start_{0};
  std::vector<std::uint32_t> col_rows_;
  std::vector<double> col_values_;
};

// softmax(x W + b) per row, max-subtracted.
Matrix forward(const ModelParams& params, const Batch& batch,
               Exec exec = Exec::kSerial);

// Mean cross-entropy of the true labels.
double loss(const ModelParams& params, const Batch& batch,
            Exec exec = Exec::kSerial);

Gradient gradient(const ModelParams& params, const Batch& batch,
                  Exec exec = Exec::kSerial);

ModelParams sgd_step(const ModelParams& params, const Gradient& grad,
                     double eta);

// In-place variant used by the training loop.
void sgd_step_inplace(ModelParams& params, const Gradient& grad, double eta);

// One minibatch step, bit-identical to
// sgd_step_inplace(params, gradient(params, batch, exec), eta) but only
// touches the rows of W that the batch activates.
void train_step(ModelParams& params, const Batch& batch, double eta,
                Exec exec = Exec::kSerial);

double accuracy(const ModelParams& params, const Batch& batch,
                Exec exec = Exec::kSerial);

double param_distance(const ModelParams& a, const ModelParams& b);

bool all_finite(const ModelParams& params);

}  // namespace fedar::numcore
