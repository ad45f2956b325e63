#include "numcore_kernels.hpp"

#include <algorithm>
#include <cmath>

namespace fedar::numcore::kernels {
namespace {

// Rows below this count are not worth a parallel region.
constexpr std::size_t kMinParallelRows = 64;
constexpr std::size_t kMinParallelFeatures = 128;

inline void softmax_row(const ModelParams& params, const Batch& batch,
                        std::size_t r, double* out) {
  const std::size_t classes = params.num_classes();
  const auto w = params.weights();
  const auto b = params.bias();
  const auto idx = batch.nonzero(r);
  const auto val = batch.nonzero_values(r);

  for (std::size_t c = 0; c < classes; ++c) out[c] = b[c];
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::uint32_t f = idx[k];
    const double xv = val[k];
    const double* wf = w.data() + static_cast<std::size_t>(f) * classes;
    for (std::size_t c = 0; c < classes; ++c) out[c] += xv * wf[c];
  }

  const double peak = *std::max_element(out, out + classes);
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    out[c] = std::exp(out[c] - peak);
    total += out[c];
  }
  for (std::size_t c = 0; c < classes; ++c) out[c] /= total;
}

}  // namespace

void softmax_rows_serial(const ModelParams& params, const Batch& batch,
                         std::span<double> out) {
  const std::size_t classes = params.num_classes();
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    softmax_row(params, batch, r, out.data() + r * classes);
  }
}

void softmax_rows_omp(const ModelParams& params, const Batch& batch,
                      std::span<double> out) {
  const std::size_t classes = params.num_classes();
  const auto rows = static_cast<std::ptrdiff_t>(batch.rows());
#pragma omp parallel for schedule(static) if (batch.rows() >= kMinParallelRows)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    softmax_row(params, batch, static_cast<std::size_t>(r),
                out.data() + static_cast<std::size_t>(r) * classes);
  }
}

void accumulate_gradient_serial(const Batch& batch,
                                std::span<const double> delta, Gradient& grad) {
  const std::size_t classes = grad.num_classes();
  auto w = grad.weights();
  auto b = grad.bias();
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto idx = batch.nonzero(r);
    const auto val = batch.nonzero_values(r);
    const double* d = delta.data() + r * classes;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::uint32_t f = idx[k];
      const double xv = val[k];
      double* wf = w.data() + static_cast<std::size_t>(f) * classes;
      for (std::size_t c = 0; c < classes; ++c) wf[c] += xv * d[c];
    }
    for (std::size_t c = 0; c < classes; ++c) b[c] += d[c];
  }
}

void accumulate_gradient_omp(const Batch& batch, std::span<const double> delta,
                             Gradient& grad) {
  const std::size_t classes = grad.num_classes();
  const std::size_t rows = batch.rows();
  const auto touched = batch.touched_features();
  const auto count = static_cast<std::ptrdiff_t>(touched.size());
  auto w = grad.weights();
  auto b = grad.bias();

  // Columns hold rows in ascending order, so every (f, c) cell sums in the
  // same order as the serial kernel.
#pragma omp parallel for schedule(static) \
    if (touched.size() >= kMinParallelFeatures && rows >= 8)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    double* wf = w.data() + static_cast<std::size_t>(touched[kk]) * classes;
    const auto col_rows = batch.column_rows(kk);
    const auto col_values = batch.column_values(kk);
    for (std::size_t i = 0; i < col_rows.size(); ++i) {
      const double xv = col_values[i];
      const double* d = delta.data() + std::size_t{col_rows[i]} * classes;
      for (std::size_t c = 0; c < classes; ++c) wf[c] += xv * d[c];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double* d = delta.data() + r * classes;
    for (std::size_t c = 0; c < classes; ++c) b[c] += d[c];
  }
}

}  // namespace fedar::numcore::kernels
