#pragma once

// Inner loops of the numeric core. Each kernel has a serial reference and an
// OpenMP variant; the OpenMP variant splits work over independent outputs and
// keeps the per-output accumulation order of the reference, so the two agree
// bit for bit.

#include <cstddef>
#include <span>

#include "fedar/numcore.hpp"

namespace fedar::numcore::kernels {

// out[r][c] = softmax_c(bias[c] + sum_f x[r][f] * w[f][c])
void softmax_rows_serial(const ModelParams& params, const Batch& batch,
                         std::span<double> out);
void softmax_rows_omp(const ModelParams& params, const Batch& batch,
                      std::span<double> out);

// grad.w[f][c] = sum_r x[r][f] * delta[r][c];  grad.b[c] = sum_r delta[r][c]
void accumulate_gradient_serial(const Batch& batch,
                                std::span<const double> delta, Gradient& grad);
void accumulate_gradient_omp(const Batch& batch, std::span<const double> delta,
                             Gradient& grad);

}  // namespace fedar::numcore::kernels
