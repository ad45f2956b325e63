// Independent reference implementations used by the unit and acceptance
// tests. Everything here works in long double and shares no code with the
// library kernels.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "fedar/numcore.hpp"
#include "fedar/rng.hpp"

namespace oracle {

using fedar::numcore::Batch;
using fedar::numcore::ModelParams;

inline std::vector<long double> logits(const ModelParams& p, const Batch& b,
                                       std::size_t r) {
  const std::size_t classes = p.num_classes();
  std::vector<long double> z(classes);
  const auto x = b.row(r);
  for (std::size_t c = 0; c < classes; ++c) {
    long double acc = p.bias()[c];
    for (std::size_t f = 0; f < p.num_features(); ++f) {
      acc += static_cast<long double>(x[f]) * p.weight(f, c);
    }
    z[c] = acc;
  }
  return z;
}

inline std::vector<long double> softmax(std::vector<long double> z) {
  const long double peak = *std::max_element(z.begin(), z.end());
  long double total = 0;
  for (auto& v : z) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : z) v /= total;
  return z;
}

// -log softmax(z)[y] via log-sum-exp.
inline long double nll(const std::vector<long double>& z, int y) {
  const long double peak = *std::max_element(z.begin(), z.end());
  long double total = 0;
  for (const auto v : z) total += std::exp(v - peak);
  return peak + std::log(total) - z[static_cast<std::size_t>(y)];
}

inline long double loss(const ModelParams& p, const Batch& b) {
  long double total = 0;
  for (std::size_t r = 0; r < b.rows(); ++r) total += nll(logits(p, b, r), b.labels()[r]);
  return total / static_cast<long double>(b.rows());
}

inline double accuracy(const ModelParams& p, const Batch& b) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const auto z = logits(p, b, r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < z.size(); ++c) {
      if (z[c] > z[best]) best = c;
    }
    if (static_cast<int>(best) == b.labels()[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(b.rows());
}

// Central differences on the mean loss, h applied per parameter. Perturbing
// W[f][c] moves logit c of row r by h * x[r][f], so each probe only
// recomputes that shift instead of a whole forward pass.
inline std::vector<double> fd_gradient(const ModelParams& p, const Batch& b,
                                       double h) {
  const std::size_t classes = p.num_classes();
  const std::size_t features = p.num_features();
  const std::size_t rows = b.rows();
  std::vector<std::vector<long double>> z(rows);
  for (std::size_t r = 0; r < rows; ++r) z[r] = logits(p, b, r);

  const auto shifted = [&](std::size_t c, auto&& delta_of_row) {
    long double plus = 0, minus = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const long double d = delta_of_row(r);
      auto zr = z[r];
      zr[c] += d;
      plus += nll(zr, b.labels()[r]);
      zr[c] -= 2 * d;
      minus += nll(zr, b.labels()[r]);
    }
    return static_cast<double>((plus - minus) /
                               (2 * static_cast<long double>(h) * rows));
  };

  std::vector<double> g(p.size(), 0.0);
  for (std::size_t f = 0; f < features; ++f) {
    bool any = false;
    for (std::size_t r = 0; r < rows; ++r) any = any || b.row(r)[f] != 0.0;
    if (!any) continue;  // loss does not depend on this row of W
    for (std::size_t c = 0; c < classes; ++c) {
      g[f * classes + c] = shifted(c, [&](std::size_t r) {
        return static_cast<long double>(h) * b.row(r)[f];
      });
    }
  }
  for (std::size_t c = 0; c < classes; ++c) {
    g[features * classes + c] =
        shifted(c, [&](std::size_t) { return static_cast<long double>(h); });
  }
  return g;
}

inline double relative_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// Random classifier and batch; about a third of the inputs are exactly 0.
inline ModelParams random_params(fedar::Rng& rng, std::size_t features,
                                 std::size_t classes, double sd = 0.1) {
  ModelParams p(features, classes);
  std::normal_distribution<double> n(0.0, sd);
  for (double& v : p.flat()) v = n(rng);
  return p;
}

inline Batch random_batch(fedar::Rng& rng, std::size_t rows,
                          std::size_t features, int classes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, classes - 1);
  std::vector<double> x(rows * features);
  for (double& v : x) {
    const double draw = u(rng);
    v = draw < 0.33 ? 0.0 : u(rng);
  }
  std::vector<int> y(rows);
  for (int& v : y) v = label(rng);
  return Batch(features, std::move(x), std::move(y));
}

}  // namespace oracle
