#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "annoserve/learning/features.hpp"

namespace annoserve::learning {

/// Multinomial linear model: logits_k = bias_k + sum_j weights[k * dims + j] * x_j.
struct LinearModel {
  std::size_t classes = 0;
  std::size_t dims = 0;
  std::vector<double> weights;  // classes x dims, row-major
  std::vector<double> bias;     // classes

  LinearModel() = default;
  LinearModel(std::size_t k, std::size_t d) : classes(k), dims(d), weights(k * d, 0.0), bias(k, 0.0) {}
};

/// Objective: sum_i -log softmax(W x_i + b)_{y_i} + (l2 / 2) * ||W||^2.
/// The bias is not penalised.
struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;  // classes x dims
  std::vector<double> grad_bias;     // classes
};

// OpenMP kernels. Reductions combine per-thread partials in thread order, so
// results are deterministic for a fixed thread count and agree with the
// serial reference to rounding.
namespace kernels {

/// Row-major N x classes probabilities.
void predict_proba(const LinearModel& model, std::span<const SparseRow> rows, std::span<double> out);

LossGradient loss_and_gradient(const LinearModel& model, std::span<const SparseRow> rows,
                               std::span<const std::size_t> labels, double l2);

}  // namespace kernels

// Straight-line single-threaded reference implementations, kept for testing
// the parallel kernels and as the benchmark baseline.
namespace serial {

void predict_proba(const LinearModel& model, std::span<const SparseRow> rows, std::span<double> out);

LossGradient loss_and_gradient(const LinearModel& model, std::span<const SparseRow> rows,
                               std::span<const std::size_t> labels, double l2);

}  // namespace serial

/// Numerically stable in-place softmax.
void softmax(std::span<double> logits);

}  // namespace annoserve::learning
