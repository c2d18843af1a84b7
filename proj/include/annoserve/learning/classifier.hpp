#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "annoserve/config.hpp"
#include "annoserve/learning/features.hpp"
#include "annoserve/learning/kernels.hpp"

namespace annoserve::learning {

/// Pluggable model interface used by queue reordering. Higher confidence
/// means the model is surer; the least confident items are shown first.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const std::vector<std::string>& class_labels() const = 0;
  virtual std::vector<double> predict_proba(const FeatureVector& x) const = 0;
  virtual std::vector<double> confidence_batch(const std::vector<FeatureVector>& xs,
                                               ConfidenceMeasure measure) const = 0;
  /// Number of labeled examples the model was fit on.
  virtual std::size_t trained_on() const = 0;
  /// Versioned plain-text snapshot of vocabulary and weights.
  virtual std::string snapshot() const = 0;
};

/// Confidence of one probability vector over mutually exclusive classes.
///   least_confidence: max_k p_k
///   margin:           p_(1) - p_(2)
///   entropy:          1 - H(p) / log K
double confidence_of(std::span<const double> probabilities, ConfidenceMeasure measure);

/// Confidence of an independent binary probability (one-vs-rest members).
double binary_confidence(double p, ConfidenceMeasure measure);

struct TrainOptions {
  double l2 = 1.0;
  std::size_t max_iterations = 2000;
  // stop once the largest absolute gradient entry falls below this
  double gradient_tolerance = 1e-6;
};

struct Example {
  FeatureVector features;
  std::string label;
};

/// Multinomial logistic regression, full-batch L-BFGS (7 curvature pairs)
/// with Armijo backtracking (c = 1e-4, halving). The first step is scaled by
/// 1 / (0.5 * sum_i (||x_i||^2 + 1) + l2). Stops when max |gradient| <
/// TrainOptions::gradient_tolerance or after max_iterations. Deterministic:
/// no sampling is involved, classes are sorted and vocabulary order is
/// lexicographic.
class LogisticRegression final : public Classifier {
 public:
  LogisticRegression() = default;

  /// Returns std::nullopt when fewer than two distinct classes are present.
  /// A `warm_start` model with the same classes seeds the weights of shared
  /// features; the optimum is unchanged, only fewer iterations are needed.
  static std::optional<LogisticRegression> train(const std::vector<Example>& examples,
                                                 const TrainOptions& options = {},
                                                 const LogisticRegression* warm_start = nullptr);

  /// Builds a model from explicit parameters (snapshots, tests).
  LogisticRegression(std::vector<std::string> labels, Vocabulary vocab, LinearModel model, std::size_t trained_on);

  const std::vector<std::string>& class_labels() const override { return labels_; }
  std::vector<double> predict_proba(const FeatureVector& x) const override;
  std::vector<double> confidence_batch(const std::vector<FeatureVector>& xs,
                                       ConfidenceMeasure measure) const override;
  std::size_t trained_on() const override { return trained_on_; }
  std::string snapshot() const override;
  static LogisticRegression from_snapshot(const std::string& text);

  const Vocabulary& vocabulary() const { return vocab_; }
  const LinearModel& model() const { return model_; }
  std::size_t iterations() const { return iterations_; }

 private:
  std::vector<std::string> labels_;
  Vocabulary vocab_;
  LinearModel model_;
  std::size_t trained_on_ = 0;
  std::size_t iterations_ = 0;
};

/// One binary logistic regression per label for multi-label targets.
/// predict_proba returns P(label present) per label (not a simplex);
/// confidence is the minimum over labels of the binary confidence.
class OneVsRestClassifier final : public Classifier {
 public:
  /// Each example's label set is given as its ChoiceSet values. Returns
  /// std::nullopt unless at least one label has both positive and negative
  /// examples.
  static std::optional<OneVsRestClassifier> train(const std::vector<std::pair<FeatureVector, std::vector<std::string>>>& examples,
                                                  const std::vector<std::string>& labels,
                                                  const TrainOptions& options = {});

  const std::vector<std::string>& class_labels() const override { return labels_; }
  std::vector<double> predict_proba(const FeatureVector& x) const override;
  std::vector<double> confidence_batch(const std::vector<FeatureVector>& xs,
                                       ConfidenceMeasure measure) const override;
  std::size_t trained_on() const override { return trained_on_; }
  std::string snapshot() const override;

 private:
  std::vector<std::string> labels_;
  // empty when the label was constant in training; `constant_` holds its rate
  std::vector<std::optional<LogisticRegression>> members_;
  std::vector<double> constant_;
  std::size_t trained_on_ = 0;
};

/// Fits the optimizer on pre-encoded rows, starting from `start` (same shape)
/// or from zero. Exposed for tests and benchmarks.
LinearModel fit_linear_model(std::span<const SparseRow> rows, std::span<const std::size_t> labels,
                             std::size_t classes, std::size_t dims, const TrainOptions& options,
                             std::size_t* iterations = nullptr, const LinearModel* start = nullptr);

}  // namespace annoserve::learning
