#include "annoserve/learning/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace annoserve::learning {

double confidence_of(std::span<const double> p, ConfidenceMeasure measure) {
  if (p.empty()) return 1.0;
  switch (measure) {
    case ConfidenceMeasure::least_confidence:
      return *std::max_element(p.begin(), p.end());
    case ConfidenceMeasure::margin: {
      if (p.size() < 2) return 1.0;
      double first = -1.0;
      double second = -1.0;
      for (const double v : p) {
        if (v > first) {
          second = first;
          first = v;
        } else if (v > second) {
          second = v;
        }
      }
      return first - second;
    }
    case ConfidenceMeasure::entropy: {
      if (p.size() < 2) return 1.0;
      double h = 0.0;
      for (const double v : p) {
        if (v > 0.0) h -= v * std::log(v);
      }
      return 1.0 - h / std::log(static_cast<double>(p.size()));
    }
  }
  return 1.0;
}

double binary_confidence(double p, ConfidenceMeasure measure) {
  const double pair[2] = {p, 1.0 - p};
  return confidence_of(pair, measure);
}

namespace {

// Parameters and gradients as one flat vector: weights then bias.
std::vector<double> flat_params(const LinearModel& m) {
  std::vector<double> x(m.weights);
  x.insert(x.end(), m.bias.begin(), m.bias.end());
  return x;
}

void set_params(LinearModel& m, const std::vector<double>& x) {
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m.weights.size()), m.weights.begin());
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(m.weights.size()), x.end(), m.bias.begin());
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
#pragma omp simd reduction(max : m)
  for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

}  // namespace

// L-BFGS with Armijo backtracking. The objective is strictly convex for
// l2 > 0, so curvature pairs with s.y <= 0 only come from rounding and are
// skipped. Pairs live in a ring buffer; all work vectors are reused.
LinearModel fit_linear_model(std::span<const SparseRow> rows, std::span<const std::size_t> labels, std::size_t classes,
                             std::size_t dims, const TrainOptions& options, std::size_t* iterations,
                             const LinearModel* start) {
  constexpr std::size_t kHistory = 7;
  LinearModel model(classes, dims);
  if (start && start->classes == classes && start->dims == dims) model = *start;
  const std::size_t size = model.weights.size() + model.bias.size();
  auto evaluate = [&](const std::vector<double>& x, std::vector<double>& grad) {
    set_params(model, x);
    const auto lg = kernels::loss_and_gradient(model, rows, labels, options.l2);
    std::copy(lg.grad_weights.begin(), lg.grad_weights.end(), grad.begin());
    std::copy(lg.grad_bias.begin(), lg.grad_bias.end(), grad.begin() + static_cast<std::ptrdiff_t>(lg.grad_weights.size()));
    return lg.loss;
  };

  // Lipschitz bound of the gradient (log-sum-exp Hessian <= I/2) scales the
  // first step: L <= 0.5 * sum_i (||x_i||^2 + 1) + l2.
  double lipschitz = options.l2;
  for (const auto& r : rows) {
    double sq = 1.0;
    for (const double v : r.values) sq += v * v;
    lipschitz += 0.5 * sq;
  }
  const double first_scale = 1.0 / std::max(lipschitz, 1e-12);

  std::vector<double> x = flat_params(model), g(size), x_new(size), g_new(size), d(size);
  double loss = evaluate(x, g);
  std::vector<std::vector<double>> s_ring(kHistory, std::vector<double>(size)), y_ring(s_ring);
  std::vector<double> rho(kHistory), alpha(kHistory);
  std::size_t stored = 0, newest = 0;  // ring holds `stored` pairs ending at `newest`
  auto slot = [&](std::size_t age) { return (newest + kHistory - age) % kHistory; };  // age 0 = newest

  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (max_abs(g) < options.gradient_tolerance) break;

    // two-loop recursion: d = -H g
    d = g;
    for (std::size_t age = 0; age < stored; ++age) {
      const auto k = slot(age);
      alpha[k] = rho[k] * dot(s_ring[k], d);
      const auto& y = y_ring[k];
      #pragma omp simd
      for (std::size_t i = 0; i < size; ++i) d[i] -= alpha[k] * y[i];
    }
    const double gamma = stored == 0 ? first_scale
                                     : dot(s_ring[newest], y_ring[newest]) / dot(y_ring[newest], y_ring[newest]);
    for (auto& v : d) v *= gamma;
    for (std::size_t age = stored; age-- > 0;) {
      const auto k = slot(age);
      const double beta = rho[k] * dot(y_ring[k], d);
      const auto& sv = s_ring[k];
      #pragma omp simd
      for (std::size_t i = 0; i < size; ++i) d[i] += (alpha[k] - beta) * sv[i];
    }
    for (auto& v : d) v = -v;
    double slope = dot(g, d);
    if (!(slope < 0.0)) {  // lost descent: restart from the scaled gradient
      stored = 0;
      for (std::size_t i = 0; i < size; ++i) d[i] = -g[i] * first_scale;
      slope = dot(g, d);
    }

    double step = 1.0, loss_new = 0.0;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      #pragma omp simd
      for (std::size_t i = 0; i < size; ++i) x_new[i] = x[i] + step * d[i];
      loss_new = evaluate(x_new, g_new);
      if (std::isfinite(loss_new) && loss_new <= loss + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no progress possible at machine precision

    const auto next = stored == 0 ? newest : (newest + 1) % kHistory;
    auto& sv = s_ring[next];
    auto& yv = y_ring[next];
    for (std::size_t i = 0; i < size; ++i) {
      sv[i] = x_new[i] - x[i];
      yv[i] = g_new[i] - g[i];
    }
    const double sy = dot(sv, yv);
    if (sy > 1e-12 * std::max(1.0, dot(yv, yv))) {
      rho[next] = 1.0 / sy;
      newest = next;
      stored = std::min(stored + 1, kHistory);
    }
    const bool stalled = loss - loss_new <= 1e-15 * std::max(1.0, std::abs(loss));
    std::swap(x, x_new);
    std::swap(g, g_new);
    loss = loss_new;
    if (stalled && max_abs(g) < 1e3 * options.gradient_tolerance) break;
  }
  set_params(model, x);
  if (iterations) *iterations = iter;
  return model;
}

LogisticRegression::LogisticRegression(std::vector<std::string> labels, Vocabulary vocab, LinearModel model,
                                       std::size_t trained_on)
    : labels_(std::move(labels)), vocab_(std::move(vocab)), model_(std::move(model)), trained_on_(trained_on) {}

std::optional<LogisticRegression> LogisticRegression::train(const std::vector<Example>& examples,
                                                            const TrainOptions& options,
                                                            const LogisticRegression* warm_start) {
  std::set<std::string> label_set;
  for (const auto& e : examples) label_set.insert(e.label);
  if (label_set.size() < 2) return std::nullopt;

  LogisticRegression lr;
  lr.labels_.assign(label_set.begin(), label_set.end());
  std::vector<FeatureVector> features;
  features.reserve(examples.size());
  for (const auto& e : examples) features.push_back(e.features);
  lr.vocab_ = Vocabulary::build(features);

  std::vector<SparseRow> rows;
  std::vector<std::size_t> y;
  rows.reserve(examples.size());
  y.reserve(examples.size());
  for (const auto& e : examples) {
    rows.push_back(lr.vocab_.encode(e.features));
    y.push_back(static_cast<std::size_t>(std::lower_bound(lr.labels_.begin(), lr.labels_.end(), e.label) -
                                         lr.labels_.begin()));
  }
  std::optional<LinearModel> start;
  if (warm_start && warm_start->labels_ == lr.labels_) {
    // both term lists are sorted: merge-walk to copy shared columns
    start.emplace(lr.labels_.size(), lr.vocab_.size());
    const auto& old_terms = warm_start->vocab_.terms();
    const auto& new_terms = lr.vocab_.terms();
    const auto& old_model = warm_start->model_;
    for (std::size_t i = 0, j = 0; i < old_terms.size() && j < new_terms.size();) {
      if (old_terms[i] < new_terms[j]) {
        ++i;
      } else if (new_terms[j] < old_terms[i]) {
        ++j;
      } else {
        for (std::size_t c = 0; c < start->classes; ++c) {
          start->weights[c * start->dims + j] = old_model.weights[c * old_model.dims + i];
        }
        ++i;
        ++j;
      }
    }
    start->bias = old_model.bias;
  }
  lr.model_ = fit_linear_model(rows, y, lr.labels_.size(), lr.vocab_.size(), options, &lr.iterations_,
                               start ? &*start : nullptr);
  lr.trained_on_ = examples.size();
  return lr;
}

std::vector<double> LogisticRegression::predict_proba(const FeatureVector& x) const {
  const SparseRow row = vocab_.encode(x);
  std::vector<double> p(model_.classes);
  serial::predict_proba(model_, std::span<const SparseRow>(&row, 1), p);
  return p;
}

std::vector<double> LogisticRegression::confidence_batch(const std::vector<FeatureVector>& xs,
                                                         ConfidenceMeasure measure) const {
  std::vector<SparseRow> rows;
  rows.reserve(xs.size());
  for (const auto& x : xs) rows.push_back(vocab_.encode(x));
  std::vector<double> probs(xs.size() * model_.classes);
  kernels::predict_proba(model_, rows, probs);
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = confidence_of(std::span<const double>(probs.data() + i * model_.classes, model_.classes), measure);
  }
  return out;
}

std::string LogisticRegression::snapshot() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "annoserve-logreg 1\n";
  out << "trained_on " << trained_on_ << "\n";
  out << "classes " << labels_.size() << "\n";
  for (const auto& l : labels_) out << l << "\n";
  out << "vocabulary " << vocab_.size() << "\n";
  for (const auto& t : vocab_.terms()) out << t << "\n";
  out << "bias";
  for (const double b : model_.bias) out << ' ' << b;
  out << "\n";
  for (std::size_t c = 0; c < model_.classes; ++c) {
    out << "weights " << c;
    for (std::size_t j = 0; j < model_.dims; ++j) out << ' ' << model_.weights[c * model_.dims + j];
    out << "\n";
  }
  return out.str();
}

LogisticRegression LogisticRegression::from_snapshot(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int version = 0;
  auto expect = [&](const char* w) {
    if (!(in >> word) || word != w) throw std::runtime_error(std::string("model snapshot: expected '") + w + "'");
  };
  expect("annoserve-logreg");
  in >> version;
  if (version != 1) throw std::runtime_error("model snapshot: unsupported version");
  std::size_t trained = 0;
  std::size_t k = 0;
  std::size_t v = 0;
  expect("trained_on");
  in >> trained;
  expect("classes");
  in >> k;
  std::vector<std::string> labels(k);
  std::getline(in, word);
  for (auto& l : labels) std::getline(in, l);
  expect("vocabulary");
  in >> v;
  std::getline(in, word);
  std::vector<std::string> terms(v);
  for (auto& t : terms) std::getline(in, t);
  LinearModel model(k, v);
  expect("bias");
  for (auto& b : model.bias) in >> b;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t idx = 0;
    expect("weights");
    in >> idx;
    for (std::size_t j = 0; j < v; ++j) in >> model.weights[c * v + j];
  }
  if (!in) throw std::runtime_error("model snapshot: truncated");
  return LogisticRegression(std::move(labels), Vocabulary::from_terms(std::move(terms)), std::move(model), trained);
}

std::optional<OneVsRestClassifier> OneVsRestClassifier::train(
    const std::vector<std::pair<FeatureVector, std::vector<std::string>>>& examples,
    const std::vector<std::string>& labels, const TrainOptions& options) {
  OneVsRestClassifier ovr;
  ovr.labels_ = labels;
  ovr.trained_on_ = examples.size();
  bool any = false;
  for (const auto& label : labels) {
    std::vector<Example> binary;
    binary.reserve(examples.size());
    std::size_t positives = 0;
    for (const auto& [x, set] : examples) {
      const bool has = std::find(set.begin(), set.end(), label) != set.end();
      positives += has ? 1 : 0;
      binary.push_back({x, has ? "1" : "0"});
    }
    auto model = LogisticRegression::train(binary, options);
    any = any || model.has_value();
    ovr.members_.push_back(std::move(model));
    ovr.constant_.push_back(examples.empty() ? 0.0 : static_cast<double>(positives) / examples.size());
  }
  if (!any) return std::nullopt;
  return ovr;
}

std::vector<double> OneVsRestClassifier::predict_proba(const FeatureVector& x) const {
  std::vector<double> out(labels_.size());
  for (std::size_t l = 0; l < labels_.size(); ++l) {
    if (members_[l]) {
      const auto p = members_[l]->predict_proba(x);
      out[l] = p[1];  // classes sorted: "0", "1"
    } else {
      out[l] = constant_[l];
    }
  }
  return out;
}

std::vector<double> OneVsRestClassifier::confidence_batch(const std::vector<FeatureVector>& xs,
                                                          ConfidenceMeasure measure) const {
  std::vector<double> out(xs.size(), 1.0);
  for (std::size_t l = 0; l < labels_.size(); ++l) {
    if (!members_[l]) continue;
    const auto c = members_[l]->confidence_batch(xs, measure);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::min(out[i], c[i]);
  }
  return out;
}

std::string OneVsRestClassifier::snapshot() const {
  std::ostringstream out;
  out << "annoserve-ovr 1\n";
  out << "trained_on " << trained_on_ << "\n";
  out << "labels " << labels_.size() << "\n";
  for (std::size_t l = 0; l < labels_.size(); ++l) {
    out << "label " << labels_[l] << "\n";
    if (members_[l]) {
      out << members_[l]->snapshot();
    } else {
      out << "constant " << std::setprecision(17) << constant_[l] << "\n";
    }
  }
  return out.str();
}

}  // namespace annoserve::learning
