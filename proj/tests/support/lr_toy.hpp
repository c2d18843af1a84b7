#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "annoserve/learning/classifier.hpp"

namespace annoserve::testing {

struct OracleRow {
  std::string text;
  std::string label;      // empty for held-out queries
  std::vector<double> p;  // neg, neu, pos
};

/// 20 training sentences then 5 held-out queries with scikit-learn
/// probabilities (tests/oracles/lr_reference.py).
const std::vector<OracleRow>& lr_oracle();

/// The first 20 oracle rows as training examples.
std::vector<learning::Example> toy_examples();
learning::LogisticRegression train_toy_model();

/// max |p - p_ref| over every oracle row and class.
double lr_oracle_max_error();

/// ||g_analytic - g_fd|| / max(||g_analytic||, ||g_fd||) on a random
/// 3-class problem, central differences with h = 1e-5.
double gradient_check_error(std::uint64_t seed);

}  // namespace annoserve::testing
