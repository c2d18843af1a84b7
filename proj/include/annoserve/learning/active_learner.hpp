#pragma once

#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/config.hpp"
#include "annoserve/instance.hpp"
#include "annoserve/learning/classifier.hpp"

namespace annoserve::learning {

/// Result of one training round: the model and its confidence for every
/// instance in the store.
struct PlanUpdate {
  std::size_t round = 0;
  std::shared_ptr<const Classifier> model;
  std::unordered_map<std::string, double> confidence;
};

/// Collects main-task labels for the target scheme and retrains off the
/// request path. Completed rounds are handed to a sink, which swaps each
/// annotator's unannotated suffix.
class ActiveLearner {
 public:
  using Sink = std::function<void(const PlanUpdate&)>;

  /// `background` runs training on a worker thread; otherwise record()
  /// trains inline (tests).
  ActiveLearner(const TaskConfig& config, const InstanceStore& store, bool background,
                std::filesystem::path model_path);
  ~ActiveLearner();
  ActiveLearner(const ActiveLearner&) = delete;
  ActiveLearner& operator=(const ActiveLearner&) = delete;

  void set_sink(Sink sink);

  /// Stores the latest label of `user` for `instance_id`. A first submission
  /// advances the counter and may trigger a retrain. Attention items must not
  /// be passed here.
  void record(const std::string& user, const std::string& instance_id, const nlohmann::json& target_value,
              bool first_submission);

  /// Loads a recovered label without triggering training.
  void restore(const std::string& user, const std::string& instance_id, const nlohmann::json& target_value);

  /// Blocks until no retrain is pending or running.
  void wait_idle();

  std::shared_ptr<const PlanUpdate> latest() const;
  std::size_t rounds() const;
  std::size_t label_count() const;
  std::size_t first_submissions() const;

  /// Trains on the current labels and computes confidences; empty when the
  /// data cannot support a model yet (one class only).
  std::shared_ptr<PlanUpdate> train_now();

 private:
  void worker_loop();
  void run_round();

  const TaskConfig& config_;
  const InstanceStore& store_;
  const AnnotationScheme* target_ = nullptr;
  std::vector<FeatureVector> features_;  // per instance, store order
  std::filesystem::path model_path_;
  bool background_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::pair<std::string, std::string>, nlohmann::json> labels_;  // (user, instance) -> value
  std::size_t first_submissions_ = 0;
  bool pending_ = false;
  bool running_ = false;
  bool stop_ = false;
  std::size_t rounds_ = 0;
  std::shared_ptr<const PlanUpdate> latest_;
  Sink sink_;
  std::thread worker_;
};

/// Text fed to featurize for an instance: its text documents joined by
/// newlines.
std::string instance_text(const Instance& instance);

}  // namespace annoserve::learning
