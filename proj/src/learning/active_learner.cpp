#include "annoserve/learning/active_learner.hpp"

#include <iostream>

#include "annoserve/persistence.hpp"

namespace annoserve::learning {

std::string instance_text(const Instance& instance) {
  std::string out;
  for (const auto& d : instance.documents) {
    if (d.kind != DocumentKind::text) continue;
    if (!out.empty()) out.push_back('\n');
    out += d.payload;
  }
  return out;
}

ActiveLearner::ActiveLearner(const TaskConfig& config, const InstanceStore& store, bool background,
                             std::filesystem::path model_path)
    : config_(config), store_(store), model_path_(std::move(model_path)), background_(background) {
  if (config_.active_learning) target_ = config_.find_scheme(config_.active_learning->target_scheme);
  features_.reserve(store_.size());
  for (const auto& inst : store_.all()) features_.push_back(featurize(instance_text(inst)));
  if (background_) worker_ = std::thread([this] { worker_loop(); });
}

ActiveLearner::~ActiveLearner() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void ActiveLearner::set_sink(Sink sink) {
  std::lock_guard lock(mu_);
  sink_ = std::move(sink);
}

void ActiveLearner::restore(const std::string& user, const std::string& instance_id,
                            const nlohmann::json& target_value) {
  std::lock_guard lock(mu_);
  labels_[{user, instance_id}] = target_value;
  ++first_submissions_;
}

void ActiveLearner::record(const std::string& user, const std::string& instance_id,
                           const nlohmann::json& target_value, bool first_submission) {
  if (!config_.active_learning || !target_) return;
  bool trigger = false;
  {
    std::lock_guard lock(mu_);
    labels_[{user, instance_id}] = target_value;
    if (first_submission) {
      ++first_submissions_;
      const auto& al = *config_.active_learning;
      trigger = first_submissions_ % static_cast<std::size_t>(al.retrain_every) == 0 &&
                first_submissions_ >= static_cast<std::size_t>(al.min_labels_to_start);
    }
    if (trigger && background_) pending_ = true;
  }
  if (!trigger) return;
  if (background_) {
    cv_.notify_all();
  } else {
    run_round();
  }
}

void ActiveLearner::wait_idle() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !pending_ && !running_; });
}

std::shared_ptr<const PlanUpdate> ActiveLearner::latest() const {
  std::lock_guard lock(mu_);
  return latest_;
}

std::size_t ActiveLearner::rounds() const {
  std::lock_guard lock(mu_);
  return rounds_;
}

std::size_t ActiveLearner::label_count() const {
  std::lock_guard lock(mu_);
  return labels_.size();
}

std::size_t ActiveLearner::first_submissions() const {
  std::lock_guard lock(mu_);
  return first_submissions_;
}

void ActiveLearner::worker_loop() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [&] { return stop_ || pending_; });
    if (stop_) return;
    pending_ = false;
    running_ = true;
    lock.unlock();
    try {
      run_round();
    } catch (const std::exception& e) {
      std::cerr << "active learning: training failed, keeping previous order: " << e.what() << "\n";
    }
    lock.lock();
    running_ = false;
    cv_.notify_all();
  }
}

std::shared_ptr<PlanUpdate> ActiveLearner::train_now() {
  if (!target_) return nullptr;
  std::map<std::pair<std::string, std::string>, nlohmann::json> labels;
  {
    std::lock_guard lock(mu_);
    labels = labels_;
  }
  std::shared_ptr<const Classifier> model;
  if (target_->kind == SchemeKind::multiselect) {
    std::vector<std::pair<FeatureVector, std::vector<std::string>>> examples;
    for (const auto& [key, value] : labels) {
      const auto idx = store_.index_of(key.second);
      if (idx >= store_.size() || !value.is_array()) continue;
      examples.emplace_back(features_[idx], value.get<std::vector<std::string>>());
    }
    std::vector<std::string> classes;
    for (const auto& o : target_->options) classes.push_back(o.value);
    auto clf = OneVsRestClassifier::train(examples, classes);
    if (clf) model = std::make_shared<OneVsRestClassifier>(std::move(*clf));
  } else {
    std::vector<Example> examples;
    for (const auto& [key, value] : labels) {
      const auto idx = store_.index_of(key.second);
      if (idx >= store_.size() || !value.is_string()) continue;
      examples.push_back({features_[idx], value.get<std::string>()});
    }
    const auto previous = latest();
    const auto* warm = previous ? dynamic_cast<const LogisticRegression*>(previous->model.get()) : nullptr;
    auto clf = LogisticRegression::train(examples, {}, warm);
    if (clf) model = std::make_shared<LogisticRegression>(std::move(*clf));
  }
  // single-class data: no model, queue keeps its prior order
  if (!model) return nullptr;
  auto update = std::make_shared<PlanUpdate>();
  update->model = model;
  const auto conf = model->confidence_batch(features_, config_.active_learning->confidence);
  for (std::size_t i = 0; i < store_.size(); ++i) update->confidence[store_.all()[i].id] = conf[i];
  return update;
}

void ActiveLearner::run_round() {
  auto update = train_now();
  if (!update) return;
  Sink sink;
  {
    std::lock_guard lock(mu_);
    update->round = ++rounds_;
    latest_ = update;
    sink = sink_;
  }
  if (!model_path_.empty()) write_file_atomic(model_path_, update->model->snapshot());
  if (sink) sink(*update);
}

}  // namespace annoserve::learning
