#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/config.hpp"
#include "annoserve/export.hpp"
#include "annoserve/instance.hpp"
#include "annoserve/persistence.hpp"
#include "annoserve/quality.hpp"
#include "annoserve/render.hpp"

namespace annoserve {

namespace learning {
class ActiveLearner;
struct PlanUpdate;
}  // namespace learning

enum class Stage { pre_survey, prestudy, main, blocked };
enum class AuthKind { password, url_argument };

std::string_view to_string(Stage s);
std::string_view to_string(AuthKind a);

/// Stored answer for one queue position.
struct ItemRecord {
  nlohmann::json labels = nlohmann::json::object();
  std::int64_t elapsed_ms = 0;  // summed over visits
  std::size_t revision = 0;     // number of accepted submissions
  std::int64_t first_received_at = 0;
  std::int64_t received_at = 0;
  std::optional<bool> attention_matched;  // attention items only
  bool operator==(const ItemRecord&) const = default;
};

/// Everything the server knows about one annotator. Rebuilt on restart by
/// folding logged events over the last snapshot.
struct UserState {
  std::string user_id;
  AuthKind auth = AuthKind::url_argument;
  std::string email;
  std::string salt;
  std::string password_hash;
  std::int64_t created_at = 0;

  Stage stage = Stage::main;
  std::vector<nlohmann::json> pre_answers;   // one per completed page
  std::vector<nlohmann::json> post_answers;
  std::vector<nlohmann::json> prestudy_answers;
  std::vector<bool> prestudy_correct;

  bool queue_assigned = false;
  std::vector<QueueEntry> queue;
  // Answers for positions [0, frontier). Submissions only ever land at or
  // before the frontier, so the annotated positions always form a prefix.
  std::vector<ItemRecord> annotations;
  std::size_t cursor = 0;
  QualityStatus qc;
  std::uint64_t seq = 0;  // last applied log record

  std::size_t frontier() const { return annotations.size(); }
  /// Accumulated active time per real instance id.
  std::map<std::string, std::int64_t> per_item_timing() const;

  bool operator==(const UserState&) const = default;
};

nlohmann::json to_json(const UserState& s);
UserState user_state_from_json(const nlohmann::json& j);

/// Folds one logged event into the state. Events carry every decision
/// (assigned queues, scores, timestamps) so replay needs no config.
void apply_event(UserState& state, const nlohmann::json& event);

/// Opaque per-position key the client echoes on submit. Depends on the
/// position and the entry there, so a reordered or stale page is detected.
std::string item_key(std::size_t position, const std::string& user_id, const QueueEntry& entry);

struct SubmitRequest {
  std::string item_key;
  nlohmann::json labels = nlohmann::json::object();
  std::int64_t elapsed_ms = 0;
  std::size_t revision = 0;  // revision the client was shown
};

enum class Direction { back, forward };

struct UserProgress {
  std::string user;
  std::string stage;
  std::size_t completed = 0;  // annotated real instances
  std::size_t total = 0;      // real instances in the queue
  std::string quality_state;
  int attention_failures = 0;
};

struct AdminProgress {
  std::vector<UserProgress> users;
  std::map<std::string, std::size_t> coverage;     // instance -> stored annotations
  std::map<std::string, std::size_t> assignments;  // instance -> queues holding it
  std::size_t total_annotations = 0;
  std::size_t attention_failures = 0;
  std::size_t flagged_users = 0;
  std::size_t blocked_users = 0;
};

nlohmann::json to_json(const AdminProgress& p);

struct SessionOptions {
  std::filesystem::path state_dir;  // defaults to <output_dir>/state
  bool background_learning = true;
  std::size_t snapshot_every = 50;
  int password_iterations = 100000;
  std::function<std::int64_t()> clock;  // ms since epoch; defaults to system clock
};

/// Accounts, queue assignment, the annotate loop and quality-control flow.
///
/// Every mutation of a user is one log record, appended and fsync'd under
/// that user's mutex before the in-memory state changes and before the
/// caller sees a result. Assignment counts are guarded by a separate global
/// lock taken only while a queue is built.
class SessionManager {
 public:
  SessionManager(const TaskConfig& config, InstanceStore store, SessionOptions options = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// Email mode: creates an account; returns the user id.
  std::string signup(const std::string& email, const std::string& password);
  std::string login_email(const std::string& email, const std::string& password);
  /// URL-argument mode: creates the user on first sight.
  std::string login_url(const std::string& worker_id);

  RenderModel current(const std::string& user_id);
  RenderModel submit(const std::string& user_id, const SubmitRequest& request);
  RenderModel navigate(const std::string& user_id, Direction direction);

  UserState state(const std::string& user_id) const;
  std::vector<std::string> user_ids() const;
  AdminProgress progress() const;
  AnnotationStore annotation_store() const;
  std::map<std::string, std::size_t> assignment_counts() const;

  /// Writes a snapshot for every user.
  void checkpoint();
  /// Waits for pending active-learning rounds.
  void wait_learning();
  learning::ActiveLearner* learner() { return learner_.get(); }

  const TaskConfig& config() const { return config_; }
  const InstanceStore& store() const { return store_; }
  const std::filesystem::path& state_dir() const { return options_.state_dir; }

 private:
  struct Slot {
    std::mutex mu;
    UserState state;
    std::unique_ptr<DurableLog> log;
    std::size_t since_snapshot = 0;
  };

  std::shared_ptr<Slot> find_slot(const std::string& user_id) const;
  std::shared_ptr<Slot> create_user(UserState init);
  void commit(const std::string& user_id, Slot& slot, std::vector<nlohmann::json> events);
  void write_snapshot(const std::string& user_id, Slot& slot);
  void settle(const std::string& user_id, Slot& slot);
  std::vector<QueueEntry> build_queue(const std::string& user_id);
  std::vector<QueueEntry> order_suffix(const std::string& user_id, const std::vector<QueueEntry>& suffix,
                                       const learning::PlanUpdate& plan) const;
  void apply_plan(const learning::PlanUpdate& plan);
  RenderModel render(const UserState& s) const;
  const Instance* entry_instance(const QueueEntry& entry) const;
  const GoldItem* attention_item(const std::string& id) const;
  std::int64_t now() const;
  void recover();

  const TaskConfig& config_;
  InstanceStore store_;
  SessionOptions options_;
  std::vector<Instance> prestudy_instances_;
  std::unordered_map<std::string, Instance> attention_instances_;

  mutable std::shared_mutex users_mu_;
  std::map<std::string, std::shared_ptr<Slot>> users_;

  mutable std::mutex assign_mu_;
  std::unordered_map<std::string, std::size_t> assigned_;

  std::unique_ptr<learning::ActiveLearner> learner_;
};

}  // namespace annoserve
