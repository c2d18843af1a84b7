#include "annoserve/session.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>

#include "annoserve/errors.hpp"
#include "annoserve/highlight.hpp"
#include "annoserve/learning/active_learner.hpp"
#include "annoserve/learning/reorder.hpp"
#include "annoserve/random.hpp"
#include "annoserve/security.hpp"
#include "annoserve/survey.hpp"
#include "annoserve/text.hpp"

namespace annoserve {

using nlohmann::json;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::pre_survey: return "pre_survey";
    case Stage::prestudy: return "prestudy";
    case Stage::main: return "main";
    case Stage::blocked: return "blocked";
  }
  return "main";
}

std::string_view to_string(AuthKind a) { return a == AuthKind::password ? "password" : "url_argument"; }

namespace {

Stage parse_stage(const std::string& s) {
  if (s == "pre_survey") return Stage::pre_survey;
  if (s == "prestudy") return Stage::prestudy;
  if (s == "blocked") return Stage::blocked;
  return Stage::main;
}

json entry_json(const QueueEntry& e) {
  return json::array({e.kind == QueueEntry::Kind::attention ? "a" : "i", e.id});
}

QueueEntry entry_from(const json& j) {
  return {j.at(0).get<std::string>() == "a" ? QueueEntry::Kind::attention : QueueEntry::Kind::instance,
          j.at(1).get<std::string>()};
}

json record_json(const ItemRecord& r) {
  json j{{"labels", r.labels},
         {"elapsed_ms", r.elapsed_ms},
         {"revision", r.revision},
         {"first_received_at", r.first_received_at},
         {"received_at", r.received_at}};
  if (r.attention_matched) j["attention_matched"] = *r.attention_matched;
  return j;
}

ItemRecord record_from(const json& j) {
  ItemRecord r;
  r.labels = j.at("labels");
  r.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
  r.revision = j.at("revision").get<std::size_t>();
  r.first_received_at = j.at("first_received_at").get<std::int64_t>();
  r.received_at = j.at("received_at").get<std::int64_t>();
  if (j.contains("attention_matched")) r.attention_matched = j.at("attention_matched").get<bool>();
  return r;
}

std::string normalize_email(std::string email) {
  const auto b = email.find_first_not_of(" \t");
  const auto e = email.find_last_not_of(" \t");
  email = b == std::string::npos ? std::string() : email.substr(b, e - b + 1);
  std::transform(email.begin(), email.end(), email.begin(), [](unsigned char c) { return std::tolower(c); });
  return email;
}

bool email_allowed(LoginMode m) { return m == LoginMode::email_signup || m == LoginMode::both; }
bool url_allowed(LoginMode m) { return m == LoginMode::url_argument || m == LoginMode::both; }

json errors_json(const std::vector<FieldError>& errors) {
  json arr = json::array();
  for (const auto& e : errors) arr.push_back({{"scheme", e.scheme}, {"message", e.message}});
  return {{"errors", arr}};
}

json ev(const char* type, json fields = json::object()) {
  fields["e"] = type;
  return fields;
}

std::string survey_key(bool pre, std::size_t page) { return std::string(pre ? "s-pre-" : "s-post-") + std::to_string(page); }
std::string prestudy_key(std::size_t i) { return "p-" + std::to_string(i); }

}  // namespace

std::map<std::string, std::int64_t> UserState::per_item_timing() const {
  std::map<std::string, std::int64_t> out;
  for (std::size_t i = 0; i < annotations.size() && i < queue.size(); ++i) {
    if (queue[i].kind == QueueEntry::Kind::instance) out[queue[i].id] += annotations[i].elapsed_ms;
  }
  return out;
}

json to_json(const UserState& s) {
  json queue = json::array();
  for (const auto& e : s.queue) queue.push_back(entry_json(e));
  json ann = json::array();
  for (const auto& r : s.annotations) ann.push_back(record_json(r));
  return {{"user_id", s.user_id},
          {"auth", std::string(to_string(s.auth))},
          {"email", s.email},
          {"salt", s.salt},
          {"password_hash", s.password_hash},
          {"created_at", s.created_at},
          {"stage", std::string(to_string(s.stage))},
          {"pre_answers", s.pre_answers},
          {"post_answers", s.post_answers},
          {"prestudy_answers", s.prestudy_answers},
          {"prestudy_correct", s.prestudy_correct},
          {"queue_assigned", s.queue_assigned},
          {"queue", queue},
          {"annotations", ann},
          {"cursor", s.cursor},
          {"qc",
           {{"prestudy", std::string(to_string(s.qc.prestudy))},
            {"attention_failures", s.qc.attention_failures},
            {"state", std::string(to_string(s.qc.state))}}},
          {"seq", s.seq}};
}

UserState user_state_from_json(const json& j) {
  UserState s;
  s.user_id = j.at("user_id").get<std::string>();
  s.auth = j.at("auth").get<std::string>() == "password" ? AuthKind::password : AuthKind::url_argument;
  s.email = j.at("email").get<std::string>();
  s.salt = j.at("salt").get<std::string>();
  s.password_hash = j.at("password_hash").get<std::string>();
  s.created_at = j.at("created_at").get<std::int64_t>();
  s.stage = parse_stage(j.at("stage").get<std::string>());
  s.pre_answers = j.at("pre_answers").get<std::vector<json>>();
  s.post_answers = j.at("post_answers").get<std::vector<json>>();
  s.prestudy_answers = j.at("prestudy_answers").get<std::vector<json>>();
  s.prestudy_correct = j.at("prestudy_correct").get<std::vector<bool>>();
  s.queue_assigned = j.at("queue_assigned").get<bool>();
  for (const auto& e : j.at("queue")) s.queue.push_back(entry_from(e));
  for (const auto& r : j.at("annotations")) s.annotations.push_back(record_from(r));
  s.cursor = j.at("cursor").get<std::size_t>();
  const auto& qc = j.at("qc");
  s.qc.prestudy = parse_prestudy_status(qc.at("prestudy").get<std::string>()).value_or(PrestudyStatus::not_required);
  s.qc.attention_failures = qc.at("attention_failures").get<int>();
  s.qc.state = parse_quality_state(qc.at("state").get<std::string>()).value_or(QualityState::active);
  s.seq = j.at("seq").get<std::uint64_t>();
  return s;
}

void apply_event(UserState& s, const json& e) {
  const auto type = e.at("e").get<std::string>();
  if (type == "init") {
    s.user_id = e.at("user_id").get<std::string>();
    s.auth = e.at("auth").get<std::string>() == "password" ? AuthKind::password : AuthKind::url_argument;
    s.email = e.value("email", "");
    s.salt = e.value("salt", "");
    s.password_hash = e.value("hash", "");
    s.created_at = e.at("created_at").get<std::int64_t>();
    s.stage = parse_stage(e.at("stage").get<std::string>());
    s.qc.prestudy = parse_prestudy_status(e.at("prestudy").get<std::string>()).value_or(PrestudyStatus::not_required);
  } else if (type == "stage") {
    s.stage = parse_stage(e.at("stage").get<std::string>());
    if (s.stage == Stage::blocked) s.qc.state = QualityState::blocked;
  } else if (type == "survey") {
    auto& pages = e.at("phase").get<std::string>() == "pre" ? s.pre_answers : s.post_answers;
    pages.push_back(e.at("answers"));
  } else if (type == "prestudy") {
    s.prestudy_answers.push_back(e.at("answers"));
    s.prestudy_correct.push_back(e.at("correct").get<bool>());
  } else if (type == "prestudy_status") {
    s.qc.prestudy = parse_prestudy_status(e.at("status").get<std::string>()).value_or(s.qc.prestudy);
  } else if (type == "queue") {
    const auto from = e.at("from").get<std::size_t>();
    s.queue.resize(std::min(from, s.queue.size()));
    for (const auto& entry : e.at("entries")) s.queue.push_back(entry_from(entry));
    s.queue_assigned = true;
  } else if (type == "submit") {
    const auto pos = e.at("pos").get<std::size_t>();
    const auto t = e.at("received_at").get<std::int64_t>();
    if (pos == s.annotations.size()) {
      ItemRecord r;
      r.first_received_at = t;
      s.annotations.push_back(std::move(r));
    }
    auto& r = s.annotations.at(pos);
    r.labels = e.at("labels");
    r.elapsed_ms += e.at("elapsed_ms").get<std::int64_t>();
    r.received_at = t;
    ++r.revision;
  } else if (type == "attention") {
    s.annotations.at(e.at("pos").get<std::size_t>()).attention_matched = e.at("matched").get<bool>();
    s.qc.attention_failures = e.at("failures").get<int>();
    s.qc.state = parse_quality_state(e.at("state").get<std::string>()).value_or(s.qc.state);
  } else if (type == "cursor") {
    s.cursor = e.at("pos").get<std::size_t>();
  }
}

std::string item_key(std::size_t position, const std::string& user_id, const QueueEntry& entry) {
  const std::string tag = (entry.kind == QueueEntry::Kind::attention ? "a:" : "i:") + entry.id;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(derive_seed(position, user_id, tag)));
  return buf;
}

json to_json(const AdminProgress& p) {
  json users = json::array();
  for (const auto& u : p.users) {
    users.push_back({{"user", u.user},
                     {"stage", u.stage},
                     {"completed", u.completed},
                     {"total", u.total},
                     {"quality_state", u.quality_state},
                     {"attention_failures", u.attention_failures}});
  }
  return {{"users", users},
          {"coverage", p.coverage},
          {"assignments", p.assignments},
          {"total_annotations", p.total_annotations},
          {"attention",
           {{"failures", p.attention_failures}, {"flagged_users", p.flagged_users}, {"blocked_users", p.blocked_users}}}};
}

// ---------------------------------------------------------------------------

SessionManager::SessionManager(const TaskConfig& config, InstanceStore store, SessionOptions options)
    : config_(config), store_(std::move(store)), options_(std::move(options)) {
  const auto output_dir = config_.resolve(config_.server.output_dir);
  if (options_.state_dir.empty()) options_.state_dir = output_dir / "state";
  std::filesystem::create_directories(options_.state_dir / "users");
  if (const auto& qc = config_.quality_control) {
    if (qc->prestudy) {
      for (const auto& item : qc->prestudy->items) prestudy_instances_.push_back(gold_instance(item, config_));
    }
    if (qc->attention) {
      for (const auto& item : qc->attention->items) attention_instances_.emplace(item.id, gold_instance(item, config_));
    }
  }
  if (config_.active_learning) {
    learner_ = std::make_unique<learning::ActiveLearner>(config_, store_, options_.background_learning,
                                                         output_dir / "model_snapshot.txt");
  }
  recover();
  if (learner_) learner_->set_sink([this](const learning::PlanUpdate& plan) { apply_plan(plan); });
}

SessionManager::~SessionManager() {
  // the learner's worker calls back into this object
  learner_.reset();
}

std::int64_t SessionManager::now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void SessionManager::recover() {
  const auto users_dir = options_.state_dir / "users";
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(users_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const auto user_id = hex_unescape(dir.filename().string());
    if (!user_id) continue;
    auto slot = std::make_shared<Slot>();
    if (const auto snap = read_file(dir / "snapshot.json")) {
      const auto j = json::parse(*snap, nullptr, false);
      if (!j.is_discarded()) slot->state = user_state_from_json(j.at("state"));
    }
    for (const auto& record : DurableLog::read(dir / "log.jsonl")) {
      const auto seq = record.at("seq").get<std::uint64_t>();
      if (seq <= slot->state.seq) continue;
      for (const auto& e : record.at("events")) apply_event(slot->state, e);
      slot->state.seq = seq;
    }
    if (slot->state.user_id.empty()) continue;  // init never became durable
    slot->log = std::make_unique<DurableLog>(dir / "log.jsonl");
    for (const auto& e : slot->state.queue) {
      if (e.kind == QueueEntry::Kind::instance) ++assigned_[e.id];
    }
    if (learner_) {
      const auto& target = config_.active_learning->target_scheme;
      const auto& s = slot->state;
      for (std::size_t i = 0; i < s.annotations.size() && i < s.queue.size(); ++i) {
        if (s.queue[i].kind != QueueEntry::Kind::instance) continue;
        const auto it = s.annotations[i].labels.find(target);
        if (it != s.annotations[i].labels.end()) learner_->restore(s.user_id, s.queue[i].id, *it);
      }
    }
    users_.emplace(*user_id, std::move(slot));
  }
}

std::shared_ptr<SessionManager::Slot> SessionManager::find_slot(const std::string& user_id) const {
  std::shared_lock lock(users_mu_);
  const auto it = users_.find(user_id);
  return it == users_.end() ? nullptr : it->second;
}

void SessionManager::write_snapshot(const std::string& user_id, Slot& slot) {
  const json snap{{"seq", slot.state.seq}, {"state", to_json(slot.state)}};
  write_file_atomic(options_.state_dir / "users" / hex_escape(user_id) / "snapshot.json", snap.dump());
  slot.since_snapshot = 0;
}

void SessionManager::commit(const std::string& user_id, Slot& slot, std::vector<json> events) {
  if (events.empty()) return;
  const auto seq = slot.state.seq + 1;
  json record{{"seq", seq}, {"t", now()}, {"events", events}};
  slot.log->append(record);  // durable before anything observes it
  for (const auto& e : events) apply_event(slot.state, e);
  slot.state.seq = seq;
  if (++slot.since_snapshot >= options_.snapshot_every) write_snapshot(user_id, slot);
}

std::shared_ptr<SessionManager::Slot> SessionManager::create_user(UserState init) {
  const auto user_id = init.user_id;
  std::unique_lock lock(users_mu_);
  if (const auto it = users_.find(user_id); it != users_.end()) return it->second;
  auto slot = std::make_shared<Slot>();
  slot->log = std::make_unique<DurableLog>(options_.state_dir / "users" / hex_escape(user_id) / "log.jsonl");
  const auto& qc = config_.quality_control;
  const bool has_pre = qc && !qc->pre_surveys.empty();
  const bool has_prestudy = qc && qc->prestudy && !qc->prestudy->items.empty();
  json e = ev("init");
  e["user_id"] = user_id;
  e["auth"] = std::string(to_string(init.auth));
  e["email"] = init.email;
  e["salt"] = init.salt;
  e["hash"] = init.password_hash;
  e["created_at"] = now();
  e["stage"] = has_pre ? "pre_survey" : (has_prestudy ? "prestudy" : "main");
  e["prestudy"] = has_prestudy ? "pending" : "not_required";
  std::lock_guard slot_lock(slot->mu);
  commit(user_id, *slot, {e});
  users_.emplace(user_id, slot);
  return slot;
}

std::string SessionManager::signup(const std::string& raw_email, const std::string& password) {
  if (!email_allowed(config_.login_mode)) throw ApiError(403, "login_mode", "email signup is not enabled for this task");
  const auto email = normalize_email(raw_email);
  const auto at = email.find('@');
  if (at == std::string::npos || at == 0 || at + 1 >= email.size()) {
    throw ApiError(422, "invalid", "a valid email address is required");
  }
  if (password.empty()) throw ApiError(422, "invalid", "password must not be empty");
  const auto user_id = "email:" + email;
  if (find_slot(user_id)) throw ApiError(409, "exists", "an account with this email already exists");
  UserState init;
  init.user_id = user_id;
  init.auth = AuthKind::password;
  init.email = email;
  init.salt = random_hex(16);
  init.password_hash = hash_password(password, init.salt, options_.password_iterations);
  auto slot = create_user(init);
  {
    std::lock_guard lock(slot->mu);
    if (slot->state.salt != init.salt) throw ApiError(409, "exists", "an account with this email already exists");
  }
  return user_id;
}

std::string SessionManager::login_email(const std::string& raw_email, const std::string& password) {
  if (!email_allowed(config_.login_mode)) throw ApiError(403, "login_mode", "email login is not enabled for this task");
  const auto user_id = "email:" + normalize_email(raw_email);
  auto slot = find_slot(user_id);
  if (!slot) throw ApiError(401, "unauthenticated", "unknown email or wrong password");
  std::lock_guard lock(slot->mu);
  if (!verify_password(password, slot->state.salt, slot->state.password_hash, options_.password_iterations)) {
    throw ApiError(401, "unauthenticated", "unknown email or wrong password");
  }
  auto& s = slot->state;
  if (s.stage == Stage::main && s.cursor != s.frontier()) commit(user_id, *slot, {ev("cursor", {{"pos", s.frontier()}})});
  settle(user_id, *slot);
  return user_id;
}

std::string SessionManager::login_url(const std::string& worker_id) {
  if (!url_allowed(config_.login_mode)) throw ApiError(403, "login_mode", "URL login is not enabled for this task");
  if (worker_id.empty()) throw ApiError(422, "invalid", "id must not be empty");
  const auto user_id = "url:" + worker_id;
  auto slot = find_slot(user_id);
  if (!slot) {
    UserState init;
    init.user_id = user_id;
    init.auth = AuthKind::url_argument;
    slot = create_user(init);
  }
  std::lock_guard lock(slot->mu);
  auto& s = slot->state;
  if (s.stage == Stage::main && s.cursor != s.frontier()) commit(user_id, *slot, {ev("cursor", {{"pos", s.frontier()}})});
  settle(user_id, *slot);
  return user_id;
}

// Applies the transitions implied by the current state until none is left:
// finished pre-surveys, a completed prestudy, and entry into the main task.
void SessionManager::settle(const std::string& user_id, Slot& slot) {
  for (;;) {
    const auto& s = slot.state;
    const auto& qc = config_.quality_control;
    if (s.stage == Stage::pre_survey) {
      if (qc && s.pre_answers.size() < qc->pre_surveys.size()) return;
      const bool prestudy = s.qc.prestudy == PrestudyStatus::pending;
      commit(user_id, slot, {ev("stage", {{"stage", prestudy ? "prestudy" : "main"}})});
      continue;
    }
    if (s.stage == Stage::prestudy) {
      if (!qc || !qc->prestudy) {
        commit(user_id, slot, {ev("stage", {{"stage", "main"}})});
        continue;
      }
      if (s.prestudy_answers.size() < qc->prestudy->items.size()) return;
      const auto result = score_prestudy(*qc->prestudy, s.prestudy_correct);
      if (result.passed) {
        commit(user_id, slot,
               {ev("prestudy_status", {{"status", "passed"}}), ev("stage", {{"stage", "main"}})});
      } else {
        commit(user_id, slot,
               {ev("prestudy_status", {{"status", "failed"}}), ev("stage", {{"stage", "blocked"}})});
      }
      continue;
    }
    if (s.stage == Stage::main && !s.queue_assigned) {
      std::lock_guard lock(assign_mu_);
      const auto queue = build_queue(user_id);
      json entries = json::array();
      for (const auto& e : queue) entries.push_back(entry_json(e));
      commit(user_id, slot, {ev("queue", {{"from", 0}, {"entries", entries}}), ev("cursor", {{"pos", 0}})});
      for (const auto& e : queue) {
        if (e.kind == QueueEntry::Kind::instance) ++assigned_[e.id];
      }
      continue;
    }
    return;
  }
}

// Caller holds assign_mu_.
std::vector<QueueEntry> SessionManager::build_queue(const std::string& user_id) {
  const auto& a = config_.assignment;
  const auto& all = store_.all();
  std::vector<std::size_t> picks;
  if (a.annotations_per_instance == 0) {
    for (std::size_t i = 0; i < all.size(); ++i) picks.push_back(i);
  } else {
    const auto quota = static_cast<std::size_t>(a.annotations_per_instance);
    std::vector<std::pair<std::size_t, std::size_t>> open;  // (count, index)
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto it = assigned_.find(all[i].id);
      const std::size_t count = it == assigned_.end() ? 0 : it->second;
      if (count < quota) open.emplace_back(count, i);
    }
    std::sort(open.begin(), open.end());
    for (const auto& [count, i] : open) picks.push_back(i);
  }
  if (a.max_instances_per_annotator && picks.size() > static_cast<std::size_t>(*a.max_instances_per_annotator)) {
    picks.resize(static_cast<std::size_t>(*a.max_instances_per_annotator));
  }
  std::sort(picks.begin(), picks.end());
  if (a.ordering == Ordering::random) {
    Rng rng(derive_seed(a.seed, user_id, "order"));
    shuffle_in_place(rng, picks);
  }
  std::vector<QueueEntry> queue;
  for (const auto i : picks) queue.push_back({QueueEntry::Kind::instance, all[i].id});
  if (a.ordering == Ordering::active_learning && learner_) {
    if (const auto plan = learner_->latest()) queue = order_suffix(user_id, queue, *plan);
  }
  const auto& qc = config_.quality_control;
  if (qc && qc->attention && !queue.empty()) {
    queue = insert_attention_tests(std::move(queue), *qc->attention, derive_seed(a.seed, user_id, "attention"));
  }
  return queue;
}

std::vector<QueueEntry> SessionManager::order_suffix(const std::string& user_id, const std::vector<QueueEntry>& suffix,
                                                     const learning::PlanUpdate& plan) const {
  std::vector<std::string> ids;
  std::vector<double> conf;
  for (const auto& e : suffix) {
    if (e.kind != QueueEntry::Kind::instance) continue;
    ids.push_back(e.id);
    const auto it = plan.confidence.find(e.id);
    conf.push_back(it == plan.confidence.end() ? 1.0 : it->second);
  }
  if (ids.empty()) return suffix;
  const auto& al = *config_.active_learning;
  const auto planned =
      learning::plan_queue(ids, conf, al.random_ratio, derive_seed(al.seed, user_id, "round-" + std::to_string(plan.round)));
  std::vector<QueueEntry> out = suffix;
  std::size_t next = 0;
  for (auto& e : out) {
    if (e.kind == QueueEntry::Kind::instance) e.id = planned.ids[next++];
  }
  return out;
}

void SessionManager::apply_plan(const learning::PlanUpdate& plan) {
  std::vector<std::pair<std::string, std::shared_ptr<Slot>>> slots;
  {
    std::shared_lock lock(users_mu_);
    slots.assign(users_.begin(), users_.end());
  }
  for (const auto& [user_id, slot] : slots) {
    std::lock_guard lock(slot->mu);
    const auto& s = slot->state;
    if (s.stage != Stage::main || !s.queue_assigned || s.frontier() >= s.queue.size()) continue;
    // everything from the frontier on is unannotated; the prefix never moves
    const std::vector<QueueEntry> suffix(s.queue.begin() + static_cast<std::ptrdiff_t>(s.frontier()), s.queue.end());
    const auto reordered = order_suffix(user_id, suffix, plan);
    if (reordered == suffix) continue;
    json entries = json::array();
    for (const auto& e : reordered) entries.push_back(entry_json(e));
    commit(user_id, *slot, {ev("queue", {{"from", s.frontier()}, {"entries", entries}})});
  }
}

const GoldItem* SessionManager::attention_item(const std::string& id) const {
  const auto& qc = config_.quality_control;
  if (!qc || !qc->attention) return nullptr;
  for (const auto& item : qc->attention->items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

const Instance* SessionManager::entry_instance(const QueueEntry& entry) const {
  if (entry.kind == QueueEntry::Kind::instance) return store_.find(entry.id);
  const auto it = attention_instances_.find(entry.id);
  return it == attention_instances_.end() ? nullptr : &it->second;
}

RenderModel SessionManager::render(const UserState& s) const {
  const auto& qc = config_.quality_control;
  auto highlights_for = [&](const Instance& inst) {
    return config_.highlight ? highlight_instance(inst, *config_.highlight, s.user_id) : std::vector<HighlightSpan>{};
  };
  RenderModel m;
  if (s.stage == Stage::blocked) {
    m.step = StepKind::blocked;
    m.instructions = config_.instructions;
    m.message = "Your participation in this task has ended.";
    return m;
  }
  if (s.stage == Stage::pre_survey) {
    const auto page = s.pre_answers.size();
    const auto& p = qc->pre_surveys.at(page);
    m = build_survey_model(config_, p.title, survey_questions(p), StepKind::pre_survey,
                           ProgressInfo::of(page, qc->pre_surveys.size()));
    m.item_key = survey_key(true, page);
    return m;
  }
  if (s.stage == Stage::prestudy) {
    const auto i = s.prestudy_answers.size();
    const auto& inst = prestudy_instances_.at(i);
    m = build_render_model(config_, inst, highlights_for(inst), ProgressInfo::of(i, prestudy_instances_.size()));
    m.step = StepKind::prestudy;
    m.item_key = prestudy_key(i);
    return m;
  }
  if (s.cursor < s.queue.size()) {
    const auto& entry = s.queue[s.cursor];
    const Instance* inst = entry_instance(entry);
    if (!inst) throw ApiError(500, "internal", "queue entry '" + entry.id + "' has no instance");
    m = build_render_model(config_, *inst, highlights_for(*inst), ProgressInfo::of(s.frontier(), s.queue.size()));
    m.item_key = item_key(s.cursor, s.user_id, entry);
    if (s.cursor < s.frontier()) {
      m.stored = s.annotations[s.cursor].labels;
      m.revision = s.annotations[s.cursor].revision;
    }
    m.can_back = s.cursor > 0;
    m.can_forward = s.cursor < s.frontier();
    return m;
  }
  const std::size_t post_pages = qc ? qc->post_surveys.size() : 0;
  if (s.post_answers.size() < post_pages) {
    const auto page = s.post_answers.size();
    const auto& p = qc->post_surveys.at(page);
    m = build_survey_model(config_, p.title, survey_questions(p), StepKind::post_survey,
                           ProgressInfo::of(page, post_pages));
    m.item_key = survey_key(false, page);
    m.can_back = page == 0 && !s.queue.empty();
    return m;
  }
  m.step = StepKind::done;
  m.instructions = config_.instructions;
  m.progress = ProgressInfo::of(s.frontier(), s.queue.size());
  m.message = config_.server.completion_code;
  m.can_back = post_pages == 0 && !s.queue.empty();
  return m;
}

RenderModel SessionManager::current(const std::string& user_id) {
  auto slot = find_slot(user_id);
  if (!slot) throw ApiError(401, "unauthenticated", "unknown user");
  std::lock_guard lock(slot->mu);
  settle(user_id, *slot);
  return render(slot->state);
}

RenderModel SessionManager::submit(const std::string& user_id, const SubmitRequest& req) {
  auto slot = find_slot(user_id);
  if (!slot) throw ApiError(401, "unauthenticated", "unknown user");
  struct LearnNote {
    std::string instance_id;
    json value;
    bool first;
  };
  std::optional<LearnNote> note;
  RenderModel out;
  {
    std::lock_guard lock(slot->mu);
    settle(user_id, *slot);
    auto& s = slot->state;
    if (s.stage == Stage::blocked) throw ApiError(403, "blocked", "this annotator is blocked");
    if (req.elapsed_ms < 0) throw ApiError(422, "invalid", "elapsed_ms must not be negative");
    const auto& qc = config_.quality_control;
    const auto stale = [] { return ApiError(409, "stale", "submission does not match the current item"); };

    // Replays of already-recorded submissions are acknowledged without effect.
    auto is_duplicate = [&]() {
      for (std::size_t i = 0; i < s.pre_answers.size(); ++i) {
        if (req.item_key == survey_key(true, i)) return true;
      }
      for (std::size_t i = 0; i < s.prestudy_answers.size(); ++i) {
        if (req.item_key == prestudy_key(i)) return true;
      }
      for (std::size_t i = 0; i < s.post_answers.size(); ++i) {
        if (req.item_key == survey_key(false, i)) return true;
      }
      for (std::size_t i = 0; i < s.frontier(); ++i) {
        if (req.item_key == item_key(i, user_id, s.queue[i])) return req.revision < s.annotations[i].revision;
      }
      return false;
    };

    const Instance no_instance;
    if (s.stage == Stage::pre_survey || (s.stage == Stage::main && s.cursor >= s.queue.size())) {
      const bool pre = s.stage == Stage::pre_survey;
      const auto page = pre ? s.pre_answers.size() : s.post_answers.size();
      static const std::vector<SurveyPage> kNoPages;
      const auto& pages = !qc ? kNoPages : (pre ? qc->pre_surveys : qc->post_surveys);
      if (page >= pages.size() || req.item_key != survey_key(pre, page)) {
        if (is_duplicate()) return render(s);
        throw stale();
      }
      const auto check = check_submission(survey_questions(pages[page]), req.labels, no_instance);
      if (!check.ok()) throw ApiError(422, "invalid", "survey answers failed validation", errors_json(check.errors));
      std::vector<json> events{
          ev("survey", {{"phase", pre ? "pre" : "post"}, {"page", page}, {"answers", encode_labels(check.labels)}})};
      if (consent_declined(pages[page], check.labels)) events.push_back(ev("stage", {{"stage", "blocked"}}));
      commit(user_id, *slot, std::move(events));
    } else if (s.stage == Stage::prestudy) {
      const auto i = s.prestudy_answers.size();
      if (req.item_key != prestudy_key(i)) {
        if (is_duplicate()) return render(s);
        throw stale();
      }
      const auto& inst = prestudy_instances_.at(i);
      const auto check = check_submission(config_.schemes, req.labels, inst);
      if (!check.ok()) throw ApiError(422, "invalid", "labels failed validation", errors_json(check.errors));
      const bool correct = labels_match(gold_answers(qc->prestudy->items.at(i), config_), check.labels);
      commit(user_id, *slot,
             {ev("prestudy", {{"index", i}, {"answers", encode_labels(check.labels)}, {"correct", correct}})});
    } else {
      const auto pos = s.cursor;
      const auto& entry = s.queue.at(pos);
      if (req.item_key != item_key(pos, user_id, entry)) {
        if (is_duplicate()) return render(s);
        throw stale();
      }
      const std::size_t stored = pos < s.frontier() ? s.annotations[pos].revision : 0;
      if (req.revision < stored) return render(s);
      if (req.revision > stored) throw stale();
      const Instance* inst = entry_instance(entry);
      const auto check = check_submission(config_.schemes, req.labels, *inst);
      if (!check.ok()) throw ApiError(422, "invalid", "labels failed validation", errors_json(check.errors));
      const bool first = pos == s.frontier();
      const auto encoded = encode_labels(check.labels);
      std::vector<json> events{ev("submit", 
          {{"pos", pos}, {"labels", encoded}, {"elapsed_ms", req.elapsed_ms}, {"received_at", now()}})};
      if (entry.kind == QueueEntry::Kind::attention) {
        if (first) {
          const auto* gold = attention_item(entry.id);
          auto status = s.qc;
          const bool matched = score_attention(status, *qc->attention, gold_answers(*gold, config_), check.labels);
          events.push_back(ev("attention", {{"pos", pos},
                                                   {"matched", matched},
                                                   {"failures", status.attention_failures},
                                                   {"state", std::string(to_string(status.state))}}));
          if (status.state == QualityState::blocked) events.push_back(ev("stage", {{"stage", "blocked"}}));
        }
      } else if (learner_) {
        const auto it = encoded.find(config_.active_learning->target_scheme);
        if (it != encoded.end()) note = LearnNote{entry.id, *it, first};
      }
      // resume rule: after any submit the cursor returns to the first
      // unannotated position
      events.push_back(ev("cursor", {{"pos", first ? pos + 1 : s.frontier()}}));
      commit(user_id, *slot, std::move(events));
    }
    settle(user_id, *slot);
    out = render(s);
  }
  if (note) learner_->record(user_id, note->instance_id, note->value, note->first);
  return out;
}

RenderModel SessionManager::navigate(const std::string& user_id, Direction direction) {
  auto slot = find_slot(user_id);
  if (!slot) throw ApiError(401, "unauthenticated", "unknown user");
  std::lock_guard lock(slot->mu);
  settle(user_id, *slot);
  auto& s = slot->state;
  if (s.stage == Stage::blocked) throw ApiError(403, "blocked", "this annotator is blocked");
  std::string notice;
  if (s.stage != Stage::main) {
    notice = "navigation is not available on this page";
  } else if (direction == Direction::back) {
    const bool in_queue = s.cursor < s.queue.size();
    if (in_queue && s.cursor > 0) {
      commit(user_id, *slot, {ev("cursor", {{"pos", s.cursor - 1}})});
    } else if (!in_queue && !s.queue.empty() && s.post_answers.empty()) {
      commit(user_id, *slot, {ev("cursor", {{"pos", s.queue.size() - 1}})});
    } else {
      notice = "already at the first item";
    }
  } else {
    if (s.cursor < s.frontier()) {
      commit(user_id, *slot, {ev("cursor", {{"pos", s.cursor + 1}})});
    } else {
      notice = "cannot move past the first unannotated item";
    }
  }
  auto m = render(s);
  m.notice = notice;
  return m;
}

UserState SessionManager::state(const std::string& user_id) const {
  auto slot = find_slot(user_id);
  if (!slot) throw ApiError(401, "unauthenticated", "unknown user");
  std::lock_guard lock(slot->mu);
  return slot->state;
}

std::vector<std::string> SessionManager::user_ids() const {
  std::shared_lock lock(users_mu_);
  std::vector<std::string> out;
  for (const auto& [id, slot] : users_) out.push_back(id);
  return out;
}

std::map<std::string, std::size_t> SessionManager::assignment_counts() const {
  std::lock_guard lock(assign_mu_);
  return {assigned_.begin(), assigned_.end()};
}

AdminProgress SessionManager::progress() const {
  AdminProgress p;
  for (const auto& inst : store_.all()) {
    p.coverage[inst.id] = 0;
    p.assignments[inst.id] = 0;
  }
  for (const auto& user_id : user_ids()) {
    const auto s = state(user_id);
    UserProgress u;
    u.user = user_id;
    u.stage = std::string(to_string(s.stage));
    u.quality_state = std::string(to_string(s.qc.state));
    u.attention_failures = s.qc.attention_failures;
    for (std::size_t i = 0; i < s.queue.size(); ++i) {
      if (s.queue[i].kind != QueueEntry::Kind::instance) continue;
      ++u.total;
      ++p.assignments[s.queue[i].id];
      if (i < s.frontier()) {
        ++u.completed;
        ++p.coverage[s.queue[i].id];
      }
    }
    p.total_annotations += u.completed;
    p.attention_failures += static_cast<std::size_t>(s.qc.attention_failures);
    if (s.qc.state == QualityState::flagged) ++p.flagged_users;
    if (s.qc.state == QualityState::blocked) ++p.blocked_users;
    p.users.push_back(std::move(u));
  }
  return p;
}

AnnotationStore SessionManager::annotation_store() const {
  AnnotationStore out;
  const auto& qc = config_.quality_control;
  for (const auto& user_id : user_ids()) {
    const auto s = state(user_id);
    for (std::size_t i = 0; i < s.pre_answers.size(); ++i) {
      out.surveys.push_back({user_id, "pre", i, qc->pre_surveys.at(i).title, s.pre_answers[i]});
    }
    for (std::size_t i = 0; i < s.prestudy_answers.size(); ++i) {
      out.gold.push_back({user_id, "prestudy", i, qc->prestudy->items.at(i).id, s.prestudy_answers[i],
                          static_cast<bool>(s.prestudy_correct[i]), 0, 0});
    }
    for (std::size_t i = 0; i < s.frontier(); ++i) {
      const auto& entry = s.queue[i];
      const auto& rec = s.annotations[i];
      if (entry.kind == QueueEntry::Kind::attention) {
        out.gold.push_back({user_id, "attention", i, entry.id, rec.labels, rec.attention_matched.value_or(false),
                            rec.elapsed_ms, rec.received_at});
        continue;
      }
      const Instance* inst = store_.find(entry.id);
      AnnotationRecord r;
      r.user = user_id;
      r.instance_id = entry.id;
      r.position = i;
      if (inst) r.meta = inst->display_meta;
      r.labels = rec.labels;
      r.elapsed_ms = rec.elapsed_ms;
      r.revision = rec.revision;
      r.received_at = rec.received_at;
      if (inst && config_.highlight) r.highlights = highlight_instance(*inst, *config_.highlight, user_id);
      r.quality_state = std::string(to_string(s.qc.state));
      out.records.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < s.post_answers.size(); ++i) {
      out.surveys.push_back({user_id, "post", i, qc->post_surveys.at(i).title, s.post_answers[i]});
    }
  }
  return out;
}

void SessionManager::checkpoint() {
  std::vector<std::pair<std::string, std::shared_ptr<Slot>>> slots;
  {
    std::shared_lock lock(users_mu_);
    slots.assign(users_.begin(), users_.end());
  }
  for (const auto& [user_id, slot] : slots) {
    std::lock_guard lock(slot->mu);
    write_snapshot(user_id, *slot);
  }
}

void SessionManager::wait_learning() {
  if (learner_) learner_->wait_idle();
}

}  // namespace annoserve
