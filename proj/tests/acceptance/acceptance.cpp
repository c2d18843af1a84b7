// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <httplib.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "annoserve/config.hpp"
#include "annoserve/errors.hpp"
#include "annoserve/export.hpp"
#include "annoserve/gallery.hpp"
#include "annoserve/highlight.hpp"
#include "annoserve/ingest.hpp"
#include "annoserve/learning/active_learner.hpp"
#include "annoserve/learning/classifier.hpp"
#include "annoserve/learning/features.hpp"
#include "annoserve/learning/kernels.hpp"
#include "annoserve/learning/reorder.hpp"
#include "annoserve/persistence.hpp"
#include "annoserve/quality.hpp"
#include "annoserve/server.hpp"
#include "annoserve/session.hpp"
#include "annoserve/text.hpp"
#include "annoserve/wizard.hpp"
#include "al_sim.hpp"
#include "lr_toy.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace annoserve;
using annoserve::testing::TempDir;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects failed expectations for one criterion; the first few are shown.
class Checks {
 public:
  bool expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
    return ok;
  }
  bool ok() const { return failures_.empty(); }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  std::string summary() const {
    if (ok()) return notes_;
    std::string out = std::to_string(failures_.size()) + " failure(s): ";
    for (std::size_t i = 0; i < failures_.size() && i < 3; ++i) out += (i ? " | " : "") + failures_[i];
    if (!notes_.empty()) out += " [" + notes_ + "]";
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::string notes_;
};

SessionOptions quiet_options() {
  SessionOptions o;
  o.background_learning = false;
  o.password_iterations = 10;
  return o;
}

std::unique_ptr<SessionManager> open_manager(const TaskConfig& config, SessionOptions o = quiet_options()) {
  return std::make_unique<SessionManager>(config, InstanceStore(load_instances(config)), o);
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. config round trip

void config_round_trip(Checks& c) {
  const auto t0 = Clock::now();
  const auto entries = list_templates(annoserve::testing::templates_dir());
  c.expect(entries.size() == 9, "expected 9 templates, found " + std::to_string(entries.size()));
  for (const auto& e : entries) {
    const auto loaded = load_config(e.config_file);
    const auto text = serialize_config(loaded);
    const auto again = parse_config(text, loaded.base_dir, true);
    c.expect(again == loaded, e.id + ": serialize then load differs");
    c.expect(serialize_config(again) == text, e.id + ": serialization not stable");
  }
  const auto dir = annoserve::testing::templates_dir() / "task2_short_doc";
  const auto answers = read_answer_file(dir / "wizard_answers.txt");
  ScriptedPrompts prompts(answers);
  const auto result = run_config_wizard(prompts, dir);
  c.expect(prompts.consumed() == answers.size(), "wizard left answers unused");
  c.expect(result.config == load_config(dir / "config.yaml"), "wizard config differs from task2_short_doc");
  c.expect(parse_config(result.yaml, dir, true) == result.config, "wizard YAML does not reload to its config");
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + fmt(secs) + " s");
  c.note(std::to_string(entries.size()) + " templates, " + fmt(secs) + " s");
}

// ---------------------------------------------------------------------------
// 2. ingestion equivalence and export round trip

void ingestion_equivalence(Checks& c) {
  TempDir dir;
  Rng rng(2024);
  const std::vector<std::string> pieces{"plain", "comma, inside", "a \"quoted\" word", "line\nbreak", "ünïcödé ✓",
                                        "tab\tcell", "  padded  ", "semi;colon", "emoji 🙂", "x"};
  std::string csv = "id,text,source,score\n", tsv = "id\ttext\tsource\tscore\n", jsonl;
  for (int i = 0; i < 1000; ++i) {
    std::string text = pieces[uniform_index(rng, pieces.size())];
    for (std::size_t k = uniform_index(rng, 4); k > 0; --k) text += " " + pieces[uniform_index(rng, pieces.size())];
    const std::string id = "r" + std::to_string(i), source = i % 3 ? "web" : "forum, archived";
    const std::string score = std::to_string(uniform_index(rng, 100));
    jsonl += json{{"id", id}, {"text", text}, {"source", source}, {"score", score}}.dump() + "\n";
    csv += delimited_escape(id, ',') + "," + delimited_escape(text, ',') + "," + delimited_escape(source, ',') + "," +
           delimited_escape(score, ',') + "\n";
    tsv += delimited_escape(id, '\t') + "\t" + delimited_escape(text, '\t') + "\t" + delimited_escape(source, '\t') +
           "\t" + delimited_escape(score, '\t') + "\n";
  }
  annoserve::testing::write_text(dir / "d.jsonl", jsonl);
  annoserve::testing::write_text(dir / "d.csv", csv);
  annoserve::testing::write_text(dir / "d.tsv", tsv);
  const std::string body = R"(
id_field: id
text_field: text
login_mode: url_argument
highlight: {keyword_groups: {g: [line*, comma]}, decoy_rate: 0.1}
schemes:
  - {name: topic, kind: multiselect, options: [p, q, r]}
  - {name: tone, kind: radio, options: [pos, neg]}
  - {name: note, kind: free_text, required: false}
  - {name: score, kind: likert, likert_size: 5}
server: {output_dir: out}
)";
  auto cfg = [&](const std::string& file) {
    return annoserve::testing::config_from_yaml("task_name: ingest\ndata_files: [" + file + "]" + body, dir.path());
  };
  const auto from_jsonl = load_instances(cfg("d.jsonl"));
  const auto from_csv = load_instances(cfg("d.csv"));
  const auto from_tsv = load_instances(cfg("d.tsv"));
  c.expect(from_jsonl.size() == 1000, "jsonl gave " + std::to_string(from_jsonl.size()) + " instances");
  c.expect(from_csv == from_jsonl, "CSV instances differ from JSON lines");
  c.expect(from_tsv == from_jsonl, "TSV instances differ from JSON lines");

  // export of a populated store reads back identically
  const auto config = cfg("d.jsonl");
  auto sm = open_manager(config);
  const auto user = sm->login_url("exporter");
  const InstanceStore& store = sm->store();
  for (int i = 0; i < 1000; ++i) {
    const auto m = sm->current(user);
    const auto s = sm->state(user);
    auto labels = annoserve::testing::random_valid_labels(config, *store.find(s.queue.at(s.cursor).id), rng);
    if (i % 4 == 0) labels.erase("note");
    sm->submit(user, {m.item_key, labels, static_cast<std::int64_t>(uniform_index(rng, 5000)), 0});
  }
  const auto annotations = sm->annotation_store();
  c.expect(annotations.records.size() == 1000, "store has " + std::to_string(annotations.records.size()));
  std::size_t with_highlights = 0;
  for (const auto& r : annotations.records) with_highlights += !r.highlights.empty();
  for (auto format : {ExportFormat::jsonl, ExportFormat::csv}) {
    const auto out = dir / (format == ExportFormat::jsonl ? "ej" : "ec");
    export_annotations(annotations, config, format, out);
    c.expect(read_export(out, config, format) == annotations,
             std::string(format == ExportFormat::jsonl ? "JSON lines" : "CSV") + " export round trip differs");
  }
  c.note("1000 records x 3 formats; export round trip with " + std::to_string(with_highlights) +
         " highlighted records");
}

// ---------------------------------------------------------------------------
// 3. scheme validation matrix

void scheme_matrix(Checks& c) {
  auto scheme = [](const std::string& name, SchemeKind kind, std::vector<std::string> options = {}) {
    AnnotationScheme s;
    s.name = name;
    s.kind = kind;
    for (auto& o : options) s.options.push_back({o, o, false, std::nullopt, std::nullopt});
    return s;
  };
  Instance inst;
  inst.id = "i";
  inst.keys = {"text"};
  inst.documents = {{DocumentKind::text, "Zoë met Ana in Oslo"}};  // 19 code points
  auto likert = scheme("likert", SchemeKind::likert);
  likert.likert_size = 5;
  struct Case {
    AnnotationScheme scheme;
    json value;
    bool accept;
    std::string expect_message;  // substring of the error, when rejected
  };
  const auto ms = scheme("multiselect", SchemeKind::multiselect, {"a", "b", "c"});
  const auto radio = scheme("radio", SchemeKind::radio, {"x", "y"});
  const auto bw = scheme("best_worst", SchemeKind::best_worst, {"p", "q", "r", "s"});
  const auto ft = scheme("free_text", SchemeKind::free_text);
  const auto span = scheme("span", SchemeKind::span, {"PER", "LOC"});
  const auto num = scheme("number", SchemeKind::number);
  const auto dd = scheme("dropdown", SchemeKind::dropdown, {"low", "high"});
  auto sp = [](int doc, int start, int end, const char* label) {
    return json{{"doc", doc}, {"start", start}, {"end", end}, {"label", label}};
  };
  const std::vector<Case> cases{
      {ms, {"a", "c"}, true, ""},
      {ms, {"a", "zz"}, false, "zz"},
      {ms, "a", false, ""},
      {radio, "y", true, ""},
      {radio, "z", false, "z"},
      {bw, {{"best", "p"}, {"worst", "s"}}, true, ""},
      {bw, {{"best", "q"}, {"worst", "q"}}, false, "best and worst must differ"},
      {likert, 1, true, ""},
      {likert, 5, true, ""},
      {likert, 6, false, "outside [1, 5]"},
      {likert, 0, false, "outside [1, 5]"},
      {ft, "free words", true, ""},
      {ft, "   ", false, ""},
      {span, json::array({sp(0, 0, 3, "PER"), sp(0, 15, 19, "LOC")}), true, ""},
      {span, json::array({sp(0, 15, 20, "LOC")}), false, ""},
      {span, json::array({sp(0, 8, 4, "PER")}), false, "start must precede end"},
      {span, json::array({sp(0, 0, 3, "ORG")}), false, ""},
      {num, -2.5, true, ""},
      {num, "many", false, ""},
      {dd, "high", true, ""},
      {dd, "medium", false, ""},
  };
  std::set<SchemeKind> accepted, rejected;
  for (const auto& k : cases) {
    const auto check = check_submission({k.scheme}, json{{k.scheme.name, k.value}}, inst);
    const std::string label = k.scheme.name + " " + k.value.dump();
    if (k.accept) {
      if (c.expect(check.ok(), label + " should be accepted")) accepted.insert(k.scheme.kind);
    } else if (c.expect(!check.ok(), label + " should be rejected")) {
      rejected.insert(k.scheme.kind);
      if (!k.expect_message.empty()) {
        c.expect(check.errors[0].message.find(k.expect_message) != std::string::npos,
                 label + ": message '" + check.errors[0].message + "'");
      }
    }
  }
  c.expect(accepted.size() == 8 && rejected.size() == 8, "not every kind has an accepted and a rejected case");
  c.note(std::to_string(cases.size()) + " cases over " + std::to_string(accepted.size()) + " kinds");
}

// ---------------------------------------------------------------------------
// 4. resume, assignment and crash recovery

struct Expected {
  std::map<std::pair<std::string, std::string>, json> labels;  // (user, instance) -> last accepted value
};

void resume_run(std::uint64_t seed, Checks& c, std::size_t& logins, std::size_t& restarts) {
  TempDir dir;
  const auto config = annoserve::testing::simple_task(
      dir.path(), 50,
      "assignment: {annotations_per_instance: 2, max_instances_per_annotator: 20, ordering: random, seed: " +
          std::to_string(seed) + "}\n");
  Rng rng(derive_seed(seed, "resume"));
  auto options = quiet_options();
  options.snapshot_every = 3 + uniform_index(rng, 8);
  auto sm = open_manager(config, options);
  const std::string tag = "seed " + std::to_string(seed) + ": ";
  std::vector<std::string> users;
  for (int i = 0; i < 5; ++i) users.push_back("url:w" + std::to_string(i));
  std::vector<bool> logged(5, false);
  std::map<std::pair<std::string, std::string>, json> expected;
  std::optional<std::pair<std::string, SubmitRequest>> last_request;

  auto all_done = [&] {
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (!logged[i]) return false;
      const auto s = sm->state(users[i]);
      if (!s.queue_assigned || s.frontier() < s.queue.size()) return false;
    }
    return true;
  };
  std::size_t steps = 0;
  for (; steps < 4000 && !all_done(); ++steps) {
    const double r = uniform_unit(rng);
    if (r < 0.03) {
      sm.reset();
      sm = open_manager(config, options);
      std::fill(logged.begin(), logged.end(), false);
      ++restarts;
      continue;
    }
    const auto u = uniform_index(rng, users.size());
    const auto& user = users[u];
    if (!logged[u]) {
      sm->login_url(user.substr(4));
      const auto s = sm->state(user);
      c.expect(s.cursor == s.frontier(), tag + user + " resumed at " + std::to_string(s.cursor) + " not " +
                                             std::to_string(s.frontier()));
      logged[u] = true;
      ++logins;
      continue;
    }
    const double a = uniform_unit(rng);
    if (a < 0.7) {
      const auto m = sm->current(user);
      if (m.step != StepKind::instance) continue;
      const auto s = sm->state(user);
      const auto& id = s.queue.at(s.cursor).id;
      const json labels{{"label", std::string(1, static_cast<char>('a' + uniform_index(rng, 3)))}};
      SubmitRequest req{m.item_key, labels, 100, m.revision};
      sm->submit(user, req);
      expected[{user, id}] = labels;
      last_request = {user, req};
    } else if (a < 0.75 && last_request) {
      // a client retry of the previous request must not change anything
      const auto before = sm->annotation_store();
      try {
        sm->submit(last_request->first, last_request->second);
      } catch (const ApiError& e) {
        c.expect(e.status() == 409, tag + "replay gave " + std::to_string(e.status()));
      }
      c.expect(sm->annotation_store() == before, tag + "replayed submission changed the store");
    } else if (a < 0.87) {
      sm->navigate(user, Direction::back);
    } else if (a < 0.93) {
      sm->navigate(user, Direction::forward);
    } else {
      logged[u] = false;  // walks away; next visit is a fresh login
    }
  }
  c.expect(all_done(), tag + "did not finish in " + std::to_string(steps) + " steps");
  sm.reset();
  sm = open_manager(config, options);
  const auto counts = sm->assignment_counts();
  std::size_t total = 0;
  for (const auto& inst : sm->store().all()) {
    const auto it = counts.find(inst.id);
    const std::size_t n = it == counts.end() ? 0 : it->second;
    total += n;
    c.expect(n == 2, tag + inst.id + " assigned " + std::to_string(n) + " times");
  }
  c.expect(total == 100, tag + "total assignments " + std::to_string(total));
  const auto store = sm->annotation_store();
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : store.records) {
    c.expect(seen.insert({r.user, r.instance_id}).second, tag + "duplicate record " + r.user + "/" + r.instance_id);
    const auto it = expected.find({r.user, r.instance_id});
    c.expect(it != expected.end() && it->second == r.labels, tag + "unexpected labels for " + r.instance_id);
  }
  c.expect(store.records.size() == expected.size(),
           tag + std::to_string(store.records.size()) + " records, expected " + std::to_string(expected.size()));
}

// Child process: annotates until killed, acknowledging each durable submit on `fd`.
[[noreturn]] void annotate_until_killed(const TaskConfig& config, int fd, std::uint64_t seed) {
  auto sm = open_manager(config);
  Rng rng(seed);
  const std::vector<std::string> workers{"k0", "k1", "k2", "k3"};
  for (;;) {
    bool any = false;
    for (std::size_t tries = 0; tries < workers.size(); ++tries) {
      const auto user = sm->login_url(workers[uniform_index(rng, workers.size())]);
      const auto m = sm->current(user);
      if (m.step != StepKind::instance) continue;
      const auto s = sm->state(user);
      const auto id = s.queue.at(s.cursor).id;
      const std::string value(1, static_cast<char>('a' + uniform_index(rng, 3)));
      sm->submit(user, {m.item_key, {{"label", value}}, 10, m.revision});
      const std::string ack = user + "\t" + id + "\t" + value + "\n";
      if (::write(fd, ack.data(), ack.size()) < 0) _exit(3);
      any = true;
      break;
    }
    if (!any) {
      bool done = true;
      for (const auto& w : workers) done = done && sm->current(sm->login_url(w)).step == StepKind::done;
      if (done) _exit(0);
    }
  }
}

void kill_restart(Checks& c, std::size_t& kills, std::size_t& acked_total) {
  TempDir dir;
  const auto config = annoserve::testing::simple_task(dir.path(), 40);
  Rng rng(99);
  std::map<std::pair<std::string, std::string>, std::string> acked;
  bool finished = false;
  for (int trial = 0; trial < 40 && !finished; ++trial) {
    int fds[2];
    if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
    std::cout.flush();
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      ::close(fds[0]);
      annotate_until_killed(config, fds[1], derive_seed(trial, "child"));
    }
    ::close(fds[1]);
    const std::size_t kill_after = 1 + uniform_index(rng, 12);
    std::string buffer;
    std::size_t lines = 0;
    bool killed = false;
    char chunk[4096];
    for (;;) {
      const auto n = ::read(fds[0], chunk, sizeof chunk);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      lines = static_cast<std::size_t>(std::count(buffer.begin(), buffer.end(), '\n'));
      if (!killed && lines >= kill_after) {
        ::kill(pid, SIGKILL);
        killed = true;
      }
    }
    ::close(fds[0]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (killed) ++kills;
    if (!killed || (WIFEXITED(status) && WEXITSTATUS(status) == 0)) finished = true;
    std::istringstream in(buffer);
    std::string line;
    while (std::getline(in, line)) {
      if (in.eof()) break;  // no newline: written partially before the kill
      const auto t1 = line.find('\t'), t2 = line.rfind('\t');
      acked[{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1)}] = line.substr(t2 + 1);
    }

    // recover in this process and compare with every acknowledgement
    auto sm = open_manager(config);
    const auto store = sm->annotation_store();
    std::map<std::pair<std::string, std::string>, std::string> stored;
    for (const auto& r : store.records) {
      const bool fresh = stored.emplace(std::pair{r.user, r.instance_id}, r.labels.value("label", "")).second;
      c.expect(fresh, "duplicate annotation " + r.user + "/" + r.instance_id);
    }
    for (const auto& [key, value] : acked) {
      const auto it = stored.find(key);
      c.expect(it != stored.end() && it->second == value,
               "trial " + std::to_string(trial) + ": acknowledged " + key.first + "/" + key.second + " lost");
    }
    // at most the one in-flight submission can be durable without an ack
    c.expect(stored.size() <= acked.size() + 1, "trial " + std::to_string(trial) + ": " +
                                                    std::to_string(stored.size()) + " stored vs " +
                                                    std::to_string(acked.size()) + " acknowledged");
    for (const auto& id : sm->user_ids()) {
      const auto s = sm->state(id);
      std::set<std::string> ids;
      for (const auto& e : s.queue) c.expect(ids.insert(e.id).second, "queue of " + id + " repeats " + e.id);
    }
    // an unacknowledged durable write is kept as well
    for (const auto& [key, value] : stored) {
      if (!acked.count(key)) acked[key] = value;
    }
  }
  acked_total = acked.size();

  // a torn final line is ignored and appending resumes after it
  auto sm = open_manager(config);
  const auto ids = sm->user_ids();
  c.expect(!ids.empty(), "no users after kill trials");
  if (ids.empty()) return;
  const auto before = sm->state(ids[0]);
  sm.reset();
  {
    std::ofstream log(dir / "out" / "state" / "users" / hex_escape(ids[0]) / "log.jsonl",
                      std::ios::app | std::ios::binary);
    log << R"({"seq": 999999, "events": [{"e": "sub)";
  }
  sm = open_manager(config);
  c.expect(sm->state(ids[0]) == before, "torn tail changed the recovered state");
  sm->navigate(ids[0], Direction::back);
  const auto after = sm->state(ids[0]);
  sm = open_manager(config);
  c.expect(sm->state(ids[0]) == after, "append after torn tail was not recovered");
}

void resume_and_recovery(Checks& c) {
  std::size_t logins = 0, restarts = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) resume_run(seed, c, logins, restarts);
  std::size_t kills = 0, acked = 0;
  kill_restart(c, kills, acked);
  c.note("100 seeds, " + std::to_string(logins) + " logins checked, " + std::to_string(restarts) + " restarts; " +
         std::to_string(kills) + " SIGKILLs, " + std::to_string(acked) + " acknowledged annotations intact");
}

// ---------------------------------------------------------------------------
// 5. active-learning oracle

void learning_oracle(Checks& c) {
  const double lr_err = annoserve::testing::lr_oracle_max_error();
  c.expect(lr_err <= 0.02, "max |dp| vs reference " + sci(lr_err));
  double worst_grad = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) worst_grad = std::max(worst_grad, annoserve::testing::gradient_check_error(seed));
  c.expect(worst_grad <= 1e-4, "gradient relative error " + std::to_string(worst_grad));

  // ratio 0: confidences along the queue never decrease
  const auto model = annoserve::testing::train_toy_model();
  std::vector<learning::Candidate> pool;
  for (const auto& row : annoserve::testing::lr_oracle()) pool.push_back({row.text, learning::featurize(row.text)});
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int k = 0; k < 6; ++k) text += annoserve::testing::lr_oracle()[uniform_index(rng, 25)].text + " ";
    pool.push_back({"mix" + std::to_string(i), learning::featurize(text.substr(0, uniform_index(rng, text.size()) + 1))});
  }
  for (auto measure : {ConfidenceMeasure::least_confidence, ConfidenceMeasure::margin, ConfidenceMeasure::entropy}) {
    const auto plan = learning::reorder(pool, model, 0.0, 17, measure);
    c.expect(plan.ids.size() == pool.size(), "reorder dropped candidates");
    c.expect(std::is_sorted(plan.confidence.begin(), plan.confidence.end()),
             "confidences decrease with ratio 0 (" + std::string(to_string(measure)) + ")");
  }

  // random slots: round(ratio * n), ratios as exact fractions p/q
  const std::vector<std::pair<int, int>> ratios{{0, 1}, {1, 10}, {1, 5}, {1, 4}, {7, 20}, {1, 3}, {1, 2}, {3, 4}, {1, 1}};
  std::size_t checked = 0;
  for (const int n : {1, 10, 100}) {
    for (const auto& [p, q] : ratios) {
      const std::size_t expected = static_cast<std::size_t>((2 * p * n + q) / (2 * q));  // half rounds up
      std::vector<std::string> ids;
      std::vector<double> conf;
      for (int i = 0; i < n; ++i) {
        ids.push_back("i" + std::to_string(i));
        conf.push_back(uniform_unit(rng));
      }
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto plan = learning::plan_queue(ids, conf, static_cast<double>(p) / q, seed);
        c.expect(plan.random_slots() == expected, "n=" + std::to_string(n) + " ratio " + std::to_string(p) + "/" +
                                                      std::to_string(q) + " gave " +
                                                      std::to_string(plan.random_slots()));
        ++checked;
      }
    }
  }
  c.note("max |dp| " + sci(lr_err) + ", grad err " + sci(worst_grad) + ", " +
         std::to_string(checked) + " slot-count plans");
}

// ---------------------------------------------------------------------------
// 6. active-learning efficiency

void learning_efficiency(Checks& c) {
  const auto t0 = Clock::now();
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto corpus = annoserve::testing::synthetic_corpus(derive_seed(seed, "corpus"));
    const auto al = annoserve::testing::labels_to_target(corpus, true, seed);
    const auto random = annoserve::testing::labels_to_target(corpus, false, seed);
    wins += al < random;
    per_seed += (seed > 1 ? " " : "") + std::to_string(al) + "/" + std::to_string(random);
  }
  const double secs = seconds_since(t0);
  c.expect(wins >= 8, "uncertainty won " + std::to_string(wins) + "/10");
  c.expect(secs < 120.0, "runtime " + fmt(secs, 1) + " s");
  c.note("uncertainty fewer labels in " + std::to_string(wins) + "/10 seeds (al/random: " + per_seed + "), " +
         fmt(secs, 1) + " s");
}

// ---------------------------------------------------------------------------
// 7. highlighter statistics

void highlighter_statistics(Checks& c) {
  const std::string fixture =
      "He retired early. Retirement suited him, and retiring friends agreed. The unretired and tired "
      "attire of a retro reti stayed. RETIRED once more.";
  std::set<std::string> lowered;
  const auto tokens = tokenize(fixture);
  for (const auto& span : match_keywords(fixture, {{"retire", {"retir*"}}})) {
    for (const auto& t : tokens) {
      if (t.start == span.start && t.end == span.end) lowered.insert(t.text);
    }
  }
  c.expect(lowered == std::set<std::string>{"retired", "retirement", "retiring"}, "retir* matched an unexpected token set");

  const std::string sports = "The playoff and playoffs went on; a layoff hit. Layoff, layoffs.";
  std::size_t layoff_hits = 0;
  for (const auto& span : match_keywords(sports, {{"cuts", {"layoff"}}})) {
    const auto word = code_point_substr(sports, span.start, span.end);
    c.expect(word == "layoff" || word == "Layoff", "layoff matched '" + word + "'");
    ++layoff_hits;
  }
  c.expect(layoff_hits == 2, "layoff matched " + std::to_string(layoff_hits) + " times");

  auto config = load_config(annoserve::testing::templates_dir() / "task1_long_doc" / "config.yaml");
  auto hl = *config.highlight;
  hl.decoy_rate = 0.1;
  const auto instances = load_instances(config);
  double sum = 0.0, worst = 0.0;
  std::size_t overlaps = 0;
  for (int seed = 0; seed < 1000; ++seed) {
    const auto& inst = instances[static_cast<std::size_t>(seed) % instances.size()];
    const auto spans = highlight_instance(inst, hl, "annotator-" + std::to_string(seed));
    const auto& text = inst.documents[0].payload;
    std::vector<HighlightSpan> keywords, decoys;
    for (const auto& s : spans) (s.source == HighlightSource::keyword ? keywords : decoys).push_back(s);
    std::size_t candidates = 0;
    for (const auto& t : tokenize(text)) {
      bool hit = false;
      for (const auto& k : keywords) hit = hit || (t.start < k.end && k.start < t.end);
      candidates += !hit;
    }
    for (const auto& d : decoys) {
      for (const auto& k : keywords) overlaps += d.start < k.end && k.start < d.end;
    }
    const double fraction = static_cast<double>(decoys.size()) / static_cast<double>(candidates);
    sum += fraction;
    worst = std::max(worst, std::abs(fraction - 0.1));
  }
  const double mean = sum / 1000.0;
  c.expect(std::abs(mean - 0.1) <= 0.01, "mean decoy fraction " + fmt(mean, 4));
  c.expect(worst <= 0.01, "worst per-seed deviation " + fmt(worst, 4));
  c.expect(overlaps == 0, std::to_string(overlaps) + " decoy/keyword overlaps");
  c.note("mean decoy fraction " + fmt(mean, 4) + ", worst deviation " + fmt(worst, 4));
}

// ---------------------------------------------------------------------------
// 8. quality-control flow

json body_of(const httplib::Result& r) { return r ? json::parse(r->body, nullptr, false) : json(); }

void quality_flow(Checks& c) {
  // prestudy: exactly at threshold passes, below is blocked
  {
    TempDir dir;
    const std::string qc = R"(quality_control:
  prestudy:
    pass_threshold: 0.75
    items:
      - {id: p1, fields: {text: gold one}, answers: {label: a}}
      - {id: p2, fields: {text: gold two}, answers: {label: b}}
      - {id: p3, fields: {text: gold three}, answers: {label: c}}
      - {id: p4, fields: {text: gold four}, answers: {label: a}}
)";
    const auto config = annoserve::testing::simple_task(dir.path(), 5, qc);
    AnnotationServer server(config, InstanceStore(load_instances(config)), quiet_options());
    const int port = server.start("127.0.0.1", 0);
    httplib::Client http("127.0.0.1", port);
    const std::vector<std::string> gold{"a", "b", "c", "a"};
    for (const int correct : {3, 2}) {
      const auto login = body_of(http.Post("/login", json{{"id", "pre" + std::to_string(correct)}}.dump(), "application/json"));
      const httplib::Headers auth{{"Authorization", "Bearer " + login.value("token", "")}};
      json task = login["task"];
      c.expect(task["step"] == "prestudy", "prestudy not shown first");
      for (int i = 0; i < 4; ++i) {
        const std::string answer = i < correct ? gold[i] : (gold[i] == "a" ? "b" : "a");
        task = body_of(http.Post("/submit", auth, json{{"item_key", task["item_key"]}, {"labels", {{"label", answer}}}}.dump(),
                                 "application/json"));
      }
      if (correct == 3) {
        c.expect(task["step"] == "instance", "3/4 at threshold 0.75 did not pass");
      } else {
        c.expect(task["step"] == "blocked", "2/4 was not blocked");
        const auto r = http.Post("/submit", auth, json{{"item_key", task["item_key"]}, {"labels", {{"label", "a"}}}}.dump(),
                                 "application/json");
        c.expect(r && r->status == 403, "blocked prestudy user did not get 403");
      }
    }
    PrestudyConfig p;
    p.pass_threshold = 0.75;
    c.expect(score_prestudy(p, {true, true, true, false}).passed, "score_prestudy 3/4");
    c.expect(!score_prestudy(p, {true, true, false, false}).passed, "score_prestudy 2/4");
  }

  // insertion counts: round(rate * |queue|) with half rounding up
  {
    GoldItem g;
    g.id = "g";
    const std::vector<std::pair<int, int>> rates{{1, 10}, {1, 5}, {1, 4}, {7, 20}, {1, 2}};
    for (const int n : {1, 10, 37, 50, 101}) {
      for (const auto& [p, q] : rates) {
        AttentionConfig a;
        a.items = {g};
        a.insertion_rate = static_cast<double>(p) / q;
        std::vector<QueueEntry> queue;
        for (int i = 0; i < n; ++i) queue.push_back({QueueEntry::Kind::instance, "i" + std::to_string(i)});
        const auto out = insert_attention_tests(queue, a, 7);
        const auto inserted = static_cast<std::size_t>(
            std::count_if(out.begin(), out.end(), [](const QueueEntry& e) { return e.kind == QueueEntry::Kind::attention; }));
        c.expect(inserted == static_cast<std::size_t>((2 * p * n + q) / (2 * q)),
                 "n=" + std::to_string(n) + " rate " + std::to_string(p) + "/" + std::to_string(q) + " inserted " +
                     std::to_string(inserted));
      }
    }
  }

  // attention answers stay out of the export and out of training
  {
    TempDir dir;
    const std::string extra = R"(assignment: {ordering: active_learning}
active_learning: {target_scheme: label, retrain_every: 5, min_labels_to_start: 5}
quality_control:
  attention:
    insertion_rate: 0.2
    items: [{id: att1, fields: {text: choose b}, answers: {label: b}}, {id: att2, fields: {text: choose c}, answers: {label: c}}]
)";
    const auto config = annoserve::testing::simple_task(dir.path(), 50, extra);
    auto sm = open_manager(config);
    const auto user = sm->login_url("qc");
    Rng rng(3);
    std::size_t instance_submits = 0, attention_submits = 0;
    for (;;) {
      const auto m = sm->current(user);
      if (m.step != StepKind::instance) break;
      const auto s = sm->state(user);
      const bool attention = s.queue[s.cursor].kind == QueueEntry::Kind::attention;
      (attention ? attention_submits : instance_submits)++;
      sm->submit(user, {m.item_key, {{"label", std::string(1, static_cast<char>('a' + uniform_index(rng, 3)))}}, 5, 0});
    }
    sm->wait_learning();
    const auto store = sm->annotation_store();
    c.expect(attention_submits == 10, "attention items in a 50 queue at 0.2: " + std::to_string(attention_submits));
    c.expect(store.records.size() == 50 && instance_submits == 50, "export holds " + std::to_string(store.records.size()));
    for (const auto& r : store.records) c.expect(r.instance_id.rfind("att", 0) != 0, "attention item exported as annotation");
    c.expect(store.gold.size() == 10, "gold responses " + std::to_string(store.gold.size()));
    c.expect(sm->learner()->label_count() == 50, "learner saw " + std::to_string(sm->learner()->label_count()) + " labels");
  }

  // attention failure with on_fail: block gives 403 on /submit
  {
    TempDir dir;
    const std::string qc = R"(quality_control:
  attention:
    insertion_rate: 0.25
    fail_threshold: 1
    on_fail: block
    items: [{id: g1, fields: {text: choose c}, answers: {label: c}}]
)";
    const auto config = annoserve::testing::simple_task(dir.path(), 8, qc);
    AnnotationServer server(config, InstanceStore(load_instances(config)), quiet_options());
    const int port = server.start("127.0.0.1", 0);
    httplib::Client http("127.0.0.1", port);
    const auto login = body_of(http.Post("/login", R"({"id": "careless"})", "application/json"));
    const httplib::Headers auth{{"Authorization", "Bearer " + login.value("token", "")}};
    json task = login["task"];
    int status = 200;
    for (int i = 0; i < 12 && status == 200; ++i) {
      const auto r = http.Post("/submit", auth, json{{"item_key", task["item_key"]}, {"labels", {{"label", "a"}}}}.dump(),
                               "application/json");
      status = r ? r->status : -1;
      task = body_of(r);
    }
    c.expect(status == 403, "failed attention with on_fail block: last status " + std::to_string(status));
    c.expect(server.sessions().state("url:careless").stage == Stage::blocked, "user not blocked");
  }
  c.note("prestudy 3/4 pass and 2/4 block over HTTP, insertion counts, export/training exclusion, 403 when blocked");
}

// ---------------------------------------------------------------------------
// 9. load harness

void load_harness(Checks& c) {
  TempDir dir;
  const auto config = annoserve::testing::simple_task(dir.path(), 50);
  AnnotationServer server(config, InstanceStore(load_instances(config)), quiet_options());
  const int port = server.start("127.0.0.1", 0);
  const int threads = 20, per_thread = 50;
  std::vector<std::vector<double>> latencies(threads);
  std::atomic<int> bypass{0}, errors{0}, rejected{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      httplib::Client http("127.0.0.1", port);
      http.set_keep_alive(true);
      http.set_tcp_nodelay(true);
      Rng rng(derive_seed(t, "load"));
      auto post = [&](const std::string& path, const json& body, const std::string& token) {
        httplib::Headers h;
        if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
        return http.Post(path, h, body.dump(), "application/json");
      };
      const auto res = post("/login", {{"id", "load" + std::to_string(t)}}, "");
      if (!res || res->status != 200) {
        std::cerr << "login failed: " << (res ? std::to_string(res->status) + " " + res->body : httplib::to_string(res.error())) << "\n";
        ++errors;
        return;
      }
      const auto login = body_of(res);
      const std::string token = login.value("token", "");
      json task = login["task"];
      for (int i = 0; i < per_thread; ++i) {
        if (i % 5 == 0) {
          const json bad = i % 10 == 0 ? json{{"label", "not-an-option"}} : json::object();
          const auto r = post("/submit", {{"item_key", task["item_key"]}, {"labels", bad}}, token);
          if (r && r->status == 200) ++bypass;
          if (r && r->status == 422) ++rejected;
        }
        const json req{{"item_key", task["item_key"]},
                       {"labels", {{"label", std::string(1, static_cast<char>('a' + uniform_index(rng, 3)))}}},
                       {"elapsed_ms", 200},
                       {"revision", 0}};
        const auto t0 = Clock::now();
        const auto r = post("/submit", req, token);
        latencies[t].push_back(seconds_since(t0) * 1000.0);
        if (!r || r->status != 200) {
          ++errors;
          return;
        }
        if (i % 10 == 3) post("/submit", req, token);  // client retry
        task = body_of(r);
      }
    });
  }
  for (auto& th : pool) th.join();
  std::vector<double> all;
  for (const auto& l : latencies) all.insert(all.end(), l.begin(), l.end());
  const double p95 = annoserve::testing::percentile(all, 95);

  httplib::Client admin("127.0.0.1", port);
  admin.set_basic_auth("admin", "secret");
  const auto r = admin.Post("/admin/export", R"({"format": "jsonl"})", "application/json");
  c.expect(r && r->status == 200, "export request failed");
  const auto exported = read_export(config.resolve(config.server.output_dir) / "export", config, ExportFormat::jsonl);
  std::set<std::pair<std::string, std::string>> unique;
  for (const auto& rec : exported.records) {
    unique.insert({rec.user, rec.instance_id});
    const auto v = rec.labels.value("label", "");
    if (v != "a" && v != "b" && v != "c") ++bypass;
  }
  c.expect(errors == 0, std::to_string(errors.load()) + " valid submissions failed");
  c.expect(bypass == 0, std::to_string(bypass.load()) + " invalid submissions accepted");
  c.expect(rejected == threads * per_thread / 5, "422 responses " + std::to_string(rejected.load()));
  c.expect(exported.records.size() == 1000, "export count " + std::to_string(exported.records.size()));
  c.expect(unique.size() == exported.records.size(), "duplicate (user, instance) pairs in export");
  c.expect(p95 < 100.0, "p95 submit latency " + fmt(p95, 1) + " ms");
  c.note("1000 submits, " + std::to_string(rejected.load()) + " invalid rejected, p95 " + fmt(p95, 2) + " ms");
}

// ---------------------------------------------------------------------------
// 10. long-document task feasibility

void long_document_task(Checks& c) {
  auto config = load_config(annoserve::testing::templates_dir() / "task1_long_doc" / "config.yaml");
  std::size_t labels = 0, tooltips = 0, patterns = 0;
  std::set<std::string> keys;
  for (const auto& s : config.schemes) {
    for (const auto& o : s.options) {
      ++labels;
      tooltips += o.tooltip && !o.tooltip->empty();
      if (o.key) keys.insert(*o.key);
    }
  }
  for (const auto& g : config.highlight->keyword_groups) patterns += g.patterns.size();
  c.expect(labels == 22, std::to_string(labels) + " labels");
  c.expect(keys.size() == 22, std::to_string(keys.size()) + " distinct keybindings");
  c.expect(patterns == 118, std::to_string(patterns) + " keyword patterns");
  c.expect(tooltips == labels, std::to_string(tooltips) + " tooltips");

  TempDir out;
  config.server.output_dir = out.path().string();
  auto sm = open_manager(config);
  const auto user = sm->signup("annotator@example.org", "long-doc-pass");
  Rng rng(10);
  std::size_t highlighted = 0, chars = 0;
  for (int i = 0; i < 10; ++i) {
    const auto m = sm->current(user);
    if (!c.expect(m.step == StepKind::instance, "step " + std::to_string(i) + " is not an instance")) return;
    highlighted += m.highlights.size();
    c.expect(m.widgets.size() == 2, "expected two label widgets");
    const auto s = sm->state(user);
    const auto& inst = *sm->store().find(s.queue[s.cursor].id);
    chars += inst.document_length(0);
    const auto labels_json = annoserve::testing::random_valid_labels(config, inst, rng);
    const auto next = sm->submit(user, {m.item_key, labels_json, 60000, m.revision});
    c.expect(next.progress.completed == static_cast<std::size_t>(i + 1), "progress did not advance");
  }
  const auto store = sm->annotation_store();
  c.expect(store.records.size() == 10, "store holds " + std::to_string(store.records.size()));
  c.expect(highlighted > 0, "no highlights rendered");
  c.note("22 labels/keys/tooltips, 118 patterns; 10 documents (" + std::to_string(chars / 10) + " chars avg, " +
         std::to_string(highlighted) + " highlights) annotated");
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<void(Checks&)> run;
  };
  const std::vector<Criterion> criteria{
      {"config round-trip and wizard", config_round_trip},
      {"ingestion equivalence and export round-trip", ingestion_equivalence},
      {"scheme validation matrix", scheme_matrix},
      {"resume, assignment and kill-restart", resume_and_recovery},
      {"active-learning oracle", learning_oracle},
      {"active-learning efficiency", learning_efficiency},
      {"highlighter statistics", highlighter_statistics},
      {"quality-control flow", quality_flow},
      {"load harness", load_harness},
      {"long-document task feasibility", long_document_task},
  };
  // optional arguments select criteria by number
  std::set<std::size_t> only;
  for (int a = 1; a < argc; ++a) only.insert(std::stoul(argv[a]));
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    ++ran;
    Checks checks;
    const auto t0 = Clock::now();
    try {
      criteria[i].run(checks);
    } catch (const std::exception& e) {
      checks.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = checks.ok();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].name << " (" << fmt(seconds_since(t0), 2)
              << " s): " << checks.summary() << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
