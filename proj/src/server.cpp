#include "annoserve/server.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "annoserve/errors.hpp"
#include "annoserve/export.hpp"
#include "annoserve/html.hpp"
#include "annoserve/security.hpp"

namespace annoserve {

using nlohmann::json;

namespace {

constexpr const char* kCookie = "annoserve_session";

bool wants_json(const httplib::Request& req) {
  return req.get_header_value("Content-Type").find("application/json") != std::string::npos;
}

json request_body(const httplib::Request& req) {
  if (!wants_json(req)) return json::object();
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ApiError(400, "bad_request", "request body must be a JSON object");
  return j;
}

std::string param(const httplib::Request& req, const json& body, const std::string& name) {
  if (const auto it = body.find(name); it != body.end()) {
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
  }
  return req.has_param(name) ? req.get_param_value(name) : std::string();
}

std::optional<std::string> session_token(const httplib::Request& req) {
  const auto auth = req.get_header_value("Authorization");
  if (auth.rfind("Bearer ", 0) == 0) return auth.substr(7);
  const auto cookies = req.get_header_value("Cookie");
  const std::string prefix = std::string(kCookie) + "=";
  std::size_t pos = 0;
  while (pos < cookies.size()) {
    auto end = cookies.find(';', pos);
    if (end == std::string::npos) end = cookies.size();
    auto item = cookies.substr(pos, end - pos);
    const auto b = item.find_first_not_of(' ');
    if (b != std::string::npos) item = item.substr(b);
    if (item.rfind(prefix, 0) == 0) return item.substr(prefix.size());
    pos = end + 1;
  }
  return std::nullopt;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::size_t parse_size(const std::string& s, const char* what) {
  if (s.empty()) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoll(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(what);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ApiError(422, "invalid", std::string(what) + " must be a non-negative integer");
  }
}

}  // namespace

struct AnnotationServer::Impl {
  const TaskConfig& config;
  SessionManager sessions;
  SessionTokens tokens;
  httplib::Server http;
  std::thread thread;

  Impl(const TaskConfig& c, InstanceStore store, SessionOptions options)
      : config(c),
        sessions(c, std::move(store), std::move(options)),
        tokens(std::chrono::minutes(c.server.session_ttl_minutes)) {
    http.new_task_queue = [] { return new httplib::ThreadPool(64); };
    routes();
  }

  // Runs a handler, mapping ApiError (and anything unexpected) to a response.
  template <typename F>
  auto guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      const bool html = req.has_param("format") && req.get_param_value("format") == "html";
      try {
        f(req, res);
      } catch (const ApiError& e) {
        if (html || (!wants_json(req) && req.method == "POST" && req.path != "/admin/export")) {
          res.status = e.status();
          if (e.status() == 401) {
            res.set_content(login_page_html(config, e.what()), "text/html; charset=utf-8");
          } else {
            res.set_content(std::string("<!DOCTYPE html><p>") + html_escape(e.what()) + "</p>", "text/html; charset=utf-8");
          }
        } else {
          send_json(res, e.status(), e.to_json());
        }
      } catch (const std::exception& e) {
        std::cerr << "internal error on " << req.method << " " << req.path << ": " << e.what() << "\n";
        send_json(res, 500, {{"error", "internal"}, {"message", "internal server error"}});
      }
    };
  }

  std::string require_user(const httplib::Request& req) {
    const auto token = session_token(req);
    if (!token) throw ApiError(401, "unauthenticated", "login required");
    const auto user = tokens.resolve(*token);
    if (!user) throw ApiError(401, "unauthenticated", "session expired or unknown");
    return *user;
  }

  void require_admin(const httplib::Request& req) {
    const auto header = req.get_header_value("Authorization");
    const auto& s = config.server;
    if (!s.admin_password.empty() && header.rfind("Basic ", 0) == 0) {
      if (const auto decoded = base64_decode(header.substr(6))) {
        const auto colon = decoded->find(':');
        if (colon != std::string::npos && secure_equals(decoded->substr(0, colon), s.admin_user) &&
            secure_equals(decoded->substr(colon + 1), s.admin_password)) {
          return;
        }
      }
    }
    throw ApiError(401, "unauthenticated", "admin credentials required");
  }

  void logged_in(const httplib::Request& req, httplib::Response& res, const std::string& user) {
    const auto session = tokens.issue(user);
    res.set_header("Set-Cookie", std::string(kCookie) + "=" + session.token + "; Path=/; HttpOnly; SameSite=Lax; Max-Age=" +
                                     std::to_string(config.server.session_ttl_minutes * 60));
    if (wants_json(req)) {
      send_json(res, 200, {{"user", user}, {"token", session.token}, {"task", to_json(sessions.current(user))}});
    } else {
      res.status = 303;
      res.set_header("Location", "/task?format=html");
    }
  }

  void respond_task(const httplib::Request& req, httplib::Response& res, const RenderModel& m) {
    const bool html = (req.has_param("format") && req.get_param_value("format") == "html") ||
                      (req.method == "POST" && !wants_json(req));
    if (html) {
      if (req.method == "POST") {
        res.status = 303;
        res.set_header("Location", "/task?format=html");
        return;
      }
      res.set_content(render_html(m, config.task_name), "text/html; charset=utf-8");
      return;
    }
    send_json(res, 200, to_json(m));
  }

  void routes() {
    http.Post("/signup", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = request_body(req);
      logged_in(req, res, sessions.signup(param(req, body, "email"), param(req, body, "password")));
    }));
    http.Post("/login", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = request_body(req);
      const auto id = param(req, body, "id");
      const auto user = id.empty() ? sessions.login_email(param(req, body, "email"), param(req, body, "password"))
                                   : sessions.login_url(id);
      logged_in(req, res, user);
    }));
    http.Post("/logout", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (const auto token = session_token(req)) tokens.revoke(*token);
      res.set_header("Set-Cookie", std::string(kCookie) + "=; Path=/; Max-Age=0");
      send_json(res, 200, {{"ok", true}});
    }));
    http.Get("/", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (req.has_param("id")) {
        const auto user = sessions.login_url(req.get_param_value("id"));
        const auto session = tokens.issue(user);
        res.set_header("Set-Cookie", std::string(kCookie) + "=" + session.token + "; Path=/; HttpOnly; SameSite=Lax");
        res.status = 303;
        res.set_header("Location", "/task?format=html");
        return;
      }
      res.set_content(login_page_html(config), "text/html; charset=utf-8");
    }));
    http.Get("/task", guarded([this](const httplib::Request& req, httplib::Response& res) {
      respond_task(req, res, sessions.current(require_user(req)));
    }));
    http.Post("/submit", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto user = require_user(req);
      const auto body = request_body(req);
      SubmitRequest sub;
      sub.item_key = param(req, body, "item_key");
      if (wants_json(req)) {
        sub.labels = body.value("labels", json::object());
        sub.elapsed_ms = body.value("elapsed_ms", std::int64_t{0});
        sub.revision = body.value("revision", std::size_t{0});
      } else {
        std::multimap<std::string, std::string> fields(req.params.begin(), req.params.end());
        const auto model = sessions.current(user);
        std::vector<AnnotationScheme> schemes;
        schemes.reserve(model.widgets.size());
        for (const auto& w : model.widgets) {
          AnnotationScheme s;
          s.name = w.scheme;
          s.kind = w.kind;
          schemes.push_back(std::move(s));
        }
        sub.labels = labels_from_form(fields, schemes);
        sub.elapsed_ms = static_cast<std::int64_t>(parse_size(param(req, body, "elapsed_ms"), "elapsed_ms"));
        sub.revision = parse_size(param(req, body, "revision"), "revision");
      }
      respond_task(req, res, sessions.submit(user, sub));
    }));
    http.Post("/navigate", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto user = require_user(req);
      const auto body = request_body(req);
      const auto dir = param(req, body, "direction");
      if (dir != "back" && dir != "forward") throw ApiError(422, "invalid", "direction must be back or forward");
      respond_task(req, res, sessions.navigate(user, dir == "back" ? Direction::back : Direction::forward));
    }));
    http.Get("/admin/progress", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_admin(req);
      send_json(res, 200, to_json(sessions.progress()));
    }));
    http.Post("/admin/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
      require_admin(req);
      const auto body = request_body(req);
      auto name = param(req, body, "format");
      if (name.empty()) name = "jsonl";
      const auto format = parse_export_format(name);
      if (!format) throw ApiError(422, "invalid", "format must be jsonl or csv");
      const auto dir = config.resolve(config.server.output_dir) / "export";
      const auto result = export_annotations(sessions.annotation_store(), config, *format, dir);
      json files = json::array();
      for (const auto& f : result.files) files.push_back(f.string());
      send_json(res, 200, {{"files", files}, {"records", result.records}});
    }));
    if (!config.server.static_dir.empty()) {
      http.set_mount_point("/app", config.resolve(config.server.static_dir).string());
    }
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) send_json(res, 404, {{"error", "not_found"}, {"message", "no such endpoint"}});
    });
  }
};

void apply_env_overrides(TaskConfig& config) {
  if (const char* port = std::getenv("ANNOSERVE_PORT"); port && *port) {
    try {
      config.server.port = std::stoi(port);
    } catch (const std::exception&) {
      throw std::runtime_error(std::string("ANNOSERVE_PORT is not a number: ") + port);
    }
  }
  if (const char* dir = std::getenv("ANNOSERVE_OUTPUT_DIR"); dir && *dir) config.server.output_dir = dir;
}

AnnotationServer::AnnotationServer(const TaskConfig& config, InstanceStore store, SessionOptions options)
    : impl_(std::make_unique<Impl>(config, std::move(store), std::move(options))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void AnnotationServer::run() { impl_->http.listen_after_bind(); }

int AnnotationServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { run(); });
  impl_->http.wait_until_ready();
  return bound;
}

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

SessionManager& AnnotationServer::sessions() { return impl_->sessions; }

}  // namespace annoserve
