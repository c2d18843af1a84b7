#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace annoserve {

/// Error surfaced to HTTP clients with its status code.
///   401 unauthenticated, 403 blocked, 404 unknown, 409 stale, 422 invalid.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message,
           nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}

  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const nlohmann::json& detail() const { return detail_; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"error", code_}, {"message", what()}};
    if (!detail_.empty()) j["detail"] = detail_;
    return j;
  }

 private:
  int status_;
  std::string code_;
  nlohmann::json detail_;
};

}  // namespace annoserve
