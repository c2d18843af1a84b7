#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace annoserve {

/// Hex string of `bytes` bytes from the OpenSSL CSPRNG.
std::string random_hex(std::size_t bytes);

/// PBKDF2-HMAC-SHA256, hex encoded. The salt string is used as given (the
/// stored salt is itself hex text).
std::string hash_password(std::string_view password, std::string_view salt_hex, int iterations);
bool verify_password(std::string_view password, std::string_view salt_hex, std::string_view hash_hex,
                     int iterations);

/// Standard base64 decoding; nullopt on malformed input.
std::optional<std::string> base64_decode(std::string_view text);

/// Constant-time comparison for credentials.
bool secure_equals(std::string_view a, std::string_view b);

struct ApiSession {
  std::string token;
  std::string user_id;
  std::chrono::system_clock::time_point issued;
  std::chrono::system_clock::time_point expires;
};

/// In-memory cookie sessions with 128-bit tokens.
class SessionTokens {
 public:
  explicit SessionTokens(std::chrono::minutes ttl) : ttl_(ttl) {}

  ApiSession issue(const std::string& user_id);
  /// Returns the user for a live token; expired tokens are dropped.
  std::optional<std::string> resolve(const std::string& token);
  void revoke(const std::string& token);

 private:
  std::chrono::minutes ttl_;
  std::mutex mu_;
  std::map<std::string, ApiSession> sessions_;
};

}  // namespace annoserve
