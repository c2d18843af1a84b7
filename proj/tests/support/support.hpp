#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/config.hpp"
#include "annoserve/instance.hpp"
#include "annoserve/random.hpp"

namespace annoserve::testing {

/// Fresh directory under $TMPDIR (or /tmp), removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path templates_dir();

void write_text(const std::filesystem::path& path, const std::string& text);

/// Parses YAML text whose relative paths resolve against `dir`.
TaskConfig config_from_yaml(const std::string& yaml, const std::filesystem::path& dir);

/// Writes `n` single-text records to <dir>/data.jsonl and returns a config
/// for them with one radio scheme ("label": a/b/c) plus `extra_yaml`
/// appended at top level.
TaskConfig simple_task(const std::filesystem::path& dir, std::size_t n, const std::string& extra_yaml = {});

/// A valid submission for every scheme of `config` on `instance`, drawn from
/// `rng`; span and best-worst values respect the instance.
nlohmann::json random_valid_labels(const TaskConfig& config, const Instance& instance, Rng& rng);

/// Percentile (0-100) by nearest rank.
double percentile(std::vector<double> values, double p);

}  // namespace annoserve::testing
