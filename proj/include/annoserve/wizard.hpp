#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "annoserve/config.hpp"

namespace annoserve {

/// Source of answers for the config wizard.
class PromptStream {
 public:
  virtual ~PromptStream() = default;
  /// Returns the next answer, or nullopt when input is exhausted.
  virtual std::optional<std::string> ask(const std::string& prompt) = 0;
  virtual void tell(const std::string& message) = 0;
  /// Interactive streams re-prompt on a bad answer; scripted ones fail.
  virtual bool interactive() const = 0;
};

/// Pre-recorded answers, one per prompt.
class ScriptedPrompts final : public PromptStream {
 public:
  explicit ScriptedPrompts(std::vector<std::string> answers) : answers_(std::move(answers)) {}
  std::optional<std::string> ask(const std::string& prompt) override;
  void tell(const std::string&) override {}
  bool interactive() const override { return false; }
  const std::vector<std::string>& prompts() const { return prompts_; }
  std::size_t consumed() const { return next_; }

 private:
  std::vector<std::string> answers_;
  std::vector<std::string> prompts_;
  std::size_t next_ = 0;
};

/// Terminal prompts over arbitrary streams.
class StreamPrompts final : public PromptStream {
 public:
  StreamPrompts(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  std::optional<std::string> ask(const std::string& prompt) override;
  void tell(const std::string& message) override;
  bool interactive() const override { return true; }

 private:
  std::istream& in_;
  std::ostream& out_;
};

class WizardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WizardResult {
  TaskConfig config;
  std::string yaml;
};

/// Asks for task name, data files, id/text/image fields, each scheme (name,
/// kind, description, options with optional keys and tooltips, likert
/// range, required flag), instructions, login mode, assignment, highlight
/// groups, active-learning settings and server settings. Blank answers take
/// the shown default. `base_dir` anchors relative paths of the result.
WizardResult run_config_wizard(PromptStream& prompts, const std::filesystem::path& base_dir);

/// Reads a scripted answer file: one answer per line, `#` comment lines are
/// skipped and a blank line is an empty answer (take the default).
std::vector<std::string> read_answer_file(const std::filesystem::path& path);

}  // namespace annoserve
