#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace annoserve {

struct TemplateEntry {
  std::string id;
  std::string description;
  std::filesystem::path dir;
  std::filesystem::path config_file;
  std::filesystem::path data_file;
};

class GalleryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// $ANNOSERVE_TEMPLATES if set, else the directory compiled in at build time.
std::filesystem::path template_root();

/// Entries of <root>/catalog.yaml in catalog order.
std::vector<TemplateEntry> list_templates(const std::filesystem::path& root = template_root());

/// Copies a template directory into `out_dir` (created; must be empty or
/// absent) and returns the path of the copied config.
std::filesystem::path scaffold(const std::string& template_id, const std::filesystem::path& out_dir,
                               const std::filesystem::path& root = template_root());

}  // namespace annoserve
