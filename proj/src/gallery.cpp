#include "annoserve/gallery.hpp"

#include <cstdlib>

#include <yaml-cpp/yaml.h>

namespace annoserve {

std::filesystem::path template_root() {
  if (const char* env = std::getenv("ANNOSERVE_TEMPLATES"); env && *env) return env;
  return ANNOSERVE_TEMPLATE_DIR;
}

std::vector<TemplateEntry> list_templates(const std::filesystem::path& root) {
  const auto catalog = root / "catalog.yaml";
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(catalog.string());
  } catch (const YAML::Exception& e) {
    throw GalleryError("cannot read template catalog " + catalog.string() + ": " + e.what());
  }
  std::vector<TemplateEntry> out;
  for (const auto& n : doc["templates"]) {
    TemplateEntry e;
    e.id = n["id"].as<std::string>();
    e.description = n["description"].as<std::string>();
    e.dir = root / e.id;
    e.config_file = e.dir / n["config"].as<std::string>("config.yaml");
    e.data_file = e.dir / n["data"].as<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

std::filesystem::path scaffold(const std::string& template_id, const std::filesystem::path& out_dir,
                               const std::filesystem::path& root) {
  for (const auto& e : list_templates(root)) {
    if (e.id != template_id) continue;
    namespace fs = std::filesystem;
    if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
      throw GalleryError("output directory " + out_dir.string() + " is not empty");
    }
    fs::create_directories(out_dir);
    fs::copy(e.dir, out_dir, fs::copy_options::recursive);
    return out_dir / e.config_file.filename();
  }
  throw GalleryError("unknown template '" + template_id + "'");
}

}  // namespace annoserve
