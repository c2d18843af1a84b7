#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "annoserve/scheme.hpp"
#include "annoserve/text.hpp"

namespace annoserve::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  const char* base = std::getenv("TMPDIR");
  std::string tmpl = (fs::path(base && *base ? base : "/tmp") / "annoserve-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path templates_dir() {
  if (const char* env = std::getenv("ANNOSERVE_TEMPLATES"); env && *env) return env;
  return ANNOSERVE_TEMPLATE_DIR;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

TaskConfig config_from_yaml(const std::string& yaml, const fs::path& dir) { return parse_config(yaml, dir, true); }

TaskConfig simple_task(const fs::path& dir, std::size_t n, const std::string& extra_yaml) {
  std::string data;
  for (std::size_t i = 0; i < n; ++i) {
    data += nlohmann::json{{"id", "doc" + std::to_string(i)}, {"text", "document number " + std::to_string(i)}}.dump();
    data += "\n";
  }
  write_text(dir / "data.jsonl", data);
  std::string yaml = R"(task_name: test task
data_files: [data.jsonl]
id_field: id
text_field: text
login_mode: both
schemes:
  - name: label
    kind: radio
    options: [a, b, c]
server:
  output_dir: out
  admin_password: secret
  completion_code: DONE
)";
  return config_from_yaml(yaml + extra_yaml, dir);
}

nlohmann::json random_valid_labels(const TaskConfig& config, const Instance& instance, Rng& rng) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& s : config.schemes) {
    const auto pick = [&](const std::vector<std::string>& from) { return from[uniform_index(rng, from.size())]; };
    std::vector<std::string> values;
    for (const auto& o : s.options) values.push_back(o.value);
    switch (s.kind) {
      case SchemeKind::radio:
      case SchemeKind::dropdown:
        out[s.name] = pick(values);
        break;
      case SchemeKind::multiselect: {
        auto idx = sample_indices(rng, values.size(), 1 + uniform_index(rng, values.size()));
        nlohmann::json arr = nlohmann::json::array();
        for (auto i : idx) arr.push_back(values[i]);
        out[s.name] = arr;
        break;
      }
      case SchemeKind::best_worst: {
        const auto slots = best_worst_slots(s, instance);
        const auto idx = sample_indices(rng, slots.size(), 2);
        out[s.name] = {{"best", slots[idx[0]]}, {"worst", slots[idx[1]]}};
        break;
      }
      case SchemeKind::likert:
        out[s.name] = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(s.likert_size)));
        break;
      case SchemeKind::free_text:
        out[s.name] = "note " + std::to_string(rng() % 1000);
        break;
      case SchemeKind::number:
        out[s.name] = static_cast<double>(rng() % 100) / 4.0;
        break;
      case SchemeKind::span: {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t d = 0; d < instance.documents.size(); ++d) {
          const auto len = instance.document_length(d);
          if (len < 2) continue;
          const auto start = uniform_index(rng, len - 1);
          const auto end = start + 1 + uniform_index(rng, len - start);
          arr.push_back({{"doc", d}, {"start", start}, {"end", end}, {"label", pick(values)}});
          break;
        }
        out[s.name] = arr;
        break;
      }
    }
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

}  // namespace annoserve::testing
