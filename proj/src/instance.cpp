#include "annoserve/instance.hpp"

#include <algorithm>

#include "annoserve/text.hpp"

namespace annoserve {

std::size_t Instance::document_length(std::size_t index) const {
  if (index >= documents.size()) return 0;
  const auto& doc = documents[index];
  if (doc.kind != DocumentKind::text) return 0;
  return code_point_length(doc.payload);
}

InstanceStore::InstanceStore(std::vector<Instance> instances) : instances_(std::move(instances)) {
  by_id_.reserve(instances_.size());
  for (std::size_t i = 0; i < instances_.size(); ++i) by_id_.emplace(instances_[i].id, i);
}

const Instance* InstanceStore::find(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &instances_[it->second];
}

std::size_t InstanceStore::index_of(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? instances_.size() : it->second;
}

bool looks_like_url(std::string_view text) {
  const auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  const auto scheme = text.substr(0, sep);
  if (!std::all_of(scheme.begin(), scheme.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '+' || c == '-' ||
               c == '.';
      })) {
    return false;
  }
  const auto rest = text.substr(sep + 3);
  if (rest.empty() || rest.front() == '/') return false;
  return std::none_of(rest.begin(), rest.end(), [](char c) { return c == ' ' || c == '\n' || c == '\t'; });
}

namespace {

std::optional<std::string> scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  return std::nullopt;
}

}  // namespace

std::optional<Instance> instance_from_record(const nlohmann::json& record, const RecordLayout& layout,
                                             std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<Instance> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  if (!record.is_object()) return fail("record is not an object");
  Instance inst;
  const auto id_it = record.find(layout.id_field);
  if (id_it == record.end() || id_it->is_null()) return fail("missing id field '" + layout.id_field + "'");
  const auto id = scalar_text(*id_it);
  if (!id || id->empty()) return fail("id field '" + layout.id_field + "' must be a non-empty string");
  inst.id = *id;

  auto kind_for = [&](const std::string& field) {
    return std::find(layout.image_fields.begin(), layout.image_fields.end(), field) != layout.image_fields.end()
               ? DocumentKind::image_ref
               : DocumentKind::text;
  };

  if (!layout.text_field_is_list) {
    if (layout.text_fields.empty()) return fail("no text field configured");
    const auto& field = layout.text_fields.front();
    const auto it = record.find(field);
    if (it == record.end() || it->is_null()) return fail("missing text field '" + field + "'");
    if (it->is_array()) {
      if (it->empty()) return fail("text field '" + field + "' is an empty list");
      inst.shape = ContentShape::list;
      for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& entry = (*it)[i];
        if (!entry.is_string() || entry.get<std::string>().empty()) {
          return fail("entry " + std::to_string(i) + " of text field '" + field + "' must be a non-empty string");
        }
        inst.keys.push_back(std::to_string(i));
        inst.documents.push_back({kind_for(field), entry.get<std::string>()});
      }
    } else {
      const auto text = scalar_text(*it);
      if (!text || text->empty()) return fail("text field '" + field + "' must be a non-empty string");
      inst.shape = ContentShape::single;
      inst.keys.push_back(field);
      inst.documents.push_back({kind_for(field), *text});
    }
  } else {
    inst.shape = ContentShape::map;
    for (const auto& field : layout.text_fields) {
      const auto it = record.find(field);
      if (it == record.end() || it->is_null()) return fail("missing text field '" + field + "'");
      const auto text = scalar_text(*it);
      if (!text || text->empty()) return fail("text field '" + field + "' must be a non-empty string");
      inst.keys.push_back(field);
      inst.documents.push_back({kind_for(field), *text});
    }
  }

  for (auto it = record.begin(); it != record.end(); ++it) {
    const auto& key = it.key();
    if (key == layout.id_field) continue;
    if (std::find(layout.text_fields.begin(), layout.text_fields.end(), key) != layout.text_fields.end()) continue;
    inst.display_meta[key] = it->is_string() ? it->get<std::string>() : it->dump();
  }
  return inst;
}

}  // namespace annoserve
