#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <string>
#include <unordered_map>
#include <vector>

namespace annoserve {

enum class DocumentKind { text, image_ref };

struct Document {
  DocumentKind kind = DocumentKind::text;
  std::string payload;
  bool operator==(const Document&) const = default;
};

enum class ContentShape { single, list, map };

/// One annotatable item. For map content `keys[i]` names documents[i]; for
/// list content keys are the decimal indices; for single content the key is
/// the text field name.
struct Instance {
  std::string id;
  ContentShape shape = ContentShape::single;
  std::vector<std::string> keys;
  std::vector<Document> documents;
  std::map<std::string, std::string> display_meta;

  /// Code-point length of each document; image references count as 0.
  std::size_t document_length(std::size_t index) const;

  bool operator==(const Instance&) const = default;
};

/// Immutable, shared read-only after load.
class InstanceStore {
 public:
  InstanceStore() = default;
  explicit InstanceStore(std::vector<Instance> instances);

  const std::vector<Instance>& all() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  const Instance* find(const std::string& id) const;
  /// Position of the instance in original (file) order, or size() if absent.
  std::size_t index_of(const std::string& id) const;

 private:
  std::vector<Instance> instances_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace annoserve

#include <nlohmann/json.hpp>

namespace annoserve {

/// Which record fields become the instance id, its documents, and which of
/// those documents are image references.
struct RecordLayout {
  std::string id_field;
  std::vector<std::string> text_fields;
  bool text_field_is_list = false;
  std::vector<std::string> image_fields;
};

/// Converts one decoded record (string-valued object; list values allowed for
/// a single text field) into an Instance. Remaining fields go to display_meta
/// with non-string JSON values kept as their compact JSON text. Returns
/// std::nullopt and sets `error` when a required field is missing or empty.
std::optional<Instance> instance_from_record(const nlohmann::json& record, const RecordLayout& layout,
                                             std::string* error);

/// Syntactic URL (scheme://host...) check used for image references.
bool looks_like_url(std::string_view text);

}  // namespace annoserve
