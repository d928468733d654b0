#include "scenegan/class_grouping.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace scenegan {

void LabelMap::validate() const {
  require(height() > 0 && width() > 0, "label map must be non-empty");
  require(num_classes > 0, "label map must declare at least one class");
  const auto lo = values.minCoeff();
  const auto hi = values.maxCoeff();
  if (lo < 0 || hi >= num_classes)
    throw std::invalid_argument("label value " + std::to_string(lo < 0 ? lo : hi) + " outside [0, " +
                                std::to_string(num_classes) + ")");
}

RemapTable RemapTable::from_entries(std::vector<SuperClass> entries, int declared_sources) {
  if (entries.size() < 2) throw SchemaError("remap table needs at least two super-classes");
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].index != static_cast<int>(i))
      throw SchemaError("super-class indices must be exactly 0.." + std::to_string(entries.size() - 1) +
                        "; found gap or duplicate at " + std::to_string(entries[i].index));
    if (entries[i].sources.empty()) throw SchemaError("super-class '" + entries[i].name + "' has no source classes");
  }

  int max_source = -1;
  for (const auto& e : entries)
    for (int s : e.sources) {
      if (s < 0) throw SchemaError("negative source index " + std::to_string(s));
      max_source = std::max(max_source, s);
    }
  if (declared_sources > 0 && max_source >= declared_sources)
    throw PartitionError(max_source, "source index " + std::to_string(max_source) + " exceeds declared class count " +
                                         std::to_string(declared_sources));
  const int count = declared_sources > 0 ? declared_sources : max_source + 1;

  RemapTable table;
  table.lookup_.assign(static_cast<std::size_t>(count), -1);
  for (const auto& e : entries) {
    for (int s : e.sources) {
      auto& slot = table.lookup_[static_cast<std::size_t>(s)];
      if (slot != -1)
        throw PartitionError(s, "source class " + std::to_string(s) + " appears in more than one super-class");
      slot = e.index;
    }
  }
  for (int s = 0; s < count; ++s)
    if (table.lookup_[static_cast<std::size_t>(s)] == -1)
      throw PartitionError(s, "source class " + std::to_string(s) + " is not assigned to any super-class");
  table.entries_ = std::move(entries);
  return table;
}

RemapTable RemapTable::identity(int classes) {
  std::vector<SuperClass> entries;
  for (int c = 0; c < classes; ++c) entries.push_back({"class_" + std::to_string(c), c, {c}, {}});
  auto table = from_entries(std::move(entries), classes);
  table.name = "identity";
  return table;
}

RemapTable parse_remap_table(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("remap table is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("super_classes") || !doc["super_classes"].is_array())
    throw SchemaError("remap table needs a 'super_classes' list");

  std::vector<SuperClass> entries;
  for (const auto& item : doc["super_classes"]) {
    if (!item.contains("name") || !item.contains("index") || !item.contains("sources"))
      throw SchemaError("each super-class needs 'name', 'index' and 'sources'");
    SuperClass sc;
    try {
      sc.name = item.at("name").get<std::string>();
      sc.index = item.at("index").get<int>();
      sc.sources = item.at("sources").get<std::vector<int>>();
      if (item.contains("color")) {
        const auto rgb = item.at("color").get<std::vector<int>>();
        if (rgb.size() != 3) throw SchemaError("color of '" + sc.name + "' must have three components");
        for (int i = 0; i < 3; ++i) sc.color[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::clamp(rgb[static_cast<std::size_t>(i)], 0, 255));
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed super-class entry: ") + e.what());
    }
    entries.push_back(std::move(sc));
  }
  const int declared = doc.value("num_source_classes", 0);
  auto table = RemapTable::from_entries(std::move(entries), declared);
  table.name = doc.value("name", std::string{});
  return table;
}

RemapTable load_remap_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open remap table " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_remap_table(buffer.str());
}

std::string serialize_remap_table(const RemapTable& table) {
  nlohmann::json doc;
  doc["name"] = table.name;
  doc["num_source_classes"] = table.num_source_classes();
  for (const auto& e : table.entries())
    doc["super_classes"].push_back(
        {{"name", e.name}, {"index", e.index}, {"sources", e.sources}, {"color", {e.color[0], e.color[1], e.color[2]}}});
  return doc.dump(2);
}

LabelMap remap(const LabelMap& map, const RemapTable& table) {
  LabelMap out(map.height(), map.width(), table.num_super_classes());
  for (Eigen::Index i = 0; i < map.values.size(); ++i) {
    const int target = table.lookup(map.values.data()[i]);
    if (target < 0) throw UnmappedClassError(map.values.data()[i]);
    out.values.data()[i] = target;
  }
  return out;
}

std::set<int> unmapped_values(const LabelMap& map, const RemapTable& table) {
  std::set<int> missing;
  for (Eigen::Index i = 0; i < map.values.size(); ++i)
    if (table.lookup(map.values.data()[i]) < 0) missing.insert(map.values.data()[i]);
  return missing;
}

std::vector<std::int64_t> class_counts(const LabelMap& map) {
  map.validate();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(map.num_classes), 0);
  for (Eigen::Index i = 0; i < map.values.size(); ++i) ++counts[static_cast<std::size_t>(map.values.data()[i])];
  return counts;
}

std::vector<double> class_statistics(const LabelMap& map) {
  const auto counts = class_counts(map);
  const double total = static_cast<double>(map.values.size());
  std::vector<double> fractions(counts.size());
  std::transform(counts.begin(), counts.end(), fractions.begin(), [total](auto n) { return static_cast<double>(n) / total; });
  return fractions;
}

}  // namespace scenegan
