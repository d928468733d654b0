#include "scenegan/archive.hpp"

#include <bit>
#include <fstream>

namespace scenegan {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'N', 'G', 'A', 'R', 'C', 'H'};

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("archive: truncated file");
  return value;
}

}  // namespace

void Archive::save(const std::filesystem::path& path) const {
  static_assert(std::endian::native == std::endian::little, "archive writer assumes a little-endian host");
  nlohmann::json header;
  header["version"] = kArchiveVersion;
  header["meta"] = meta;
  header["arrays"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& name : order_) {
    const auto& e = entries_.at(name);
    const std::size_t width = e.dtype == "f32" ? 4 : 8;
    header["arrays"].push_back(
        {{"name", name}, {"dtype", e.dtype}, {"shape", e.shape}, {"offset", offset}, {"count", e.bytes.size() / width}});
    offset += e.bytes.size();
  }
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("archive: cannot write " + path.string());
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, kArchiveVersion);
    write_pod<std::uint32_t>(out, 0);
    write_pod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& name : order_) {
      const auto& bytes = entries_.at(name).bytes;
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw std::runtime_error("archive: write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Archive Archive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("archive: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("archive: " + path.string() + " is not a scenegan archive");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kArchiveVersion)
    throw std::runtime_error("archive: unsupported version " + std::to_string(version));
  read_pod<std::uint32_t>(in);
  const auto header_len = read_pod<std::uint64_t>(in);
  const auto file_size = std::filesystem::file_size(path);
  const std::uint64_t preamble = sizeof(kMagic) + 16;
  if (header_len > file_size - preamble) throw std::runtime_error("archive: truncated header");
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("archive: truncated header");

  const auto header = nlohmann::json::parse(text, nullptr, false);
  if (header.is_discarded() || !header.is_object() || !header.contains("arrays"))
    throw std::runtime_error("archive: corrupt header in " + path.string());
  const std::uint64_t payload_size = file_size - preamble - header_len;
  Archive archive;
  archive.meta = header.value("meta", nlohmann::json::object());
  const auto data_start = in.tellg();
  for (const auto& a : header.at("arrays")) {
    Entry e;
    e.dtype = a.at("dtype").get<std::string>();
    e.shape = a.at("shape").get<std::vector<std::int64_t>>();
    const std::size_t width = e.dtype == "f32" ? 4 : 8;
    const auto offset = a.at("offset").get<std::uint64_t>(), count = a.at("count").get<std::uint64_t>();
    if (offset > payload_size || count > (payload_size - offset) / width)
      throw std::runtime_error("archive: truncated payload for " + a.at("name").get<std::string>());
    e.bytes.resize(count * width);
    in.seekg(data_start + static_cast<std::streamoff>(offset));
    in.read(e.bytes.data(), static_cast<std::streamsize>(e.bytes.size()));
    if (!in) throw std::runtime_error("archive: truncated payload for " + a.at("name").get<std::string>());
    const auto name = a.at("name").get<std::string>();
    archive.order_.push_back(name);
    archive.entries_[name] = std::move(e);
  }
  return archive;
}

}  // namespace scenegan
