#include "msc/npy_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace msc {

namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kPreamble = 10;  // magic(6) + version(2) + header length(2)
constexpr std::size_t kAlign = 64;

static_assert(std::endian::native == std::endian::little, "npy payloads are decoded as little-endian");

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::IoFailure, "read failed for " + path.string());
  return std::move(buf).str();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Text following `'key':` in the header dict.
std::string_view dict_value(std::string_view dict, std::string_view key) {
  const std::string quoted = "'" + std::string(key) + "'";
  auto pos = dict.find(quoted);
  if (pos == std::string_view::npos) throw Error(Errc::BadShape, "npy header lacks key " + quoted);
  pos = dict.find(':', pos + quoted.size());
  if (pos == std::string_view::npos) throw Error(Errc::BadShape, "npy header key " + quoted + " has no value");
  return trim(dict.substr(pos + 1));
}

Shape3 parse_shape(std::string_view value) {
  if (value.empty() || value.front() != '(') throw Error(Errc::BadShape, "npy shape is not a tuple");
  const auto close = value.find(')');
  if (close == std::string_view::npos) throw Error(Errc::BadShape, "npy shape tuple is unterminated");
  std::string_view body = value.substr(1, close - 1);

  std::vector<Index> dims;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = trim(body.substr(0, comma));
    if (!item.empty()) {
      Index d = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), d);
      if (ec != std::errc{} || ptr != item.data() + item.size())
        throw Error(Errc::BadShape, "npy shape entry '" + std::string(item) + "' is not an integer");
      dims.push_back(d);
    }
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  if (dims.size() != 3)
    throw Error(Errc::BadShape, "expected a 3-dimensional array, got " + std::to_string(dims.size()) + " dimensions");
  const Shape3 shape{dims[0], dims[1], dims[2]};
  if (!shape.valid()) throw Error(Errc::BadShape, "npy shape " + to_string(shape) + " has an empty dimension");
  return shape;
}

std::string header_dict(DType dtype, const Shape3& s) {
  return "{'descr': '" + std::string(dtype_code(dtype)) + "', 'fortran_order': False, 'shape': (" +
         std::to_string(s.x) + ", " + std::to_string(s.y) + ", " + std::to_string(s.z) + "), }";
}

template <typename T>
void decode_payload(std::string_view payload, Volume3D::Storage& out) {
  for (Index i = 0; i < out.size(); ++i) {
    T value;
    std::memcpy(&value, payload.data() + static_cast<std::size_t>(i) * sizeof(T), sizeof(T));
    out[i] = static_cast<double>(value);
  }
}

template <typename T>
void encode_payload(const Volume3D::Storage& data, std::string& out) {
  const std::size_t start = out.size();
  out.resize(start + static_cast<std::size_t>(data.size()) * sizeof(T));
  for (Index i = 0; i < data.size(); ++i) {
    const T value = static_cast<T>(data[i]);
    std::memcpy(out.data() + start + static_cast<std::size_t>(i) * sizeof(T), &value, sizeof(T));
  }
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

}  // namespace

DType parse_dtype(std::string_view code) {
  if (code == "<f4") return DType::Float32;
  if (code == "<f8") return DType::Float64;
  throw Error(Errc::UnsupportedDtype, "unsupported dtype '" + std::string(code) + "'; expected <f4 or <f8");
}

NpyHeader parse_npy_header(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic)
    throw Error(Errc::MagicMismatch, "missing \\x93NUMPY magic");
  if (bytes.size() < kPreamble) throw Error(Errc::Truncated, "npy preamble is truncated");
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0)
    throw Error(Errc::UnsupportedVersion,
                "npy version " + std::to_string(major) + "." + std::to_string(minor) + " is not 1.0");
  const std::size_t header_len =
      static_cast<unsigned char>(bytes[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreamble + header_len) throw Error(Errc::Truncated, "npy header is truncated");
  const std::string_view dict = bytes.substr(kPreamble, header_len);

  NpyHeader header;
  header.data_offset = kPreamble + header_len;

  const std::string_view descr = dict_value(dict, "descr");
  if (descr.size() < 2 || (descr.front() != '\'' && descr.front() != '"'))
    throw Error(Errc::UnsupportedDtype, "npy descr is not a string");
  const auto end = descr.find(descr.front(), 1);
  if (end == std::string_view::npos) throw Error(Errc::UnsupportedDtype, "npy descr is unterminated");
  header.dtype = parse_dtype(descr.substr(1, end - 1));

  const std::string_view order = dict_value(dict, "fortran_order");
  if (order.starts_with("True")) {
    header.fortran_order = true;
    throw Error(Errc::UnsupportedLayout, "Fortran-order arrays are not accepted");
  }
  if (!order.starts_with("False")) throw Error(Errc::UnsupportedLayout, "npy fortran_order is not a boolean");

  header.shape = parse_shape(dict_value(dict, "shape"));
  return header;
}

Volume3D decode_npy(std::string_view bytes) {
  const NpyHeader header = parse_npy_header(bytes);
  const std::size_t item = header.dtype == DType::Float32 ? 4 : 8;
  const std::size_t needed = static_cast<std::size_t>(header.shape.count()) * item;
  const std::string_view payload = bytes.substr(header.data_offset);
  if (payload.size() < needed)
    throw Error(Errc::Truncated, "npy payload holds " + std::to_string(payload.size()) + " bytes, shape " +
                                     to_string(header.shape) + " needs " + std::to_string(needed));

  Volume3D::Storage data(header.shape.count());
  if (header.dtype == DType::Float32) decode_payload<float>(payload, data);
  else decode_payload<double>(payload, data);
  return Volume3D(header.shape, std::move(data));
}

Volume3D read_npy(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_npy(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string encode_npy(const Volume3D& volume, DType dtype) {
  std::string dict = header_dict(dtype, volume.shape());
  const std::size_t unpadded = kPreamble + dict.size() + 1;
  dict.append((kAlign - unpadded % kAlign) % kAlign, ' ');
  dict.push_back('\n');

  std::string out;
  out.reserve(kPreamble + dict.size() + static_cast<std::size_t>(volume.size()) * 8);
  out.append(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(dict.size() & 0xff));
  out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
  out.append(dict);
  if (dtype == DType::Float32) encode_payload<float>(volume.array(), out);
  else encode_payload<double>(volume.array(), out);
  return out;
}

void write_npy(const Volume3D& volume, const std::filesystem::path& path, DType dtype) {
  const std::string bytes = encode_npy(volume, dtype);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::filesystem::path Manifest::resolve(const ManifestEntry& e) const {
  const std::filesystem::path p(e.volume_path);
  return p.is_absolute() || source_dir.empty() ? p : source_dir / p;
}

const ManifestEntry* Manifest::find(std::string_view subject_id) const {
  for (const auto& e : entries)
    if (e.subject_id == subject_id) return &e;
  return nullptr;
}

Manifest parse_manifest(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  Manifest manifest;
  std::unordered_map<std::string, std::size_t> seen;
  int col_subject = -1, col_path = -1, col_age = -1;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  bool have_header = false;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    const auto fields = split_csv(line);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "subject_id") col_subject = static_cast<int>(i);
        else if (fields[i] == "volume_path") col_path = static_cast<int>(i);
        else if (fields[i] == "age_years") col_age = static_cast<int>(i);
      }
      for (auto [col, name] : {std::pair{col_subject, "subject_id"}, std::pair{col_path, "volume_path"},
                               std::pair{col_age, "age_years"}})
        if (col < 0) throw Error(Errc::MissingColumn, "manifest header lacks column '" + std::string(name) + "'");
      columns = fields.size();
      have_header = true;
      continue;
    }

    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != columns)
      throw Error(Errc::MalformedRow, where + ": expected " + std::to_string(columns) + " fields, got " +
                                          std::to_string(fields.size()));
    ManifestEntry entry{std::string(fields[col_subject]), std::string(fields[col_path]), 0.0};
    if (entry.subject_id.empty()) throw Error(Errc::MalformedRow, where + ": empty subject_id");
    if (entry.volume_path.empty()) throw Error(Errc::MalformedRow, where + ": empty volume_path");

    const std::string_view age = fields[col_age];
    const auto [ptr, ec] = std::from_chars(age.data(), age.data() + age.size(), entry.age_years);
    if (ec != std::errc{} || ptr != age.data() + age.size() || !std::isfinite(entry.age_years))
      throw Error(Errc::MalformedRow, where + ": age_years '" + std::string(age) + "' is not a number");
    if (entry.age_years <= 0.0)
      throw Error(Errc::NonPositiveAge, where + ": age_years must be > 0, got " + std::string(age));

    if (const auto it = seen.find(entry.subject_id); it != seen.end())
      throw Error(Errc::DuplicateSubject, where + ": subject '" + entry.subject_id + "' already listed on line " +
                                              std::to_string(it->second));
    seen.emplace(entry.subject_id, line_no);
    manifest.entries.push_back(std::move(entry));
  }
  if (!have_header) throw Error(Errc::MissingColumn, "manifest is empty; expected a header row");
  return manifest;
}

Manifest read_manifest(const std::filesystem::path& path) {
  Manifest manifest = parse_manifest(read_file(path));
  manifest.source_dir = path.parent_path();
  return manifest;
}

}  // namespace msc
