#include "sigdesc/container.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "sigdesc/error.hpp"

namespace sigdesc {
namespace {

constexpr std::string_view kMagic = "SGDC";

class Writer {
 public:
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void text(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string& bytes() { return out_; }

 private:
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}

  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string text() { return std::string(raw(u32())); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error("model file is truncated");
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  constexpr std::size_t chunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += chunk) {
    const std::size_t n = std::min(chunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("'" + std::string(text) + "' is not a number");
  }
  return v;
}

void ModelContainer::set(std::string key, std::string value) {
  auto it = std::find_if(metadata_.begin(), metadata_.end(),
                         [&](const auto& kv) { return kv.first == key; });
  if (it != metadata_.end()) {
    it->second = std::move(value);
  } else {
    metadata_.emplace_back(std::move(key), std::move(value));
  }
}

void ModelContainer::set(std::string key, double value) { set(std::move(key), format_double(value)); }

void ModelContainer::set(std::string key, long long value) {
  set(std::move(key), std::to_string(value));
}

bool ModelContainer::has(std::string_view key) const {
  return std::any_of(metadata_.begin(), metadata_.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

const std::string& ModelContainer::get(std::string_view key) const {
  for (const auto& [k, v] : metadata_) {
    if (k == key) return v;
  }
  throw Error("model file lacks metadata key '" + std::string(key) + "'");
}

double ModelContainer::get_double(std::string_view key) const {
  try {
    return parse_double(get(key));
  } catch (const Error& e) {
    throw Error("metadata '" + std::string(key) + "': " + e.what());
  }
}

long long ModelContainer::get_int(std::string_view key) const {
  const std::string& s = get(key);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("metadata '" + std::string(key) + "' is not an integer: '" + s + "'");
  }
  return v;
}

void ModelContainer::add_matrix(std::string name, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Array a{std::move(name), {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
  a.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.data.push_back(m(r, c));
  }
  arrays_.push_back(std::move(a));
}

void ModelContainer::add_vector(std::string name, const Eigen::Ref<const Eigen::VectorXd>& v) {
  arrays_.push_back({std::move(name), {static_cast<std::uint64_t>(v.size())},
                     std::vector<double>(v.data(), v.data() + v.size())});
}

const ModelContainer::Array& ModelContainer::array(std::string_view name) const {
  for (const auto& a : arrays_) {
    if (a.name == name) return a;
  }
  throw Error("model file lacks array '" + std::string(name) + "'");
}

Eigen::MatrixXd ModelContainer::matrix(std::string_view name) const {
  const Array& a = array(name);
  if (a.shape.size() != 2) throw Error("array '" + a.name + "' is not two-dimensional");
  const auto rows = static_cast<Eigen::Index>(a.shape[0]), cols = static_cast<Eigen::Index>(a.shape[1]);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a.data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

Eigen::VectorXd ModelContainer::vector(std::string_view name) const {
  const Array& a = array(name);
  if (a.shape.size() != 1) throw Error("array '" + a.name + "' is not one-dimensional");
  return Eigen::Map<const Eigen::VectorXd>(a.data.data(), static_cast<Eigen::Index>(a.data.size()));
}

std::string ModelContainer::serialize() const {
  Writer w;
  w.raw(kMagic);
  w.u32(kFormatVersion);
  w.text(kind_);
  w.u32(static_cast<std::uint32_t>(metadata_.size()));
  for (const auto& [k, v] : metadata_) {
    w.text(k);
    w.text(v);
  }
  w.u32(static_cast<std::uint32_t>(arrays_.size()));
  for (const auto& a : arrays_) {
    w.text(a.name);
    w.u32(static_cast<std::uint32_t>(a.shape.size()));
    for (auto dim : a.shape) w.u64(dim);
    for (double v : a.data) w.f64(v);
  }
  const std::uint32_t crc = crc32_of(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

ModelContainer ModelContainer::parse(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 4 || bytes.substr(0, kMagic.size()) != kMagic) {
    if (bytes.size() < kMagic.size() + 4 && kMagic.starts_with(bytes.substr(0, kMagic.size()))) {
      throw Error("model file is truncated");
    }
    throw Error("not a model file (bad magic)");
  }
  Reader header(bytes.substr(kMagic.size()));
  const std::uint32_t version = header.u32();
  if (version != kFormatVersion) {
    throw VersionMismatch("model file format", kFormatVersion, version);
  }
  if (bytes.size() < kMagic.size() + 8) throw Error("model file is truncated");
  const std::string_view payload = bytes.substr(0, bytes.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  if (tail.u32() != crc32_of(payload)) {
    throw Error("model file checksum mismatch (file is truncated or corrupt)");
  }

  Reader r(payload.substr(kMagic.size() + 4));
  ModelContainer c(r.text());
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.text();
    c.metadata_.emplace_back(std::move(k), r.text());
  }
  const std::uint32_t n_arrays = r.u32();
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    Array a;
    a.name = r.text();
    const std::uint32_t ndim = r.u32();
    std::uint64_t count = 1;
    for (std::uint32_t k = 0; k < ndim; ++k) {
      a.shape.push_back(r.u64());
      count *= a.shape.back();
    }
    if (count > r.remaining() / 8) throw Error("model file is truncated");
    a.data.resize(count);
    for (auto& v : a.data) v = r.f64();
    c.arrays_.push_back(std::move(a));
  }
  if (r.remaining() != 0) throw Error("model file has trailing bytes");
  return c;
}

void ModelContainer::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

namespace {
std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}
}  // namespace

ModelContainer ModelContainer::load(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return parse(bytes);
  } catch (const VersionMismatch&) {
    throw;
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::uint32_t model_checksum(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ModelContainer::parse(bytes);
  return crc32_of(std::string_view(bytes).substr(0, bytes.size() - 4));
}

}  // namespace sigdesc
