#include "container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace hypoctl {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container encoding assumes a little-endian host");

constexpr char kMagic[8] = {'H', 'Y', 'P', 'O', 'C', 'T', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  const char* raw(std::size_t n) {
    need(n);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::kIo, "container is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Matrix& Container::array(const std::string& name) const {
  for (const NamedArray& a : arrays) {
    if (a.name == name) return a.values;
  }
  fail(ErrorCode::kIo, "container has no array named '" + name + "'");
}

bool Container::has(const std::string& name) const {
  for (const NamedArray& a : arrays) {
    if (a.name == name) return true;
  }
  return false;
}

void Container::add(std::string name, Matrix values) {
  arrays.push_back({std::move(name), std::move(values)});
}

std::string encode_container(const Container& c) {
  std::string meta;
  for (const auto& [k, v] : c.metadata) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      fail(ErrorCode::kInvalidArgument, "container metadata key/value not encodable: " + k);
    }
    meta += k + "=" + v + "\n";
  }
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.arrays.size()));
  for (const NamedArray& a : c.arrays) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
    out += a.name;
    put<std::uint64_t>(out, static_cast<std::uint64_t>(a.values.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(a.values.cols()));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
        a.values;
    out.append(reinterpret_cast<const char*>(rm.data()),
               static_cast<std::size_t>(rm.size()) * sizeof(double));
  }
  return out;
}

Container decode_container(const std::string& bytes) {
  Reader r(bytes);
  if (std::memcmp(r.raw(sizeof kMagic), kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::kIo, "not a hypoctl container (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    fail(ErrorCode::kIo, "unsupported container version " + std::to_string(version));
  }
  Container c;
  std::istringstream meta(r.text(r.get<std::uint32_t>()));
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kIo, "corrupt container metadata");
    c.metadata[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.text(r.get<std::uint32_t>());
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (cols != 0 && rows > (bytes.size() / sizeof(double)) / cols) {
      fail(ErrorCode::kIo, "container array '" + a.name + "' exceeds the file size");
    }
    const std::size_t n = static_cast<std::size_t>(rows * cols);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
        static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::memcpy(rm.data(), r.raw(n * sizeof(double)), n * sizeof(double));
    a.values = rm;
    c.arrays.push_back(std::move(a));
  }
  if (!r.done()) fail(ErrorCode::kIo, "trailing bytes after container arrays");
  return c;
}

void write_container(const std::string& path, const Container& c) {
  const std::string bytes = encode_container(c);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::kIo, "short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot move container into place at '" + path + "'");
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open container '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_container(ss.str());
}

std::vector<std::string> metadata_diff(
    const std::map<std::string, std::string>& stored,
    const std::map<std::string, std::string>& expected) {
  std::vector<std::string> diff;
  for (const auto& [k, v] : expected) {
    const auto it = stored.find(k);
    const std::string have = it == stored.end() ? "<missing>" : it->second;
    if (have != v) diff.push_back(k + ": stored=" + have + ", expected=" + v);
  }
  return diff;
}

}  // namespace hypoctl
