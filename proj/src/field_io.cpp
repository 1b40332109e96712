#include "okphase/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace okphase {

namespace {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

constexpr std::array<char, 4> kMagic = {'O', 'K', 'F', '1'};

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("truncated field dump");
  return value;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void write_field_dump(const std::filesystem::path& path, const RealField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.n()));
  put<double>(os, field.grid().length());
  auto values = field.values();
  os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

RealField read_field_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw std::runtime_error(path.string() + " is not a field dump (bad magic)");
  const auto n = get<std::uint32_t>(is);
  const auto length = get<double>(is);
  RealField field(GridSpec(static_cast<int>(n), length));
  auto values = field.values();
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!is) throw std::runtime_error("truncated field dump " + path.string());
  return field;
}

void write_pgm(const std::filesystem::path& path, const RealField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const int n = field.n();
  os << "P5\n" << n << ' ' << n << "\n255\n";
  const double lo = field.min();
  const double hi = field.max();
  const double span = hi - lo;
  std::vector<unsigned char> row(static_cast<std::size_t>(n));
  // Image rows run along y (top row = largest y) so the picture has the usual orientation.
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i) {
      const double s = span > 0.0 ? (field(i, j) - lo) / span : 0.0;
      row[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0));
    }
    os.write(reinterpret_cast<const char*>(row.data()), n);
  }
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_key_values(buffer.str());
}

void write_key_values(const std::filesystem::path& path, const KeyValues& values) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& [key, value] : values) os << key << '=' << value << '\n';
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), end);
}

}  // namespace okphase
