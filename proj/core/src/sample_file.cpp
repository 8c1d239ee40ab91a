#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stablefield/error.hpp"
#include "stablefield/montecarlo.hpp"

namespace stablefield {
namespace {

constexpr char kMagic[8] = {'S', 'F', 'S', 'A', 'M', 'P', 'L', 'E'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = std::bit_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    bytes[k] = static_cast<char>(bits & 0xff);
    bits >>= 8;
  }
  out.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) fail(ErrorCode::kIo, "truncated sample file " + path);
  U bits = 0;
  for (std::size_t k = sizeof(T); k-- > 0;) bits = (bits << 8) | bytes[k];
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_sample_file(const std::string& path, const SampleFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, file.samples.size());
  put<double>(out, file.B_n);
  put<double>(out, file.alpha);
  for (double v : file.samples) put<double>(out, v);
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

SampleFile read_sample_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    fail(ErrorCode::kIo, path + " is not a sample file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    std::ostringstream msg;
    msg << path << ": unsupported sample file version " << version;
    fail(ErrorCode::kIo, msg.str());
  }
  (void)get<std::uint32_t>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  SampleFile file;
  file.B_n = get<double>(in, path);
  file.alpha = get<double>(in, path);
  file.samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t k = 0; k < count; ++k) file.samples.push_back(get<double>(in, path));
  return file;
}

}  // namespace stablefield
