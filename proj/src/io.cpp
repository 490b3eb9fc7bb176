#include "sniper/io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "sniper/tensor.hpp"

namespace sniper::io {

namespace {

void put_bytes_le(std::ostream& os, uint64_t v, int n) {
  char buf[8];
  for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, n);
}

uint64_t get_bytes_le(std::istream& is, int n) {
  char buf[8];
  is.read(buf, n);
  if (!is) throw std::runtime_error("io: unexpected end of file");
  uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

}  // namespace

void write_u8(std::ostream& os, uint8_t v) { put_bytes_le(os, v, 1); }
void write_u32(std::ostream& os, uint32_t v) { put_bytes_le(os, v, 4); }
void write_u64(std::ostream& os, uint64_t v) { put_bytes_le(os, v, 8); }
void write_i32(std::ostream& os, int32_t v) { put_bytes_le(os, static_cast<uint32_t>(v), 4); }
void write_f64(std::ostream& os, double v) { put_bytes_le(os, std::bit_cast<uint64_t>(v), 8); }

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_tensor(std::ostream& os, const Tensor& t) {
  write_u32(os, static_cast<uint32_t>(t.ndim()));
  for (size_t d : t.shape()) write_u64(os, d);
  for (size_t i = 0; i < t.numel(); ++i) write_f64(os, t[i]);
}

uint8_t read_u8(std::istream& is) { return static_cast<uint8_t>(get_bytes_le(is, 1)); }
uint32_t read_u32(std::istream& is) { return static_cast<uint32_t>(get_bytes_le(is, 4)); }
uint64_t read_u64(std::istream& is) { return get_bytes_le(is, 8); }
int32_t read_i32(std::istream& is) { return static_cast<int32_t>(get_bytes_le(is, 4)); }
double read_f64(std::istream& is) { return std::bit_cast<double>(get_bytes_le(is, 8)); }

std::string read_string(std::istream& is) {
  uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("io: unexpected end of file in string");
  return s;
}

Tensor read_tensor(std::istream& is) {
  uint32_t nd = read_u32(is);
  if (nd == 0 || nd > 8) throw std::runtime_error("io: bad tensor rank " + std::to_string(nd));
  std::vector<size_t> shape(nd);
  for (auto& d : shape) d = read_u64(is);
  std::vector<double> data(shape_numel(shape));
  for (auto& x : data) x = read_f64(is);
  return Tensor(std::move(shape), std::move(data));
}

void write_magic(std::ostream& os, const char* magic) {
  os.write(magic, 8);
}

void expect_magic(std::istream& is, const char* magic, const std::string& what) {
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0) {
    throw std::runtime_error(what + ": bad magic (not a " + what + " file)");
  }
}

uint64_t fnv1a(const void* data, size_t n, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a_str(const std::string& s, uint64_t h) { return fnv1a(s.data(), s.size(), h); }

uint64_t fnv1a_f64(const double* data, size_t n, uint64_t h) {
  return fnv1a(data, n * sizeof(double), h);
}

uint64_t fnv1a_u64(uint64_t v, uint64_t h) { return fnv1a(&v, sizeof(v), h); }

}  // namespace sniper::io
