#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sniper {
class Tensor;
}

namespace sniper::io {

// All on-disk integers and floats are little-endian regardless of host order.
void write_u8(std::ostream& os, uint8_t v);
void write_u32(std::ostream& os, uint32_t v);
void write_u64(std::ostream& os, uint64_t v);
void write_i32(std::ostream& os, int32_t v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, const std::string& s);
void write_tensor(std::ostream& os, const Tensor& t);

uint8_t read_u8(std::istream& is);
uint32_t read_u32(std::istream& is);
uint64_t read_u64(std::istream& is);
int32_t read_i32(std::istream& is);
double read_f64(std::istream& is);
std::string read_string(std::istream& is);
Tensor read_tensor(std::istream& is);

void expect_magic(std::istream& is, const char* magic, const std::string& what);
void write_magic(std::ostream& os, const char* magic);

// FNV-1a, used for dataset and config fingerprints.
uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull);
uint64_t fnv1a_str(const std::string& s, uint64_t h = 0xcbf29ce484222325ull);
uint64_t fnv1a_f64(const double* data, size_t n, uint64_t h = 0xcbf29ce484222325ull);
uint64_t fnv1a_u64(uint64_t v, uint64_t h);

}  // namespace sniper::io
