#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace symphony {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thin RAII FILE* wrapper for the little-endian binary formats (checkpoints,
/// buffer snapshots). All multi-byte fields are written in host order; the
/// formats are specified little-endian and the library targets such hosts.
class BinaryFile {
 public:
  BinaryFile(const std::string& path, const char* mode);
  ~BinaryFile();
  BinaryFile(const BinaryFile&) = delete;
  BinaryFile& operator=(const BinaryFile&) = delete;

  void write_bytes(const void* data, std::size_t n);
  void read_bytes(void* data, std::size_t n);

  template <typename T>
  void write_pod(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    write_bytes(&v, sizeof(T));
  }

  template <typename T>
  T read_pod() {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    read_bytes(&v, sizeof(T));
    return v;
  }

  void write_string(const std::string& s);
  std::string read_string();

  FILE* handle() { return file_; }

 private:
  FILE* file_ = nullptr;
  std::string path_;
};

/// Deterministic shortest-ish decimal formatting for CSV output ("%.10g").
std::string format_double(double v);

/// Reads a whole file; throws IoError if unreadable.
std::string read_file(const std::string& path);

}  // namespace symphony
