#include "symphony/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace symphony {

BinaryFile::BinaryFile(const std::string& path, const char* mode)
    : path_(path) {
  file_ = std::fopen(path.c_str(), mode);
  if (!file_) {
    throw IoError("cannot open '" + path + "' (mode " + mode + ")");
  }
}

BinaryFile::~BinaryFile() {
  if (file_) std::fclose(file_);
}

void BinaryFile::write_bytes(const void* data, std::size_t n) {
  if (std::fwrite(data, 1, n, file_) != n) {
    throw IoError("short write to '" + path_ + "'");
  }
}

void BinaryFile::read_bytes(void* data, std::size_t n) {
  if (std::fread(data, 1, n, file_) != n) {
    throw IoError("short read from '" + path_ + "'");
  }
}

void BinaryFile::write_string(const std::string& s) {
  write_pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
  write_bytes(s.data(), s.size());
}

std::string BinaryFile::read_string() {
  const auto len = read_pod<std::uint32_t>();
  if (len > (1u << 20)) {
    throw FormatError("string length field out of range in '" + path_ + "'");
  }
  std::string s(len, '\0');
  read_bytes(s.data(), len);
  return s;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace symphony
