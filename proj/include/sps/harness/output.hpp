#pragma once

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "sps/harness/config.hpp"

namespace sps::harness {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  std::array<char, 40> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::general, 17);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf.data(), ptr);
}

/// In-memory CSV with a header row and a fixed column order.
class CsvTable {
 public:
  explicit CsvTable(std::initializer_list<std::string_view> columns) {
    for (auto c : columns) {
      text_ += (text_.empty() ? "" : ",") + std::string(c);
      ++width_;
    }
    text_ += "\n";
  }

  void row(std::initializer_list<double> values) {
    if (values.size() != width_) throw Error("CSV row width mismatch");
    bool first = true;
    for (double v : values) {
      if (!first) text_ += ',';
      text_ += format_double(v);
      first = false;
    }
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::size_t width_ = 0;
};

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

/// UTC timestamp; SOURCE_DATE_EPOCH pins it for reproducible manifests.
inline std::string timestamp_utc() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace sps::harness
