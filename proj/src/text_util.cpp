#include "text_util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phoneval/error.hpp"

namespace phoneval::detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    int extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (int k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates, out of range.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += extra + 1;
  }
  return true;
}

long parse_int(std::string_view token, const std::string& where) {
  long v = 0;
  auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size() || token.empty())
    throw ValidationError(where + ": expected integer, got '" +
                          std::string(token) + "'");
  return v;
}

double parse_double(std::string_view token, const std::string& where) {
  std::string tmp(token);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tmp.size() || tmp.empty() || !std::isfinite(v))
    throw ValidationError(where + ": expected number, got '" + tmp + "'");
  return v;
}

Micros parse_seconds(std::string_view token, const std::string& where) {
  auto bad = [&] {
    return ValidationError(where + ": expected time in seconds, got '" +
                           std::string(token) + "'");
  };
  if (token.empty()) throw bad();
  if (token.find_first_of("eE") != std::string_view::npos)
    return std::llround(parse_double(token, where) * kMicrosPerSecond);

  bool negative = false;
  std::size_t i = 0;
  if (token[0] == '-' || token[0] == '+') {
    negative = token[0] == '-';
    ++i;
  }
  Micros whole = 0;
  bool any_digit = false;
  for (; i < token.size() && token[i] != '.'; ++i) {
    if (token[i] < '0' || token[i] > '9') throw bad();
    whole = whole * 10 + (token[i] - '0');
    any_digit = true;
  }
  Micros frac = 0;
  int digits = 0;
  bool round_up = false;
  if (i < token.size()) {
    ++i;  // '.'
    for (; i < token.size(); ++i) {
      char c = token[i];
      if (c < '0' || c > '9') throw bad();
      any_digit = true;
      if (digits < 6) {
        frac = frac * 10 + (c - '0');
        ++digits;
      } else if (digits == 6) {
        round_up = c >= '5';
        ++digits;
      }
    }
  }
  if (!any_digit) throw bad();
  for (int d = std::min(digits, 6); d < 6; ++d) frac *= 10;
  Micros t = whole * kMicrosPerSecond + frac + (round_up ? 1 : 0);
  return negative ? -t : t;
}

std::string format_seconds(Micros t) {
  std::string sign = t < 0 ? "-" : "";
  if (t < 0) t = -t;
  auto whole = t / kMicrosPerSecond;
  auto frac = t % kMicrosPerSecond;
  char buf[8];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frac));
  std::string f(buf);
  while (f.size() > 2 && f.back() == '0') f.pop_back();
  return sign + std::to_string(whole) + "." + f;
}

}  // namespace phoneval::detail
