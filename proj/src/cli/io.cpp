#include "volterra/cli/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace volterra::cli {

namespace fs = std::filesystem;

namespace {

std::string_view strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

// from_chars rejects a leading '+', which some exporters write.
bool parse_value(std::string_view text, double& value) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ptr != text.data() + text.size()) return false;
  // On overflow from_chars leaves `value` untouched; strtod gives +-HUGE_VAL
  // (caught by the finiteness check) or the underflowed result.
  if (ec == std::errc::result_out_of_range) value = std::strtod(std::string(text).c_str(), nullptr);
  return ec == std::errc() || ec == std::errc::result_out_of_range;
}

bool is_non_finite_token(std::string_view text) {
  std::string lower(text);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (!lower.empty() && (lower.front() == '+' || lower.front() == '-')) lower.erase(0, 1);
  return lower == "nan" || lower == "inf" || lower == "infinity";
}

}  // namespace

std::vector<double> read_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);

  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view field = strip(line);
    if (field.empty()) continue;
    const bool first = !seen_content;
    seen_content = true;

    if (is_non_finite_token(field)) {
      throw Error(ErrorKind::NonFiniteValue,
                  path + ":" + std::to_string(line_no) + ": non-finite value '" +
                      std::string(field) + "'");
    }
    double value = 0.0;
    if (!parse_value(field, value)) {
      if (first) continue;  // header
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(line_no) +
                                             ": cannot parse '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::NonFiniteValue, path + ":" + std::to_string(line_no) +
                                                 ": value out of double range");
    }
    values.push_back(value);
  }
  if (in.bad()) throw Error(ErrorKind::Io, "read error on " + path);
  if (values.empty()) throw Error(ErrorKind::EmptyFile, path + " holds no data rows");
  return values;
}

TimeSeries ingest_csv(const std::string& path) {
  return TimeSeries(read_column(path), file_stem(path));
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_atomic(const std::string& path, std::string_view content) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory " + target.parent_path().string());
  }
  fs::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + temp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + temp.string());
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw Error(ErrorKind::Io, "cannot rename into " + path);
  }
}

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace volterra::cli
