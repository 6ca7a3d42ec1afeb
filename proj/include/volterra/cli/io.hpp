#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "volterra/core.hpp"

namespace volterra::cli {

/// Reads a single-column CSV: one decimal value per row, optionally preceded
/// by one header line. Blank lines are ignored.
/// Errors: Io (unreadable), EmptyFile, ParseError (with line number),
/// NonFiniteValue.
std::vector<double> read_column(const std::string& path);

/// read_column wrapped as a TimeSeries labelled with the file stem.
TimeSeries ingest_csv(const std::string& path);

/// Shortest text for `value` with 17 significant digits ("%.17g").
std::string format_double(double value);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, std::string_view content);

/// File name without directory and extension.
std::string file_stem(const std::string& path);

}  // namespace volterra::cli
