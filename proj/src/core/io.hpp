#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arrivals.hpp"

namespace coxkern::io {

enum class Format { text, binary };

/// "text" | "binary" (also "binary-f64", "f64").
Format parse_format(std::string_view name);
const char* format_name(Format format);

struct Ingested {
  ArrivalData data;
  std::vector<std::string> warnings;
};

/// Reads timestamps from a text file (whitespace separated decimals, '#'
/// starts a comment) or a headerless little-endian float64 file. Unsorted
/// input is sorted with a warning; duplicates are kept. T defaults to the
/// largest timestamp.
Ingested read_arrivals(const std::filesystem::path& path, Format format,
                       std::optional<double> horizon = std::nullopt);

/// Parses the text format from memory; `source` names the input in errors.
Ingested parse_arrivals_text(std::string_view text, std::optional<double> horizon,
                             std::string_view source = "<memory>");

/// Writes timestamps so that read_arrivals returns identical doubles.
void write_arrivals(const std::filesystem::path& path, std::span<const double> times, Format format);

/// Shortest decimal form that round-trips; "nan", "inf", "-inf" otherwise.
std::string format_double(double x);

/// Column-oriented CSV; all columns must have equal length.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::span<const double>>& columns);

/// Same, with a leading text column (header[0] names it).
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               std::span<const std::string> labels,
               const std::vector<std::span<const double>>& columns);

void write_text(const std::filesystem::path& path, std::string_view contents);

void ensure_directory(const std::filesystem::path& dir);

}  // namespace coxkern::io
