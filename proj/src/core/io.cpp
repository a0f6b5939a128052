#include "io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace coxkern::io {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::io_failure, "read error on " + path.string());
  return std::move(buf).str();
}

void check_timestamp(double x, const std::string& where) {
  if (!std::isfinite(x)) fail(ErrorCode::invalid_data, "non-finite timestamp at " + where);
  if (x < 0.0) fail(ErrorCode::invalid_data, "negative timestamp at " + where);
}

Ingested finish(std::vector<double> times, std::optional<double> horizon, std::string_view source) {
  if (times.empty()) fail(ErrorCode::empty_data, "no timestamps in " + std::string(source));
  std::vector<std::string> warnings;
  if (!std::is_sorted(times.begin(), times.end())) {
    std::sort(times.begin(), times.end());
    warnings.push_back("timestamps were not in order and have been sorted");
  }
  const double latest = times.back();
  double T = latest;
  if (horizon) {
    T = *horizon;
    if (!(T > 0.0) || !std::isfinite(T)) fail(ErrorCode::invalid_argument, "T must be positive");
    if (latest > T) {
      std::ostringstream msg;
      msg << "timestamp " << format_double(latest) << " exceeds T = " << format_double(T);
      fail(ErrorCode::invalid_data, msg.str());
    }
    if (latest < 0.99 * T) {
      std::ostringstream msg;
      msg << "last timestamp " << format_double(latest) << " is well before T = " << format_double(T);
      warnings.push_back(msg.str());
    }
  } else if (!(T > 0.0)) {
    fail(ErrorCode::invalid_data, "all timestamps are zero; cannot infer T");
  }
  return Ingested{ArrivalData(std::move(times), T), std::move(warnings)};
}

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "text" || name == "txt") return Format::text;
  if (name == "binary" || name == "binary-f64" || name == "f64") return Format::binary;
  fail(ErrorCode::invalid_argument, "unknown input format '" + std::string(name) + "'");
}

const char* format_name(Format format) { return format == Format::text ? "text" : "binary-f64"; }

Ingested parse_arrivals_text(std::string_view text, std::optional<double> horizon,
                             std::string_view source) {
  std::vector<double> times;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const char* p = line.data();
    const char* end = p + line.size();
    for (;;) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      if (p == end) break;
      if (*p == '+') ++p;
      double x = 0.0;
      const auto [next, ec] = std::from_chars(p, end, x);
      const bool separated = next == end || std::isspace(static_cast<unsigned char>(*next));
      if (ec != std::errc{} || !separated) {
        const char* stop = std::find_if(p, end, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        std::ostringstream msg;
        msg << "cannot parse '" << std::string_view(p, static_cast<std::size_t>(stop - p))
            << "' as a timestamp at " << source << " line " << line_no;
        fail(ErrorCode::invalid_data, msg.str());
      }
      check_timestamp(x, std::string(source) + " line " + std::to_string(line_no));
      times.push_back(x);
      p = next;
    }
  }
  return finish(std::move(times), horizon, source);
}

Ingested read_arrivals(const std::filesystem::path& path, Format format,
                       std::optional<double> horizon) {
  const std::string bytes = read_file(path);
  if (format == Format::text) return parse_arrivals_text(bytes, horizon, path.string());

  if (bytes.size() % 8 != 0) {
    fail(ErrorCode::invalid_data, path.string() + ": size is not a multiple of 8 bytes");
  }
  std::vector<double> times(bytes.size() / 8);
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + 8 * i, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    times[i] = std::bit_cast<double>(bits);
    if (!std::isfinite(times[i]) || times[i] < 0.0) {
      check_timestamp(times[i], path.string() + " byte offset " + std::to_string(8 * i));
    }
  }
  return finish(std::move(times), horizon, path.string());
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_arrivals(const std::filesystem::path& path, std::span<const double> times, Format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  if (format == Format::binary) {
    std::vector<char> buf(times.size() * 8);
    for (std::size_t i = 0; i < times.size(); ++i) {
      auto bits = std::bit_cast<std::uint64_t>(times[i]);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      std::memcpy(buf.data() + 8 * i, &bits, 8);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  } else {
    std::string chunk;
    char num[32];
    for (double t : times) {
      const auto res = std::to_chars(num, num + sizeof num, t);
      chunk.append(num, res.ptr);
      chunk.push_back('\n');
      if (chunk.size() > (1u << 20)) {
        out << chunk;
        chunk.clear();
      }
    }
    out << chunk;
  }
  if (!out) fail(ErrorCode::io_failure, "write error on " + path.string());
}

namespace {

void write_csv_impl(const std::filesystem::path& path, const std::vector<std::string>& header,
                    std::span<const std::string> labels,
                    const std::vector<std::span<const double>>& columns) {
  const std::size_t label_cols = labels.empty() ? 0 : 1;
  if (header.size() != columns.size() + label_cols) {
    fail(ErrorCode::invalid_argument, "csv header/column mismatch");
  }
  const std::size_t rows = label_cols ? labels.size() : (columns.empty() ? 0 : columns.front().size());
  for (const auto& c : columns) {
    if (c.size() != rows) fail(ErrorCode::invalid_argument, "csv columns differ in length");
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  std::string buf;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf.push_back(',');
    buf += header[i];
  }
  buf.push_back('\n');
  for (std::size_t r = 0; r < rows; ++r) {
    if (label_cols) {
      buf += labels[r];
      if (!columns.empty()) buf.push_back(',');
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) buf.push_back(',');
      buf += format_double(columns[c][r]);
    }
    buf.push_back('\n');
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  if (!out) fail(ErrorCode::io_failure, "write error on " + path.string());
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::span<const double>>& columns) {
  write_csv_impl(path, header, {}, columns);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               std::span<const std::string> labels,
               const std::vector<std::span<const double>>& columns) {
  if (labels.empty()) fail(ErrorCode::invalid_argument, "labelled csv needs at least one row");
  write_csv_impl(path, header, labels, columns);
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path.string());
  out << contents;
  if (!out) fail(ErrorCode::io_failure, "write error on " + path.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_failure, "cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace coxkern::io
