#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "regrade/errors.hpp"
#include "regrade/heightmap.hpp"

namespace regrade {

enum class MapFormat { csv, pgm };

namespace detail {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok, std::size_t line,
                           std::size_t byte) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError("invalid number '" + tok + "'", line, byte);
  return v;
}

inline long parse_long(const std::string& tok, std::size_t line,
                       std::size_t byte) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError("invalid integer '" + tok + "'", line, byte);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV: header "width,height,resolution", then `height` rows of `width`
// comma-separated heights in meters; data row 0 is the minimum-y row.
// ---------------------------------------------------------------------------

inline HeightMap load_csv(const std::string& path, double scale = 1.0) {
  if (!(scale > 0.0)) throw ArgumentError("load_csv: scale must be > 0");
  std::ifstream in(path);
  if (!in) throw ArgumentError("load_csv: cannot open " + path);

  std::string line;
  std::size_t line_no = 0;
  std::size_t byte = 0;
  if (!std::getline(in, line))
    throw ParseError("empty file", 1, 0);
  ++line_no;

  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) head.push_back(tok);
  }
  if (head.size() != 3)
    throw ParseError("header must be width,height,resolution", line_no, byte);
  const long w = detail::parse_long(head[0], line_no, byte);
  const long h = detail::parse_long(head[1], line_no, byte);
  const double res = detail::parse_double(head[2], line_no, byte);
  if (w <= 0 || h <= 0)
    throw ParseError("non-positive dimensions in header", line_no, byte);
  if (!(res > 0.0))
    throw ParseError("non-positive resolution in header", line_no, byte);
  byte += line.size() + 1;

  HeightMap map(static_cast<int>(w), static_cast<int>(h), res,
                {res / 2.0, res / 2.0});
  for (long iy = 0; iy < h; ++iy) {
    if (!std::getline(in, line))
      throw ParseError("expected " + std::to_string(h) + " data rows",
                       line_no + 1, byte);
    ++line_no;
    std::stringstream ss(line);
    std::string tok;
    long ix = 0;
    while (std::getline(ss, tok, ',')) {
      if (ix >= w) throw ParseError("too many columns", line_no, byte);
      const double v = detail::parse_double(tok, line_no, byte);
      if (!std::isfinite(v * scale))
        throw ParseError("non-finite height", line_no, byte);
      CellState& c = map.at(static_cast<int>(ix), static_cast<int>(iy));
      c.height = v * scale;
      c.variance = 0.0;
      c.observed = true;
      ++ix;
    }
    if (ix != w)
      throw ParseError("expected " + std::to_string(w) + " columns, got " +
                           std::to_string(ix),
                       line_no, byte);
    byte += line.size() + 1;
  }
  return map;
}

inline void save_csv(const HeightMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("save_csv: cannot open " + path);
  out << map.width_cells << ',' << map.height_cells << ','
      << detail::format_double(map.resolution) << '\n';
  for (int iy = 0; iy < map.height_cells; ++iy) {
    for (int ix = 0; ix < map.width_cells; ++ix) {
      if (ix) out << ',';
      out << detail::format_double(map.at(ix, iy).height);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// PGM: P2 (ASCII) or P5 (binary) grayscale; cell height = pixel * scale.
// The first raster row is the maximum-y map row (image top).
// ---------------------------------------------------------------------------

namespace detail {

/// Reads the next whitespace/comment-delimited PGM header token.
inline std::string pgm_token(std::istream& in, std::size_t& byte) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    ++byte;
    if (ch == '#') {  // comment to end of line
      while ((ch = in.get()) != EOF) {
        ++byte;
        if (ch == '\n') break;
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace detail

inline HeightMap load_pgm(const std::string& path, double scale,
                          double resolution) {
  if (!(scale > 0.0)) throw ArgumentError("load_pgm: scale must be > 0");
  if (!(resolution > 0.0))
    throw ArgumentError("load_pgm: resolution must be > 0");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("load_pgm: cannot open " + path);

  std::size_t byte = 0;
  const std::string magic = detail::pgm_token(in, byte);
  if (magic != "P2" && magic != "P5")
    throw ParseError("not a PGM file (magic '" + magic + "')", 1, 0);
  const bool binary = magic == "P5";
  const long w = detail::parse_long(detail::pgm_token(in, byte), 1, byte);
  const long h = detail::parse_long(detail::pgm_token(in, byte), 1, byte);
  const long maxval = detail::parse_long(detail::pgm_token(in, byte), 1, byte);
  if (w <= 0 || h <= 0) throw ParseError("non-positive dimensions", 1, byte);
  if (maxval <= 0 || maxval > 65535)
    throw ParseError("maxval out of range", 1, byte);

  HeightMap map(static_cast<int>(w), static_cast<int>(h), resolution,
                {resolution / 2.0, resolution / 2.0});
  const std::size_t count = static_cast<std::size_t>(w) * h;
  std::vector<long> px(count);
  if (binary) {
    const int bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      throw ParseError("truncated pixel data", 1,
                       byte + static_cast<std::size_t>(in.gcount()));
    for (std::size_t i = 0; i < count; ++i)
      px[i] = bytes_per == 2
                  ? (static_cast<long>(raw[2 * i]) << 8) | raw[2 * i + 1]
                  : raw[i];
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string tok = detail::pgm_token(in, byte);
      if (tok.empty()) throw ParseError("truncated pixel data", 1, byte);
      px[i] = detail::parse_long(tok, 1, byte);
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (px[i] < 0 || px[i] > maxval)
      throw ParseError("pixel out of range", 1, byte);
    const int ix = static_cast<int>(i % w);
    const int iy = static_cast<int>(h - 1 - static_cast<long>(i) / w);
    CellState& c = map.at(ix, iy);
    c.height = static_cast<double>(px[i]) * scale;
    c.variance = 0.0;
    c.observed = true;
  }
  return map;
}

inline void save_pgm(const HeightMap& map, const std::string& path, double scale,
                     long maxval = 65535) {
  if (!(scale > 0.0)) throw ArgumentError("save_pgm: scale must be > 0");
  if (maxval <= 0 || maxval > 65535)
    throw ArgumentError("save_pgm: maxval out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("save_pgm: cannot open " + path);
  out << "P5\n" << map.width_cells << ' ' << map.height_cells << '\n'
      << maxval << '\n';
  const int bytes_per = maxval > 255 ? 2 : 1;
  for (int iy = map.height_cells - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < map.width_cells; ++ix) {
      long v = std::lround(map.at(ix, iy).height / scale);
      v = std::max(0L, std::min(maxval, v));
      if (bytes_per == 2) {
        out.put(static_cast<char>((v >> 8) & 0xff));
        out.put(static_cast<char>(v & 0xff));
      } else {
        out.put(static_cast<char>(v & 0xff));
      }
    }
  }
}

inline HeightMap load_heightmap(const std::string& path, MapFormat format,
                                double scale, double resolution) {
  if (!(scale > 0.0)) throw ArgumentError("load_heightmap: scale must be > 0");
  if (!(resolution > 0.0))
    throw ArgumentError("load_heightmap: resolution must be > 0");
  // CSV carries its own resolution in the header.
  return format == MapFormat::csv ? load_csv(path, scale)
                                  : load_pgm(path, scale, resolution);
}

}  // namespace regrade
