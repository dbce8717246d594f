#ifndef UNMIX_IO_HPP
#define UNMIX_IO_HPP

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "core_types.hpp"

namespace unmix {

// Cube file layout (all little-endian):
//   offset 0  magic "HSC1"
//   offset 4  u32 bands
//   offset 8  u32 pixels
//   offset 12 bands * pixels binary64 values, band-major
inline constexpr std::array<char, 4> kCubeMagic = {'H', 'S', 'C', '1'};
inline constexpr std::size_t kCubeHeaderBytes = 12;

namespace detail {

inline void put_u32(std::string &out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k)
    out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

inline void put_f64(std::string &out, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int k = 0; k < 8; ++k)
    out.push_back(static_cast<char>((bits >> (8 * k)) & 0xffu));
}

inline std::uint64_t get_le(const unsigned char *p, int bytes) {
  std::uint64_t v = 0;
  for (int k = 0; k < bytes; ++k)
    v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return v;
}

inline std::string read_all(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad())
    throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

inline void write_all(const std::filesystem::path &path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out)
    throw IoError("write failure on '" + path.string() + "'");
}

/// Shortest-safe decimal form: 17 significant digits, round-trips binary64.
inline std::string format_double(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc())
    throw Error("number formatting failed");
  return std::string(buf, end);
}

inline bool parse_double(std::string_view text, double &out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  if (text.empty())
    return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

} // namespace detail

inline std::string encode_cube(const SpectralCube &cube) {
  std::string out;
  out.reserve(kCubeHeaderBytes + cube.bands() * cube.pixels() * 8);
  out.append(kCubeMagic.data(), kCubeMagic.size());
  detail::put_u32(out, static_cast<std::uint32_t>(cube.bands()));
  detail::put_u32(out, static_cast<std::uint32_t>(cube.pixels()));
  const Matrix &m = cube.data();
  for (Eigen::Index l = 0; l < m.rows(); ++l)
    for (Eigen::Index i = 0; i < m.cols(); ++i)
      detail::put_f64(out, m(l, i));
  return out;
}

/// Inverse of encode_cube. Errors name the offending byte offset.
inline SpectralCube decode_cube(std::string_view bytes, const std::string &origin = "<memory>") {
  if (bytes.size() < kCubeHeaderBytes)
    throw IoError(origin + ": truncated header: " + std::to_string(bytes.size()) + " bytes, need 12 at offset 0");
  if (std::memcmp(bytes.data(), kCubeMagic.data(), kCubeMagic.size()) != 0)
    throw IoError(origin + ": bad magic at offset 0: expected \"HSC1\", found \"" + std::string(bytes.substr(0, 4)) +
                  "\"");
  const auto *raw = reinterpret_cast<const unsigned char *>(bytes.data());
  const auto bands = detail::get_le(raw + 4, 4);
  const auto pixels = detail::get_le(raw + 8, 4);
  if (bands < 2)
    throw IoError(origin + ": bands field at offset 4 is " + std::to_string(bands) + ", need >= 2");
  if (pixels < 2)
    throw IoError(origin + ": pixels field at offset 8 is " + std::to_string(pixels) + ", need >= 2");
  // Validate the payload size before allocating anything from the header.
  const std::uint64_t expected = bands * pixels * 8; // both fields < 2^32, fits comfortably
  const std::uint64_t actual = bytes.size() - kCubeHeaderBytes;
  if (actual != expected)
    throw IoError(origin + ": payload at offset 12 is " + std::to_string(actual) + " bytes, expected " +
                  std::to_string(expected) + (actual < expected ? " (truncated)" : " (trailing data)"));

  Matrix m(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(pixels));
  std::size_t offset = kCubeHeaderBytes;
  for (Eigen::Index l = 0; l < m.rows(); ++l)
    for (Eigen::Index i = 0; i < m.cols(); ++i, offset += 8) {
      const double v = std::bit_cast<double>(detail::get_le(raw + offset, 8));
      if (!std::isfinite(v))
        throw IoError(origin + ": non-finite value at byte offset " + std::to_string(offset));
      m(l, i) = v;
    }
  return SpectralCube(std::move(m));
}

inline void save_cube(const SpectralCube &cube, const std::filesystem::path &path) {
  detail::write_all(path, encode_cube(cube));
}

inline SpectralCube load_cube(const std::filesystem::path &path) {
  return decode_cube(detail::read_all(path), path.string());
}

/// CSV with header `band,e1,...,ep` and one row per band.
inline std::string encode_spectra_csv(const EndmemberSet &set) {
  std::string out = "band";
  for (std::size_t k = 0; k < set.count(); ++k)
    out += ",e" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t l = 0; l < set.bands(); ++l) {
    out += std::to_string(l);
    for (std::size_t k = 0; k < set.count(); ++k) {
      out += ',';
      out += detail::format_double(set.spectra()(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

inline EndmemberSet decode_spectra_csv(std::string_view text, const std::string &origin = "<memory>") {
  std::vector<std::string_view> lines = detail::split(text, '\n');
  while (!lines.empty() && (lines.back().empty() || lines.back() == "\r"))
    lines.pop_back();
  if (lines.empty())
    throw IoError(origin + ": empty spectra file");
  const auto header = detail::split(lines[0], ',');
  if (header.empty() || header[0].substr(0, 4) != "band")
    throw IoError(origin + ":1: header must start with 'band'");
  const std::size_t p = header.size() - 1;
  if (p < 2)
    throw IoError(origin + ":1: p >= 2 required");
  const std::size_t bands = lines.size() - 1;
  if (bands < 1)
    throw IoError(origin + ": no band rows");
  Matrix spectra(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(p));
  for (std::size_t l = 0; l < bands; ++l) {
    const std::size_t line_no = l + 2;
    const auto cells = detail::split(lines[l + 1], ',');
    if (cells.size() != p + 1)
      throw IoError(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(p + 1) + " cells, found " +
                    std::to_string(cells.size()));
    double band_id = 0.0;
    if (!detail::parse_double(cells[0], band_id))
      throw IoError(origin + ":" + std::to_string(line_no) + ": non-numeric band cell '" + std::string(cells[0]) + "'");
    for (std::size_t k = 0; k < p; ++k) {
      double v = 0.0;
      if (!detail::parse_double(cells[k + 1], v) || !std::isfinite(v))
        throw IoError(origin + ":" + std::to_string(line_no) + ": non-numeric cell '" + std::string(cells[k + 1]) +
                      "' in column " + std::to_string(k + 2));
      spectra(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return EndmemberSet(std::move(spectra));
}

inline void save_spectra_csv(const EndmemberSet &set, const std::filesystem::path &path) {
  detail::write_all(path, encode_spectra_csv(set));
}

inline EndmemberSet load_spectra_csv(const std::filesystem::path &path) {
  return decode_spectra_csv(detail::read_all(path), path.string());
}

/// One pixel index per line.
inline void save_indices(const std::vector<PixelIndex> &indices, const std::filesystem::path &path) {
  std::string out;
  for (auto i : indices)
    out += std::to_string(i) + '\n';
  detail::write_all(path, out);
}

} // namespace unmix

#endif // UNMIX_IO_HPP
