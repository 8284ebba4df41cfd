#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/grid.hpp"

namespace plap {

// Snapshot file: one JSON header line terminated by '\n', then
// nodes * N little-endian IEEE-754 binary64 values in row-major node order
// (last axis fastest), components interleaved per node.

struct FieldHeader {
  int m = 0;
  int n = 0;
  int N = 0;
  double tau = 0.0;
  int step = 0;
  double t = 0.0;
  std::string config_hash;
  std::string tool_version;
};

namespace detail {
inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}
}  // namespace detail

inline void write_field(std::ostream& os, const VectorField& u, FieldHeader hdr) {
  hdr.m = u.grid().m;
  hdr.n = u.grid().n;
  hdr.N = u.components();
  const nlohmann::json j = {{"format", "plap-field-1"}, {"m", hdr.m},     {"n", hdr.n},
                            {"N", hdr.N},               {"tau", hdr.tau}, {"step", hdr.step},
                            {"t", hdr.t},               {"config_hash", hdr.config_hash},
                            {"tool_version", hdr.tool_version}};
  os << j.dump() << '\n';
  std::vector<char> buf(u.values().size() * 8);
  for (std::size_t i = 0; i < u.values().size(); ++i) {
    const std::uint64_t bits = detail::to_le(std::bit_cast<std::uint64_t>(u.values()[i]));
    std::memcpy(&buf[i * 8], &bits, 8);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("write_field: stream error");
}

struct FieldFile {
  FieldHeader header;
  VectorField field;
};

inline FieldFile read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_field: missing header line");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_field: bad header: ") + e.what());
  }
  if (j.value("format", "") != "plap-field-1") throw std::runtime_error("read_field: unknown format tag");
  FieldHeader h;
  h.m = j.at("m").get<int>();
  h.n = j.at("n").get<int>();
  h.N = j.at("N").get<int>();
  h.tau = j.at("tau").get<double>();
  h.step = j.at("step").get<int>();
  h.t = j.at("t").get<double>();
  h.config_hash = j.at("config_hash").get<std::string>();
  h.tool_version = j.at("tool_version").get<std::string>();
  if (h.N < 1) throw std::runtime_error("read_field: component count must be >= 1");
  const Grid g(h.n, h.m);
  std::vector<char> buf(g.nodes() * h.N * 8);
  is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (is.gcount() != static_cast<std::streamsize>(buf.size()))
    throw std::runtime_error("read_field: truncated payload");
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("read_field: trailing bytes");
  std::vector<double> vals(g.nodes() * h.N);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &buf[i * 8], 8);
    vals[i] = std::bit_cast<double>(detail::to_le(bits));
  }
  return {h, VectorField(g, h.N, std::move(vals))};
}

inline void save_field(const std::string& path, const VectorField& u, const FieldHeader& hdr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_field(os, u, hdr);
}

inline FieldFile load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field(is);
}

}  // namespace plap
