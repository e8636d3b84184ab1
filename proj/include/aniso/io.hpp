#pragma once

// Plain-text and binary persistence of fields, profiles and Wulff shapes.
//
// Binary field layout, little-endian:
//   char[4] "ANIF", u32 dimension, u32 points[dimension],
//   f64 lower[dimension], f64 upper[dimension], u8 periodic[dimension],
//   f64 values[size] (row-major, last axis fastest).

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>

#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/profile1d.hpp"
#include "aniso/wulff.hpp"

namespace aniso {

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (res.ec != std::errc{}) throw Error("cannot format floating-point value");
  return std::string(buf.data(), res.ptr);
}

template <int N>
void write_field_csv(std::ostream& os, const GridField<N>& field) {
  for (int a = 0; a < N; ++a) os << 'x' << a << ',';
  os << "u\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Vec<N> x = field.grid.coordinate(i);
    for (int a = 0; a < N; ++a) os << format_double(x(a)) << ',';
    os << format_double(field[i]) << '\n';
  }
}

template <int N>
void write_profile_csv(std::ostream& os, const ProfileSolution<N>& p) {
  os << "s,u0,du0,residual\n";
  for (std::size_t i = 0; i < p.s.size(); ++i)
    os << format_double(p.s[i]) << ',' << format_double(p.u0[i]) << ',' << format_double(p.du0[i]) << ','
       << format_double(i < p.conservation_residual.size() ? p.conservation_residual[i] : 0.0) << '\n';
}

template <int N>
void write_wulff_csv(std::ostream& os, const WulffShape<N>& w) {
  for (int a = 0; a < N; ++a) os << (a ? ",x" : "x") << a;
  os << '\n';
  for (const auto& x : w.boundary) {
    for (int a = 0; a < N; ++a) os << (a ? "," : "") << format_double(x(a));
    os << '\n';
  }
}

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(b.data(), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<char, sizeof(T)> b;
  if (!is.read(b.data(), sizeof(T))) throw UsageError("truncated binary field");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

}  // namespace detail

template <int N>
void write_field_binary(std::ostream& os, const GridField<N>& field) {
  os.write("ANIF", 4);
  detail::put_le<std::uint32_t>(os, N);
  for (int p : field.grid.points) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p));
  for (double v : field.grid.lower) detail::put_le<double>(os, v);
  for (double v : field.grid.upper) detail::put_le<double>(os, v);
  for (auto bc : field.grid.boundary) detail::put_le<std::uint8_t>(os, bc == Boundary::periodic ? 1 : 0);
  for (double v : field.values) detail::put_le<double>(os, v);
}

template <int N>
GridField<N> read_field_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || std::string(magic.data(), 4) != "ANIF") throw UsageError("not a binary field");
  if (detail::get_le<std::uint32_t>(is) != static_cast<std::uint32_t>(N)) throw UsageError("binary field has a different dimension");
  GridSpec<N> g;
  for (auto& p : g.points) p = static_cast<int>(detail::get_le<std::uint32_t>(is));
  for (auto& v : g.lower) v = detail::get_le<double>(is);
  for (auto& v : g.upper) v = detail::get_le<double>(is);
  for (auto& bc : g.boundary) bc = detail::get_le<std::uint8_t>(is) ? Boundary::periodic : Boundary::dirichlet;
  GridField<N> f(g);
  for (auto& v : f.values) v = detail::get_le<double>(is);
  return f;
}

}  // namespace aniso
