#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/numeric/tensor.hpp"

namespace smarttodo::numeric {

// Binary parameter container, little-endian:
//   magic "SMTDCKPT" | u32 version | u32 n_header | (str key, str value)*
//   | u32 n_params | (str name, u64 rows, u64 cols, f64[rows*cols])*
// Strings are u32 length + bytes. Doubles are stored bit-exact.

inline constexpr char kCheckpointMagic[8] = {'S', 'M', 'T', 'D', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, std::string> header;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
      if (n == name) return t;
    }
    throw NumericError("checkpoint has no tensor named " + name);
  }
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

inline void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw NumericError("truncated checkpoint");
  return v;
}
inline std::string get_str(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 24)) throw NumericError("corrupt checkpoint string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw NumericError("truncated checkpoint");
  return s;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(ckpt.header.size()));
  for (const auto& [k, v] : ckpt.header) {
    detail::put_str(out, k);
    detail::put_str(out, v);
  }
  detail::put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    detail::put_str(out, name);
    detail::put_u64(out, t.rows());
    detail::put_u64(out, t.cols());
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
}

inline Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof kCheckpointMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw NumericError("not a parameter checkpoint (bad magic)");
  }
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw NumericError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const auto n_header = detail::get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_header; ++i) {
    std::string k = detail::get_str(in);
    ckpt.header[k] = detail::get_str(in);
  }
  const auto n = detail::get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = detail::get_str(in);
    const auto rows = detail::get<std::uint64_t>(in);
    const auto cols = detail::get<std::uint64_t>(in);
    if (rows * cols > (1ull << 32)) throw NumericError("corrupt checkpoint tensor size");
    std::vector<double> data(rows * cols);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw NumericError("truncated checkpoint tensor " + name);
    ckpt.tensors.emplace_back(std::move(name), Tensor(rows, cols, std::move(data)));
  }
  return ckpt;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericError("cannot write checkpoint " + path);
  write_checkpoint(out, ckpt);
  if (!out) throw NumericError("failed writing checkpoint " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericError("cannot read checkpoint " + path);
  return read_checkpoint(in);
}

inline Checkpoint to_checkpoint(const ParameterSet& params,
                                std::map<std::string, std::string> header = {}) {
  Checkpoint ckpt;
  ckpt.header = std::move(header);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.tensors.emplace_back(params[i].name, params[i].value);
  }
  return ckpt;
}

/// Copies checkpoint values into params by name; shapes must match exactly.
inline void load_into(ParameterSet& params, const Checkpoint& ckpt) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    const Tensor& t = ckpt.find(p.name);
    if (!t.same_shape(p.value)) {
      throw NumericError("checkpoint shape " + shape_string(t) + " for " + p.name +
                         " does not match model shape " + shape_string(p.value));
    }
    p.value = t;
  }
}

}  // namespace smarttodo::numeric
