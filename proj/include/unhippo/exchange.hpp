#pragma once

// Single-file tensor container:
//
//   bytes 0..3   magic "UNH1"
//   bytes 4..7   header length, little-endian uint32
//   header       UTF-8 JSON: {"format_version": 1,
//                             "tensors": [{"name", "shape", "dtype",
//                                          "offset", "length"}, ...],
//                             "meta": {...}}
//   payload      tensors in header order, row-major little-endian,
//                offsets relative to the start of the payload
//
// Banks and layers have fixed tensor naming conventions defined below.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "unhippo/errors.hpp"
#include "unhippo/kalman.hpp"
#include "unhippo/matfun.hpp"
#include "unhippo/ssm.hpp"

namespace unhippo {

using Json = nlohmann::json;

inline constexpr char kContainerMagic[4] = {'U', 'N', 'H', '1'};
inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "unhippo 0.1.0";

enum class DType { f64, f32 };

inline std::string_view to_string(DType t) { return t == DType::f64 ? "f64" : "f32"; }
inline std::size_t dtype_size(DType t) { return t == DType::f64 ? 8 : 4; }

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::variant<std::vector<double>, std::vector<float>> data;

  DType dtype() const {
    return std::holds_alternative<std::vector<double>>(data) ? DType::f64 : DType::f32;
  }
  std::size_t element_count() const {
    return std::visit([](const auto& v) { return v.size(); }, data);
  }
  const std::vector<double>& f64() const { return std::get<std::vector<double>>(data); }
  const std::vector<float>& f32() const { return std::get<std::vector<float>>(data); }
};

inline std::size_t shape_count(const std::vector<std::size_t>& shape) {
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  return count;
}

inline Tensor make_tensor(std::string name, const Matrix& m) {
  Tensor t{std::move(name), {static_cast<std::size_t>(m.rows()),
                             static_cast<std::size_t>(m.cols())}, std::vector<double>{}};
  auto& v = std::get<std::vector<double>>(t.data);
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  }
  return t;
}

inline Tensor make_tensor(std::string name, const Vector& x) {
  return {std::move(name), {static_cast<std::size_t>(x.size())},
          std::vector<double>(x.data(), x.data() + x.size())};
}

struct Container {
  std::vector<Tensor> tensors;
  Json meta = Json::object();

  const Tensor& find(std::string_view name) const {
    for (const Tensor& t : tensors) {
      if (t.name == name) return t;
    }
    throw FormatError("container has no tensor '" + std::string(name) + "'");
  }
};

namespace detail {

template <typename T>
void append_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T read_le(const char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

}  // namespace detail

/// Serializes to a byte string (the exact file contents).
inline std::string encode_container(const std::vector<Tensor>& tensors,
                                    const Json& meta) {
  std::unordered_set<std::string> names;
  Json entries = Json::array();
  std::string payload;
  for (const Tensor& t : tensors) {
    if (!names.insert(t.name).second) {
      throw InputError("write_container: duplicate tensor name '" + t.name + "'");
    }
    if (t.shape.empty() || shape_count(t.shape) == 0) {
      throw InputError("write_container: tensor '" + t.name + "' has an empty shape");
    }
    if (shape_count(t.shape) != t.element_count()) {
      throw InputError("write_container: tensor '" + t.name +
                       "' data does not match its shape");
    }
    const std::size_t offset = payload.size();
    std::visit([&](const auto& v) { for (auto x : v) detail::append_le(payload, x); },
               t.data);
    entries.push_back({{"name", t.name},
                       {"shape", t.shape},
                       {"dtype", to_string(t.dtype())},
                       {"offset", offset},
                       {"length", payload.size() - offset}});
  }
  Json header = {{"format_version", kFormatVersion},
                 {"tensors", entries},
                 {"meta", meta.is_null() ? Json::object() : meta}};
  const std::string header_text = header.dump();
  std::string out(kContainerMagic, 4);
  detail::append_le(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  out += payload;
  return out;
}

/// Writes atomically: a sibling temp file is renamed over `path`.
inline void write_container(const std::filesystem::path& path,
                            const std::vector<Tensor>& tensors, const Json& meta) {
  const std::string bytes = encode_container(tensors, meta);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move container into place: " + path.string());
  }
}

inline Container decode_container(std::string_view bytes) {
  if (bytes.size() < 8) throw FormatError("magic: file shorter than the fixed prefix");
  if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
    throw FormatError("magic: expected \"UNH1\"");
  }
  const auto header_len = detail::read_le<std::uint32_t>(bytes.data() + 4);
  if (bytes.size() - 8 < header_len) {
    throw FormatError("header_len: header extends past end of file");
  }
  Json header;
  try {
    header = Json::parse(bytes.substr(8, header_len));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("header: invalid JSON: ") + e.what());
  }
  if (!header.is_object()) throw FormatError("header: not a JSON object");
  if (!header.contains("format_version") || header["format_version"] != kFormatVersion) {
    throw FormatError("format_version: unsupported or missing");
  }
  if (!header.contains("tensors") || !header["tensors"].is_array()) {
    throw FormatError("tensors: missing or not an array");
  }
  const std::string_view payload = bytes.substr(8 + header_len);
  Container out;
  if (header.contains("meta")) {
    if (!header["meta"].is_object()) throw FormatError("meta: not an object");
    out.meta = header["meta"];
  }
  std::size_t expected_offset = 0;
  std::unordered_set<std::string> names;
  for (std::size_t i = 0; i < header["tensors"].size(); ++i) {
    const Json& e = header["tensors"][i];
    const std::string where = "tensors[" + std::to_string(i) + "]";
    auto field = [&](const char* key) -> const Json& {
      if (!e.is_object() || !e.contains(key)) {
        throw FormatError(where + "." + key + ": missing");
      }
      return e[key];
    };
    Tensor t;
    if (!field("name").is_string()) throw FormatError(where + ".name: not a string");
    t.name = field("name").get<std::string>();
    if (!names.insert(t.name).second) throw FormatError(where + ".name: duplicate");
    const Json& shape = field("shape");
    if (!shape.is_array() || shape.empty()) throw FormatError(where + ".shape: invalid");
    for (const Json& d : shape) {
      if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
        throw FormatError(where + ".shape: dimensions must be positive integers");
      }
      t.shape.push_back(d.get<std::size_t>());
    }
    const Json& dtype = field("dtype");
    DType dt;
    if (dtype == "f64") {
      dt = DType::f64;
    } else if (dtype == "f32") {
      dt = DType::f32;
    } else {
      throw FormatError(where + ".dtype: must be \"f64\" or \"f32\"");
    }
    const Json& off = field("offset");
    const Json& len = field("length");
    if (!off.is_number_unsigned()) throw FormatError(where + ".offset: invalid");
    if (!len.is_number_unsigned()) throw FormatError(where + ".length: invalid");
    const auto offset = off.get<std::size_t>();
    const auto length = len.get<std::size_t>();
    const std::size_t count = shape_count(t.shape);
    if (length != count * dtype_size(dt)) {
      throw FormatError(where + ".length: disagrees with shape and dtype");
    }
    if (offset != expected_offset) {
      throw FormatError(where + ".offset: tensors must be contiguous in header order");
    }
    if (offset + length > payload.size()) {
      throw FormatError(where + ".length: payload truncated");
    }
    const char* p = payload.data() + offset;
    if (dt == DType::f64) {
      std::vector<double> v(count);
      for (std::size_t j = 0; j < count; ++j) v[j] = detail::read_le<double>(p + 8 * j);
      t.data = std::move(v);
    } else {
      std::vector<float> v(count);
      for (std::size_t j = 0; j < count; ++j) v[j] = detail::read_le<float>(p + 4 * j);
      t.data = std::move(v);
    }
    expected_offset = offset + length;
    out.tensors.push_back(std::move(t));
  }
  if (expected_offset != payload.size()) {
    throw FormatError("payload: " + std::to_string(payload.size() - expected_offset) +
                      " trailing bytes after the last tensor");
  }
  return out;
}

inline Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

// ---- Conventions for banks and layers ---------------------------------------

inline Matrix tensor_matrix(const Tensor& t, std::size_t offset, std::size_t rows,
                            std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const auto value = [&](std::size_t idx) -> double {
    return t.dtype() == DType::f64 ? t.f64()[idx] : static_cast<double>(t.f32()[idx]);
  };
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          value(offset + i * cols + j);
    }
  }
  return m;
}

/// Tensors A_1..A_T ([n, n]) followed by B_1..B_T ([n]).
inline std::vector<Tensor> bank_tensors(const InitBank& bank) {
  std::vector<Tensor> out;
  out.reserve(2 * bank.pairs.size());
  for (std::size_t k = 1; k <= bank.pairs.size(); ++k) {
    out.push_back(make_tensor("A_" + std::to_string(k), bank.at(k).a_bar));
  }
  for (std::size_t k = 1; k <= bank.pairs.size(); ++k) {
    out.push_back(make_tensor("B_" + std::to_string(k), bank.at(k).b_bar));
  }
  return out;
}

inline Json bank_meta(const InitBank& bank) {
  Json meta = {{"kind", to_string(bank.kind)},
               {"n", bank.n},
               {"t_max", bank.t_max},
               {"scheme", to_string(bank.scheme)},
               {"tool_version", kToolVersion}};
  if (bank.kind == BankKind::unhippo) {
    meta["sigma2"] = bank.sigma2;
    meta["process_scale"] = bank.process_scale;
  }
  if (!bank.provenance.empty()) meta["provenance"] = bank.provenance;
  return meta;
}

inline void write_bank(const std::filesystem::path& path, const InitBank& bank) {
  write_container(path, bank_tensors(bank), bank_meta(bank));
}

inline InitBank bank_from_container(const Container& c) {
  InitBank bank;
  try {
    const auto kind = parse_bank_kind(c.meta.at("kind").get<std::string>());
    const auto scheme = parse_scheme(c.meta.at("scheme").get<std::string>());
    if (!kind || !scheme) throw FormatError("meta: unknown kind or scheme");
    bank.kind = *kind;
    bank.scheme = *scheme;
    bank.n = c.meta.at("n").get<std::size_t>();
    bank.t_max = c.meta.at("t_max").get<std::size_t>();
    bank.sigma2 = c.meta.value("sigma2", 0.0);
    bank.process_scale = c.meta.value("process_scale", 0.0);
    bank.provenance = c.meta.value("provenance", std::string{});
  } catch (const Json::exception& e) {
    throw FormatError(std::string("meta: ") + e.what());
  }
  for (std::size_t k = 1; k <= bank.t_max; ++k) {
    const Tensor& a = c.find("A_" + std::to_string(k));
    const Tensor& b = c.find("B_" + std::to_string(k));
    if (a.shape != std::vector<std::size_t>{bank.n, bank.n} ||
        b.shape != std::vector<std::size_t>{bank.n}) {
      throw FormatError("bank step " + std::to_string(k) + ": tensor shape mismatch");
    }
    bank.pairs.push_back({tensor_matrix(a, 0, bank.n, bank.n),
                          tensor_matrix(b, 0, bank.n, 1).col(0)});
  }
  return bank;
}

/// Stacked layer tensors: A [h,n,n], B [h,n], C [h,m,n], D [h,m],
/// mix_weights [h*m, h], mix_bias [h].
inline std::vector<Tensor> layer_tensors(const LsslLayer& layer) {
  layer.validate();
  const std::size_t h = layer.features();
  const auto n = static_cast<std::size_t>(layer.cores.front().state_size());
  const auto m = static_cast<std::size_t>(layer.cores.front().channels());
  std::vector<double> a, b, c, d;
  for (const SsmCore& core : layer.cores) {
    const auto push = [](std::vector<double>& dst, const Tensor& t) {
      dst.insert(dst.end(), t.f64().begin(), t.f64().end());
    };
    push(a, make_tensor("", core.a));
    push(b, make_tensor("", core.b));
    push(c, make_tensor("", core.c));
    push(d, make_tensor("", core.d));
  }
  std::vector<Tensor> out;
  out.push_back({"A", {h, n, n}, std::move(a)});
  out.push_back({"B", {h, n}, std::move(b)});
  out.push_back({"C", {h, m, n}, std::move(c)});
  out.push_back({"D", {h, m}, std::move(d)});
  out.push_back(make_tensor("mix_weights", layer.mix_weights));
  out.back().shape = {h * m, h};
  out.push_back(make_tensor("mix_bias", layer.mix_bias));
  return out;
}

inline LsslLayer layer_from_container(const Container& c) {
  const Tensor& a = c.find("A");
  const Tensor& b = c.find("B");
  const Tensor& cm = c.find("C");
  const Tensor& d = c.find("D");
  const Tensor& w = c.find("mix_weights");
  const Tensor& bias = c.find("mix_bias");
  if (a.shape.size() != 3 || cm.shape.size() != 3 || b.shape.size() != 2 ||
      d.shape.size() != 2 || w.shape.size() != 2 || bias.shape.size() != 1) {
    throw FormatError("layer: tensor ranks do not match the layer layout");
  }
  const std::size_t h = a.shape[0], n = a.shape[1], m = cm.shape[1];
  if (a.shape[2] != n || b.shape != std::vector<std::size_t>{h, n} ||
      cm.shape != std::vector<std::size_t>{h, m, n} ||
      d.shape != std::vector<std::size_t>{h, m} ||
      w.shape != std::vector<std::size_t>{h * m, h} ||
      bias.shape != std::vector<std::size_t>{h}) {
    throw FormatError("layer: tensor shapes are inconsistent");
  }
  LsslLayer layer;
  for (std::size_t f = 0; f < h; ++f) {
    layer.cores.push_back({tensor_matrix(a, f * n * n, n, n),
                           tensor_matrix(b, f * n, n, 1).col(0),
                           tensor_matrix(cm, f * m * n, m, n),
                           tensor_matrix(d, f * m, m, 1).col(0)});
  }
  layer.mix_weights = tensor_matrix(w, 0, h * m, h);
  layer.mix_bias = tensor_matrix(bias, 0, h, 1).col(0);
  layer.validate();
  return layer;
}

}  // namespace unhippo
