#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace reactordb {

// Values passed to/returned from reactor procedures. Crossing a container
// boundary they are flattened to a byte string (containers share no state).
using Value = std::variant<std::monostate, int64_t, double, std::string>;
using Args = std::vector<Value>;

inline int64_t as_int(const Value& v) { return std::get<int64_t>(v); }
inline double as_double(const Value& v) {
  if (std::holds_alternative<int64_t>(v)) return double(std::get<int64_t>(v));
  return std::get<double>(v);
}
inline const std::string& as_str(const Value& v) { return std::get<std::string>(v); }

namespace codec {

inline void put_u64(std::string& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(char((v >> (8 * i)) & 0xff));
}
inline uint64_t get_u64(const std::string& in, size_t& pos) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | uint8_t(in[pos++]);
  return v;
}

inline void encode_value(std::string& out, const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) {
    out.push_back(0);
  } else if (std::holds_alternative<int64_t>(v)) {
    out.push_back(1);
    put_u64(out, uint64_t(std::get<int64_t>(v)));
  } else if (std::holds_alternative<double>(v)) {
    out.push_back(2);
    uint64_t bits;
    double d = std::get<double>(v);
    static_assert(sizeof(bits) == sizeof(d));
    __builtin_memcpy(&bits, &d, 8);
    put_u64(out, bits);
  } else {
    const auto& s = std::get<std::string>(v);
    out.push_back(3);
    put_u64(out, s.size());
    out.append(s);
  }
}

inline Value decode_value(const std::string& in, size_t& pos) {
  uint8_t tag = uint8_t(in[pos++]);
  switch (tag) {
    case 0: return std::monostate{};
    case 1: return int64_t(get_u64(in, pos));
    case 2: {
      uint64_t bits = get_u64(in, pos);
      double d;
      __builtin_memcpy(&d, &bits, 8);
      return d;
    }
    case 3: {
      uint64_t n = get_u64(in, pos);
      Value v = in.substr(pos, n);
      pos += n;
      return v;
    }
  }
  throw std::runtime_error("codec: bad value tag");
}

inline std::string encode_args(const Args& a) {
  std::string out;
  put_u64(out, a.size());
  for (const auto& v : a) encode_value(out, v);
  return out;
}

inline Args decode_args(const std::string& in) {
  size_t pos = 0;
  uint64_t n = get_u64(in, pos);
  Args a;
  a.reserve(n);
  for (uint64_t i = 0; i < n; ++i) a.push_back(decode_value(in, pos));
  return a;
}

}  // namespace codec

// Byte-comparable composite key builder. u64 fields are big-endian so
// memcmp order matches numeric order; string fields are NUL-terminated.
class Key {
 public:
  Key& u64(uint64_t v) {
    codec::put_u64(k_, v);
    return *this;
  }
  Key& str(const std::string& s) {
    k_.append(s);
    k_.push_back('\0');
    return *this;
  }
  const std::string& bytes() const { return k_; }
  operator std::string() const { return k_; }

 private:
  std::string k_;
};

inline std::string hex(const std::string& s) {
  static const char* d = "0123456789abcdef";
  std::string out;
  out.reserve(s.size() * 2);
  for (unsigned char c : s) {
    out.push_back(d[c >> 4]);
    out.push_back(d[c & 0xf]);
  }
  return out;
}

inline std::string unhex(const std::string& s) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::runtime_error("bad hex");
  };
  std::string out;
  out.reserve(s.size() / 2);
  for (size_t i = 0; i + 1 < s.size(); i += 2)
    out.push_back(char(nib(s[i]) << 4 | nib(s[i + 1])));
  return out;
}

}  // namespace reactordb
