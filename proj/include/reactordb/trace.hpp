#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <string>

#include "reactordb/codec.hpp"

namespace reactordb {

// Serialized trace appender. One op per line, globally sequenced:
//   seq txn subtxn reactor table key {r|w}
//   seq txn {c|a}
// Keys are hex-encoded so lines stay space-separated.
class Tracer {
 public:
  explicit Tracer(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open trace file: " + path);
  }

  void op(char kind, uint64_t txn, uint64_t subtxn, const std::string& reactor,
          const std::string& table, const std::string& key) {
    std::lock_guard lk(mu_);
    out_ << ++seq_ << ' ' << txn << ' ' << subtxn << ' ' << reactor << ' '
         << table << ' ' << hex(key) << ' ' << kind << '\n';
  }

  void terminal(char kind, uint64_t txn) {
    std::lock_guard lk(mu_);
    out_ << ++seq_ << ' ' << txn << ' ' << kind << '\n';
  }

  void flush() {
    std::lock_guard lk(mu_);
    out_.flush();
  }

 private:
  std::mutex mu_;
  uint64_t seq_ = 0;
  std::ofstream out_;
};

}  // namespace reactordb
