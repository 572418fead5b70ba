#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "homlim/error.hpp"

namespace homlim::text {

// Minimal cursor over the canonical grammar. All parse errors carry the offset.
class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  std::size_t pos() const { return pos_; }
  std::string_view rest() const { return s_.substr(pos_); }

  bool peek(std::string_view lit) const { return s_.substr(pos_, lit.size()) == lit; }

  bool accept(std::string_view lit) {
    if (!peek(lit)) return false;
    pos_ += lit.size();
    return true;
  }

  void expect(std::string_view lit) {
    if (!accept(lit)) fail("expected '" + std::string(lit) + "'");
  }

  bool peek_digit() const { return !done() && std::isdigit(static_cast<unsigned char>(s_[pos_])); }

  std::uint64_t nat() {
    if (!peek_digit()) fail("expected natural number");
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("number out of range");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  void expect_end() {
    if (!done()) fail("trailing input");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Syntax, msg + " at offset " + std::to_string(pos_) + " in '" +
                                       std::string(s_) + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

// Separator between a grid point's base and its history entries (U+00B7).
inline constexpr std::string_view kMiddleDot = "\xC2\xB7";

}  // namespace homlim::text
