#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homlim/error.hpp"
#include "homlim/text.hpp"

namespace homlim {

using AtomIndex = std::uint64_t;

// A decidable subset of the naturals. Finite and eventually periodic sets are
// closed under complement; `Powers` covers {1, b, b^2, ...} and its complement,
// which no eventually periodic pattern can express.
class BaseSet {
 public:
  enum class Kind : std::uint8_t { Finite, Periodic, Powers };

  BaseSet() : BaseSet(periodic({}, {false})) {}

  static BaseSet finite(std::vector<AtomIndex> atoms) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    if (atoms.empty()) return periodic({}, {false});
    BaseSet s;
    s.kind_ = Kind::Finite;
    s.atoms_ = std::move(atoms);
    s.pre_.clear();
    s.period_.clear();
    return s;
  }

  static BaseSet periodic(std::vector<bool> pre, std::vector<bool> period) {
    if (period.empty()) throw Error(ErrorKind::Syntax, "empty period");
    BaseSet s(Kind::Periodic);
    s.pre_ = std::move(pre);
    s.period_ = std::move(period);
    s.normalize();
    return s;
  }

  static BaseSet powers(std::uint64_t base, bool complemented = false) {
    if (base < 2) throw Error(ErrorKind::Syntax, "powers base must be at least 2");
    BaseSet s(Kind::Powers);
    s.power_base_ = base;
    s.complemented_ = complemented;
    return s;
  }

  static BaseSet evens() { return periodic({}, {true, false}); }
  static BaseSet odds() { return periodic({}, {false, true}); }
  static BaseSet empty() { return periodic({}, {false}); }
  static BaseSet everything() { return periodic({}, {true}); }

  Kind kind() const { return kind_; }
  const std::vector<AtomIndex>& atoms() const { return atoms_; }
  const std::vector<bool>& preperiod() const { return pre_; }
  const std::vector<bool>& period() const { return period_; }

  bool contains(AtomIndex a) const {
    switch (kind_) {
      case Kind::Finite:
        return std::binary_search(atoms_.begin(), atoms_.end(), a);
      case Kind::Periodic:
        if (a < pre_.size()) return pre_[a];
        return period_[(a - pre_.size()) % period_.size()];
      case Kind::Powers:
        return is_power(a) != complemented_;
    }
    return false;
  }

  bool is_finite() const {
    if (kind_ == Kind::Finite) return true;
    if (kind_ == Kind::Periodic) return period_.size() == 1 && !period_[0];
    return false;
  }

  // Largest member of a finite set, if any.
  std::optional<AtomIndex> max_member() const {
    if (kind_ == Kind::Finite) return atoms_.back();
    return std::nullopt;
  }

  std::size_t finite_size() const { return kind_ == Kind::Finite ? atoms_.size() : 0; }

  BaseSet complement() const {
    switch (kind_) {
      case Kind::Finite: {
        std::vector<bool> pre(atoms_.back() + 1, true);
        for (AtomIndex a : atoms_) pre[a] = false;
        return periodic(std::move(pre), {true});
      }
      case Kind::Periodic: {
        auto pre = pre_;
        auto per = period_;
        pre.flip();
        per.flip();
        return periodic(std::move(pre), std::move(per));
      }
      case Kind::Powers:
        return powers(power_base_, !complemented_);
    }
    return *this;
  }

  // Image under a finitely supported permutation of atoms (given as a map
  // moving only its keys).
  BaseSet permuted(const std::map<AtomIndex, AtomIndex>& sigma) const {
    if (sigma.empty()) return *this;
    AtomIndex top = 0;
    for (auto [a, b] : sigma) top = std::max({top, a, b});
    if (kind_ == Kind::Finite) {
      std::vector<AtomIndex> out;
      for (AtomIndex a : atoms_) {
        auto it = sigma.find(a);
        out.push_back(it == sigma.end() ? a : it->second);
      }
      return finite(std::move(out));
    }
    // Spell out a prefix long enough to cover every moved atom, then remap it.
    std::size_t len = static_cast<std::size_t>(top) + 1;
    if (kind_ == Kind::Periodic) {
      len = std::max(len, pre_.size());
      len += (period_.size() - (len - pre_.size()) % period_.size()) % period_.size();
    }
    std::vector<bool> pre(len);
    for (std::size_t i = 0; i < len; ++i) {
      bool in = contains(i);
      auto it = sigma.find(i);
      AtomIndex j = it == sigma.end() ? i : it->second;
      pre[j] = in;
    }
    if (kind_ == Kind::Periodic) return periodic(std::move(pre), period_);
    throw Error(ErrorKind::InvalidDemand, "permuted powers sets are not representable");
  }

  // First atom on which the two sets disagree, searched up to `bound`.
  std::optional<AtomIndex> first_difference(const BaseSet& other, AtomIndex bound = 1 << 20) const {
    if (*this == other) return std::nullopt;
    AtomIndex exact = bound;
    if (kind_ != Kind::Powers && other.kind_ != Kind::Powers) {
      exact = std::max(span(), other.span()) + std::lcm(period_len(), other.period_len());
    }
    for (AtomIndex a = 0; a <= std::min(exact, bound); ++a) {
      if (contains(a) != other.contains(a)) return a;
    }
    if (exact <= bound) return std::nullopt;
    throw Error(ErrorKind::SeparationFailure, "no separating atom below bound for " + str() +
                                                  " and " + other.str());
  }

  std::string str() const {
    switch (kind_) {
      case Kind::Finite: {
        std::string out = "fin[";
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
          if (i) out += ',';
          out += std::to_string(atoms_[i]);
        }
        return out + "]";
      }
      case Kind::Periodic: {
        std::string out = "ep(";
        for (bool b : pre_) out += b ? '1' : '0';
        out += ';';
        for (bool b : period_) out += b ? '1' : '0';
        return out + ")";
      }
      case Kind::Powers:
        return std::string(complemented_ ? "copow(" : "pow(") + std::to_string(power_base_) + ")";
    }
    return {};
  }

  static BaseSet parse(text::Cursor& in) {
    if (in.accept("fin[")) {
      std::vector<AtomIndex> atoms{in.nat()};
      while (in.accept(",")) atoms.push_back(in.nat());
      in.expect("]");
      return finite(std::move(atoms));
    }
    if (in.accept("ep(")) {
      auto pre = bits(in);
      in.expect(";");
      auto per = bits(in);
      if (per.empty()) in.fail("empty period");
      in.expect(")");
      return periodic(std::move(pre), std::move(per));
    }
    bool co = in.accept("co");
    if (in.accept("pow(")) {
      auto b = in.nat();
      in.expect(")");
      if (b < 2) in.fail("powers base must be at least 2");
      return powers(b, co);
    }
    in.fail("expected base set");
  }

  static BaseSet parse(std::string_view s) {
    text::Cursor in(s);
    auto out = parse(in);
    in.expect_end();
    return out;
  }

  friend bool operator==(const BaseSet& a, const BaseSet& b) {
    return a.kind_ == b.kind_ && a.atoms_ == b.atoms_ && a.pre_ == b.pre_ &&
           a.period_ == b.period_ && a.power_base_ == b.power_base_ &&
           a.complemented_ == b.complemented_;
  }

  friend bool operator<(const BaseSet& a, const BaseSet& b) { return a.str() < b.str(); }

 private:
  explicit BaseSet(Kind k) : kind_(k) {}

  static std::vector<bool> bits(text::Cursor& in) {
    std::vector<bool> out;
    while (in.peek("0") || in.peek("1")) {
      out.push_back(in.peek("1"));
      in.accept(out.back() ? "1" : "0");
    }
    return out;
  }

  static bool is_power_of(AtomIndex a, std::uint64_t b) {
    if (a == 0) return false;
    while (a % b == 0) a /= b;
    return a == 1;
  }

  bool is_power(AtomIndex a) const { return is_power_of(a, power_base_); }

  AtomIndex span() const {
    if (kind_ == Kind::Finite) return atoms_.back() + 1;
    return pre_.size();
  }
  std::size_t period_len() const { return kind_ == Kind::Periodic ? period_.size() : 1; }

  void normalize() {
    // Minimal period.
    const std::size_t n = period_.size();
    for (std::size_t p = 1; p <= n; ++p) {
      if (n % p) continue;
      bool ok = true;
      for (std::size_t i = p; i < n && ok; ++i) ok = period_[i] == period_[i - p];
      if (ok) {
        period_.resize(p);
        break;
      }
    }
    // Minimal preperiod: roll the period back over matching trailing bits.
    while (!pre_.empty() && pre_.back() == period_.back()) {
      pre_.pop_back();
      std::rotate(period_.rbegin(), period_.rbegin() + 1, period_.rend());
    }
    if (period_.size() == 1 && !period_[0]) {
      std::vector<AtomIndex> atoms;
      for (std::size_t i = 0; i < pre_.size(); ++i)
        if (pre_[i]) atoms.push_back(i);
      if (!atoms.empty()) {
        kind_ = Kind::Finite;
        atoms_ = std::move(atoms);
        pre_.clear();
        period_.clear();
      }
    }
  }

  Kind kind_ = Kind::Periodic;
  std::vector<AtomIndex> atoms_;
  std::vector<bool> pre_;
  std::vector<bool> period_;
  std::uint64_t power_base_ = 0;
  bool complemented_ = false;
};

}  // namespace homlim
