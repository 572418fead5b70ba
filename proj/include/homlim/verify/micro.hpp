#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "homlim/error.hpp"
#include "homlim/tower/point.hpp"

namespace homlim::verify {

// The explicit level-1 universe over atoms 0..K-1: every B-point of step 0
// with support of size <= k, and the extension of Φ(X) for each of the 2^K
// subsets X, stored as bit vectors. Built without the lazy engine.
class MicroModel {
 public:
  using Point = tower::Point;

  MicroModel(unsigned atoms, unsigned support_bound) : k_atoms_(atoms), bound_(support_bound) {
    if (atoms > 4 || support_bound > 3) throw Error(ErrorKind::BudgetExceeded, "micro model is limited to K<=4, k<=3");
    for (unsigned a = 0; a < atoms; ++a) points_.push_back(Point::atom(a));
    for (std::uint32_t d = 0; d < (1u << atoms); ++d) {
      std::vector<Point> support;
      for (unsigned a = 0; a < atoms; ++a)
        if (d & (1u << a)) support.push_back(Point::atom(a));
      if (support.size() > support_bound) continue;
      const std::size_t entries = std::size_t{1} << support.size();
      for (std::uint64_t t = 0; t < (std::uint64_t{1} << entries); ++t) {
        std::vector<bool> table(entries);
        for (std::size_t m = 0; m < entries; ++m) table[m] = (t >> m) & 1u;
        points_.push_back(Point::bpoint(0, support, table));
      }
    }
    for (std::size_t i = 0; i < points_.size(); ++i) index_.emplace(points_[i].str(), i);
    for (std::uint32_t x = 0; x < (1u << atoms); ++x) {
      std::vector<bool> ext(points_.size());
      for (std::size_t i = 0; i < points_.size(); ++i) ext[i] = member(points_[i], x);
      extensions_.push_back(std::move(ext));
    }
  }

  unsigned atoms() const { return k_atoms_; }
  unsigned support_bound() const { return bound_; }
  const std::vector<Point>& points() const { return points_; }
  std::size_t bpoint_count() const { return points_.size() - k_atoms_; }

  // Σ over supports D of 2^(2^|D|), the expected B-point count.
  static std::uint64_t count_formula(unsigned atoms, unsigned bound) {
    std::uint64_t total = 0, binom = 1;
    for (unsigned s = 0; s <= std::min(atoms, bound); ++s) {
      if (s) binom = binom * (atoms - s + 1) / s;
      total += binom * (std::uint64_t{1} << (1u << s));
    }
    return total;
  }

  // x ∈ Φ(X) for X ⊆ {0..K-1} given as a bit mask; any level-0 or step-0 point.
  static bool member(const Point& p, std::uint32_t x) {
    auto in = [&](const Point& a) { return a.is_atom() && a.atom_index() < 32 && (x >> a.atom_index()) & 1u; };
    if (p.is_atom()) return in(p);
    if (p.step() != 0) throw Error(ErrorKind::LevelMismatch, "micro model holds step-0 points only");
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < p.support().size(); ++i)
      if (in(p.support()[i])) mask |= 1u << i;
    return p.table(mask);
  }

  bool stored_member(std::size_t point, std::uint32_t x) const { return extensions_[x][point]; }

  std::optional<std::size_t> find(const Point& p) const {
    auto it = index_.find(p.str());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // A permutation restricted to the fragment, as an explicit array of images.
  template <class Apply>
  std::vector<Point> tabulate(Apply&& apply) const {
    std::vector<Point> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back(apply(p));
    return out;
  }

 private:
  unsigned k_atoms_;
  unsigned bound_;
  std::vector<Point> points_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<bool>> extensions_;
};

}  // namespace homlim::verify
