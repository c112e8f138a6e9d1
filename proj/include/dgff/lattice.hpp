#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace dgff {

struct LatticePoint {
  int x = 0;
  int y = 0;

  friend bool operator==(LatticePoint a, LatticePoint b) {
    return a.x == b.x && a.y == b.y;
  }
  friend bool operator!=(LatticePoint a, LatticePoint b) { return !(a == b); }
  // row-major order: y first, then x
  friend bool operator<(LatticePoint a, LatticePoint b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
  friend LatticePoint operator+(LatticePoint a, LatticePoint b) {
    return {a.x + b.x, a.y + b.y};
  }
  friend LatticePoint operator-(LatticePoint a, LatticePoint b) {
    return {a.x - b.x, a.y - b.y};
  }

  int linf() const { return std::max(x < 0 ? -x : x, y < 0 ? -y : y); }
  long long l2sq() const {
    return static_cast<long long>(x) * x + static_cast<long long>(y) * y;
  }
  double l2() const { return std::sqrt(static_cast<double>(l2sq())); }
};

inline const std::array<LatticePoint, 4>& neighbor_steps() {
  static const std::array<LatticePoint, 4> steps{
      LatticePoint{1, 0}, LatticePoint{-1, 0}, LatticePoint{0, 1},
      LatticePoint{0, -1}};
  return steps;
}

// Finite set of lattice points with O(1) membership, derived external
// boundary, and a fixed row-major point order used as the index space for
// vectors and matrices living on the domain.  Immutable once built.
class LatticeDomain {
public:
  LatticeDomain() = default;
  explicit LatticeDomain(std::vector<LatticePoint> pts);

  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  const std::vector<LatticePoint>& points() const { return pts_; }
  const std::vector<LatticePoint>& boundary() const { return boundary_; }

  bool contains(LatticePoint p) const { return index_of(p) >= 0; }

  // index in points() order, -1 if absent
  int index_of(LatticePoint p) const {
    if (dense_) {
      if (p.x < x0_ || p.y < y0_ || p.x >= x0_ + w_ || p.y >= y0_ + h_)
        return -1;
      return grid_[static_cast<std::size_t>(p.y - y0_) * w_ + (p.x - x0_)];
    }
    auto it = map_.find(key(p));
    return it == map_.end() ? -1 : it->second;
  }

  int boundary_index_of(LatticePoint p) const {
    auto it = bmap_.find(key(p));
    return it == bmap_.end() ? -1 : it->second;
  }

  bool is_rectangle() const { return rect_; }
  // bounding box (valid when nonempty)
  int min_x() const { return x0_; }
  int min_y() const { return y0_; }
  int width() const { return w_; }
  int height() const { return h_; }

private:
  static std::uint64_t key(LatticePoint p) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
           static_cast<std::uint32_t>(p.y);
  }

  std::vector<LatticePoint> pts_;
  std::vector<LatticePoint> boundary_;
  std::unordered_map<std::uint64_t, int> map_;
  std::unordered_map<std::uint64_t, int> bmap_;
  std::vector<int> grid_;
  int x0_ = 0, y0_ = 0, w_ = 0, h_ = 0;
  bool dense_ = false;
  bool rect_ = false;
};

// exact rational with small normalized representation
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}
  Rational(long long n, long long d);

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend bool operator<(Rational a, Rational b);
  friend bool operator<=(Rational a, Rational b);
  friend bool operator==(Rational a, Rational b);
  Rational half() const { return Rational(num, 2 * den); }
  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

// Bounded open region given as a finite union of axis-aligned open
// rectangles with rational corners.  All geometry is exact.
class DomainSpec {
public:
  struct Rect {
    Rational x0, x1, y0, y1;
  };

  void add_rect(Rational x0, Rational x1, Rational y0, Rational y1);
  const std::vector<Rect>& rects() const { return rects_; }
  bool empty() const { return rects_.empty(); }

  bool contains_point(Rational px, Rational py) const;
  // is the closed box [a0,a1] x [b0,b1] contained in the open union?
  bool contains_closed_box(Rational a0, Rational a1, Rational b0,
                           Rational b1) const;

private:
  std::vector<Rect> rects_;
};

// { x in Z^2 : dist_inf(x/N, D^c) > 1/N }; empty result is legal
LatticeDomain discretize(const DomainSpec& spec, int N);

// Delta^0 = {0}; Delta^k = { |x|_inf <= 2^k } for k >= 1
LatticeDomain concentric_box(int k);

// Euclidean ball { z : |z - center| <= r }
LatticeDomain ball(LatticePoint center, double r);

// annulus Delta^k minus closure(Delta^{k-1})
LatticeDomain concentric_annulus(int k);

} // namespace dgff
