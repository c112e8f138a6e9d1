#include "dgff/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dgff {

LatticeDomain::LatticeDomain(std::vector<LatticePoint> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts_ = std::move(pts);
  if (pts_.empty()) return;

  int xmin = pts_[0].x, xmax = pts_[0].x;
  int ymin = pts_[0].y, ymax = pts_[0].y;
  for (auto p : pts_) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  x0_ = xmin;
  y0_ = ymin;
  w_ = xmax - xmin + 1;
  h_ = ymax - ymin + 1;

  double fill = static_cast<double>(pts_.size()) /
                (static_cast<double>(w_) * static_cast<double>(h_));
  dense_ = fill > 0.25;
  if (dense_) {
    grid_.assign(static_cast<std::size_t>(w_) * h_, -1);
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      auto p = pts_[i];
      grid_[static_cast<std::size_t>(p.y - y0_) * w_ + (p.x - x0_)] =
          static_cast<int>(i);
    }
  } else {
    map_.reserve(pts_.size() * 2);
    for (std::size_t i = 0; i < pts_.size(); ++i)
      map_[key(pts_[i])] = static_cast<int>(i);
  }
  rect_ = pts_.size() ==
          static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_);

  // external boundary: vertices outside with a 4-neighbor inside
  std::set<LatticePoint> bnd;
  for (auto p : pts_)
    for (auto s : neighbor_steps()) {
      LatticePoint q = p + s;
      if (!contains(q)) bnd.insert(q);
    }
  boundary_.assign(bnd.begin(), bnd.end());
  bmap_.reserve(boundary_.size() * 2);
  for (std::size_t i = 0; i < boundary_.size(); ++i)
    bmap_[key(boundary_[i])] = static_cast<int>(i);
}

static long long gcd_ll(long long a, long long b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = gcd_ll(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational operator+(Rational a, Rational b) {
  return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
}
Rational operator-(Rational a, Rational b) {
  return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
}
Rational operator*(Rational a, Rational b) {
  return Rational(a.num * b.num, a.den * b.den);
}
bool operator<(Rational a, Rational b) {
  return static_cast<__int128>(a.num) * b.den <
         static_cast<__int128>(b.num) * a.den;
}
bool operator<=(Rational a, Rational b) { return !(b < a); }
bool operator==(Rational a, Rational b) {
  return a.num == b.num && a.den == b.den;
}

void DomainSpec::add_rect(Rational x0, Rational x1, Rational y0, Rational y1) {
  if (!(x0 < x1) || !(y0 < y1))
    throw std::domain_error("DomainSpec: degenerate rectangle");
  rects_.push_back({x0, x1, y0, y1});
}

bool DomainSpec::contains_point(Rational px, Rational py) const {
  for (const auto& r : rects_)
    if (r.x0 < px && px < r.x1 && r.y0 < py && py < r.y1) return true;
  return false;
}

// The union's membership indicator is constant on every face of the
// arrangement cut by the rectangle edge lines.  Testing the tensor grid of
// all cut coordinates plus midpoints therefore decides containment exactly.
bool DomainSpec::contains_closed_box(Rational a0, Rational a1, Rational b0,
                                     Rational b1) const {
  if (rects_.empty()) return false;
  std::vector<Rational> xs{a0, a1}, ys{b0, b1};
  for (const auto& r : rects_) {
    for (Rational v : {r.x0, r.x1})
      if (a0 < v && v < a1) xs.push_back(v);
    for (Rational v : {r.y0, r.y1})
      if (b0 < v && v < b1) ys.push_back(v);
  }
  auto lt = [](Rational a, Rational b) { return a < b; };
  std::sort(xs.begin(), xs.end(), lt);
  std::sort(ys.begin(), ys.end(), lt);
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<Rational> px, py;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    px.push_back(xs[i]);
    if (i + 1 < xs.size()) px.push_back((xs[i] + xs[i + 1]).half());
  }
  for (std::size_t j = 0; j < ys.size(); ++j) {
    py.push_back(ys[j]);
    if (j + 1 < ys.size()) py.push_back((ys[j] + ys[j + 1]).half());
  }
  for (const auto& vx : px)
    for (const auto& vy : py)
      if (!contains_point(vx, vy)) return false;
  return true;
}

LatticeDomain discretize(const DomainSpec& spec, int N) {
  if (N < 1) throw std::domain_error("discretize: N must be >= 1");
  if (spec.empty()) throw std::domain_error("discretize: empty spec");

  // integer candidates from the scaled bounding box
  Rational xmin = spec.rects()[0].x0, xmax = spec.rects()[0].x1;
  Rational ymin = spec.rects()[0].y0, ymax = spec.rects()[0].y1;
  for (const auto& r : spec.rects()) {
    if (r.x0 < xmin) xmin = r.x0;
    if (xmax < r.x1) xmax = r.x1;
    if (r.y0 < ymin) ymin = r.y0;
    if (ymax < r.y1) ymax = r.y1;
  }
  auto lo = [N](Rational v) {
    return static_cast<int>(std::floor(v.to_double() * N)) - 2;
  };
  auto hi = [N](Rational v) {
    return static_cast<int>(std::ceil(v.to_double() * N)) + 2;
  };

  std::vector<LatticePoint> out;
  for (int y = lo(ymin); y <= hi(ymax); ++y)
    for (int x = lo(xmin); x <= hi(xmax); ++x) {
      // dist_inf(x/N, D^c) > 1/N  <=>  closed box of radius 1/N around x/N
      // lies inside the open union
      Rational a0(x - 1, N), a1(x + 1, N), b0(y - 1, N), b1(y + 1, N);
      if (spec.contains_closed_box(a0, a1, b0, b1)) out.push_back({x, y});
    }
  return LatticeDomain(std::move(out));
}

LatticeDomain concentric_box(int k) {
  if (k < 0) throw std::domain_error("concentric_box: k must be >= 0");
  if (k == 0) return LatticeDomain({{0, 0}});
  if (k > 10)
    throw std::domain_error("concentric_box: k > 10 not materializable");
  int r = 1 << k;
  std::vector<LatticePoint> pts;
  pts.reserve(static_cast<std::size_t>(2 * r + 1) * (2 * r + 1));
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) pts.push_back({x, y});
  return LatticeDomain(std::move(pts));
}

LatticeDomain ball(LatticePoint center, double r) {
  if (r < 0) throw std::domain_error("ball: negative radius");
  int ri = static_cast<int>(std::floor(r));
  double r2 = r * r;
  std::vector<LatticePoint> pts;
  for (int dy = -ri; dy <= ri; ++dy)
    for (int dx = -ri; dx <= ri; ++dx)
      if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy <= r2)
        pts.push_back({center.x + dx, center.y + dy});
  return LatticeDomain(std::move(pts));
}

LatticeDomain concentric_annulus(int k) {
  if (k < 1) throw std::domain_error("concentric_annulus: k must be >= 1");
  if (k > 10) throw std::domain_error("concentric_annulus: k > 10");
  LatticeDomain inner = concentric_box(k - 1);
  int ro = 1 << k;
  std::vector<LatticePoint> pts;
  for (int y = -ro; y <= ro; ++y)
    for (int x = -ro; x <= ro; ++x) {
      LatticePoint p{x, y};
      if (!inner.contains(p) && inner.boundary_index_of(p) < 0)
        pts.push_back(p);
    }
  return LatticeDomain(std::move(pts));
}

} // namespace dgff
