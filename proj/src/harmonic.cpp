#include "dgff/harmonic.hpp"

#include <cmath>

#include "dgff/fast_poisson.hpp"
#include "dgff/parallel.hpp"

namespace dgff {

namespace {

double axis_integral(int l, int m, int nodes) {
  // (2/pi) Int_0^pi (1 - e^{-m r} cos(k l)) / sinh r dk, cosh r = 2 - cos k
  double h = M_PI / nodes;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    double k = (i + 0.5) * h;
    double s = std::sin(0.5 * k);
    double cm1 = 2.0 * s * s;                 // cosh r - 1 = 1 - cos k
    double c = 1.0 + cm1;
    double sh = std::sqrt(cm1 * (c + 1.0));   // sinh r
    double r = std::log1p(cm1 + sh);
    sum += (1.0 - std::exp(-m * r) * std::cos(k * l)) / sh;
  }
  return sum * h * (2.0 / M_PI);
}

} // namespace

double potential_kernel(LatticePoint x, const QuadratureSpec& spec) {
  if (x.x == 0 && x.y == 0) return 0.0;
  int ax = std::abs(x.x), ay = std::abs(x.y);
  int m = std::max(ax, ay), l = std::min(ax, ay);
  if (spec.nodes < 16) throw ToleranceNotMet("potential_kernel: nodes < 16");
  // the e^{-m r(k)} boundary layer at k ~ 1/m needs resolution growing
  // with m; the midpoint error behaves like 0.014 (m pi / nodes)^2
  int nodes = spec.nodes * std::max(1, m);
  double coarse = axis_integral(l, m, nodes / 2);
  double fine = axis_integral(l, m, nodes);
  if (std::abs(fine - coarse) / 3.0 > spec.tolerance)
    throw ToleranceNotMet("potential_kernel: quadrature not Richardson-stable "
                          "at requested tolerance");
  return fine;
}

double potential_kernel_2d(LatticePoint x, int mesh_per_axis) {
  // midpoint tensor rule; quadrant folding uses
  // sum_{signs} cos(k.x) = 4 cos(k1 x1) cos(k2 x2)
  int m = mesh_per_axis / 2; // nodes per positive half-axis
  double h = M_PI / m;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    double k1 = (i + 0.5) * h;
    double s1 = std::sin(0.5 * k1);
    double c1 = std::cos(k1 * x.x);
    for (int j = 0; j < m; ++j) {
      double k2 = (j + 0.5) * h;
      double s2 = std::sin(0.5 * k2);
      sum += (1.0 - c1 * std::cos(k2 * x.y)) / (s1 * s1 + s2 * s2);
    }
  }
  return sum * 4.0 * h * h / (4.0 * M_PI * M_PI);
}

std::uint64_t PotentialTable::canonical_key(LatticePoint x) {
  std::uint32_t ax = static_cast<std::uint32_t>(std::abs(x.x));
  std::uint32_t ay = static_cast<std::uint32_t>(std::abs(x.y));
  if (ax < ay) std::swap(ax, ay);
  return (static_cast<std::uint64_t>(ax) << 32) | ay;
}

void PotentialTable::fit_far_field() const {
  if (far_ready_) return;
  // linear least squares for (c0, a4) on the ring 40 <= |x| <= kNearRadius
  double m00 = 0, m01 = 0, m11 = 0, b0 = 0, b1 = 0;
  for (int x = 0; x <= kNearRadius; ++x)
    for (int y = 0; y <= x; ++y) {
      double r2 = double(x) * x + double(y) * y;
      double r = std::sqrt(r2);
      if (r < 40.0 || r > double(kNearRadius)) continue;
      double f = std::cos(4.0 * std::atan2(double(y), double(x))) / r2;
      double val = potential_kernel({x, y}, spec_) - kG * std::log(r);
      m00 += 1.0;
      m01 += f;
      m11 += f * f;
      b0 += val;
      b1 += val * f;
    }
  double det = m00 * m11 - m01 * m01;
  c0_ = (b0 * m11 - b1 * m01) / det;
  a4_ = (m00 * b1 - m01 * b0) / det;
  far_ready_ = true;
}

double PotentialTable::fitted_c0() const {
  fit_far_field();
  return c0_;
}

double PotentialTable::value(LatticePoint x) const {
  if (x.x == 0 && x.y == 0) return 0.0;
  double r2 = double(x.x) * x.x + double(x.y) * x.y;
  if (r2 > double(kNearRadius) * kNearRadius) {
    fit_far_field();
    double th = std::atan2(double(std::abs(x.y)), double(std::abs(x.x)));
    return kG * 0.5 * std::log(r2) + c0_ + a4_ * std::cos(4.0 * th) / r2;
  }
  auto k = canonical_key(x);
  auto it = cache_.find(k);
  if (it != cache_.end()) return it->second;
  double v = potential_kernel(x, spec_);
  cache_.emplace(k, v);
  return v;
}

void PotentialTable::ensure_box(int radius) {
  int r = std::min(radius, kNearRadius);
  for (int ax = 0; ax <= r; ++ax)
    for (int ay = 0; ay <= ax; ++ay)
      if (ax || ay) value({ax, ay});
  if (radius > kNearRadius) fit_far_field();
}

C0Fit fit_c0(const PotentialTable& table, double rmin, double rmax) {
  if (rmin < 16.0) throw std::domain_error("fit_c0: radii must be >= 16");
  // sample radii geometrically, three directions per radius; values come
  // straight from the quadrature so the fit stays independent of the
  // table's own far-field shortcut
  std::vector<double> logr, av;
  int steps = 10;
  for (int i = 0; i <= steps; ++i) {
    double r = rmin * std::pow(rmax / rmin, double(i) / steps);
    int n = static_cast<int>(std::lround(r));
    int d = static_cast<int>(std::lround(r / std::sqrt(2.0)));
    LatticePoint probes[3] = {{n, 0}, {d, d}, {n, n / 2}};
    for (auto p : probes) {
      double rr = p.l2();
      if (rr < rmin - 0.5 || rr > rmax * 1.5) continue;
      logr.push_back(std::log(rr));
      av.push_back(potential_kernel(p, table.spec()));
    }
  }
  std::size_t n = av.size();
  if (n < 8) throw std::domain_error("fit_c0: need >= 8 probe radii");

  C0Fit fit;
  fit.points = static_cast<int>(n);
  // c0 with the slope pinned at g
  double lo = 1e300, hi = -1e300, acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double c = av[i] - kG * logr[i];
    acc += c;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  fit.c0 = acc / double(n);
  fit.residual_spread = hi - lo;
  // free-slope least squares for g_hat
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += logr[i];
    my += av[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (logr[i] - mx) * (logr[i] - mx);
    sxy += (logr[i] - mx) * (av[i] - my);
  }
  fit.g_hat = sxy / sxx;
  return fit;
}

Eigen::SparseMatrix<double> dirichlet_system(const LatticeDomain& D) {
  const auto& pts = D.points();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(pts.size() * 5);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    trip.emplace_back(int(i), int(i), 4.0);
    for (auto s : neighbor_steps()) {
      int j = D.index_of(pts[i] + s);
      if (j >= 0) trip.emplace_back(int(i), j, -1.0);
    }
  }
  Eigen::SparseMatrix<double> M(int(pts.size()), int(pts.size()));
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

DirichletSolver::DirichletSolver(const LatticeDomain& D) {
  ldlt_.compute(dirichlet_system(D));
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("DirichletSolver: factorization failed");
}

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd& rhs) const {
  return ldlt_.solve(rhs);
}

GreenMatrix green_matrix(const LatticeDomain& D) {
  return green_matrix(std::make_shared<LatticeDomain>(D));
}

GreenMatrix green_matrix(std::shared_ptr<const LatticeDomain> D) {
  if (D->empty()) throw std::domain_error("green_matrix: empty domain");
  const std::size_t n = D->size();
  if (n > 20000) throw std::domain_error("green_matrix: dense cap exceeded");
  if (n == 1) {
    GreenMatrix g{D, Eigen::MatrixXd::Constant(1, 1, 1.0)};
    return g;
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const auto& pts = D->points();
  for (std::size_t i = 0; i < n; ++i) {
    M(i, i) = 1.0;
    for (auto s : neighbor_steps()) {
      int j = D->index_of(pts[i] + s);
      if (j >= 0) M(i, j) = -0.25;
    }
  }
  Eigen::MatrixXd G =
      M.llt().solve(Eigen::MatrixXd::Identity(int(n), int(n)));
  // exact symmetry, up to the factorization's round-off
  G = 0.5 * (G + G.transpose()).eval();
  return {D, std::move(G)};
}

Eigen::VectorXd green_column(const LatticeDomain& D, LatticePoint x) {
  int ix = D.index_of(x);
  if (ix < 0) throw std::domain_error("green_column: x not in domain");
  if (D.is_rectangle()) {
    int W = D.width(), H = D.height();
    // domain order is row-major, matching the rectangle layout
    auto col = rect_green_column(W, H, ix);
    return Eigen::Map<Eigen::VectorXd>(col.data(), col.size());
  }
  DirichletSolver solver(D);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(int(D.size()));
  rhs[ix] = 4.0;
  return solver.solve(rhs);
}

double box_green_diag0(int k) {
  if (k == 0) return 1.0;
  long long s = (1LL << (k + 1)) + 1; // side of Delta^k
  int n = static_cast<int>(s);
  // center row/col index c has (c+1)/(n+1) = 1/2: sin is 0 for odd modes
  std::vector<double> lam(n);
  for (int p = 0; p < n; ++p) lam[p] = dst_eigenvalue_1d(p, n);
  double total = 0.0;
  for (int p = 0; p < n; p += 2) {
    double acc = 0.0;
    for (int q = 0; q < n; q += 2) acc += 1.0 / (lam[p] + lam[q]);
    total += acc;
  }
  return total * 16.0 / (double(n + 1) * double(n + 1));
}

Eigen::MatrixXd box_green_pairs(int k, const std::vector<LatticePoint>& pts,
                                unsigned threads) {
  if (k < 1) throw std::domain_error("box_green_pairs: k >= 1 required");
  long long side = (1LL << (k + 1)) + 1;
  int n = static_cast<int>(side);
  int half = 1 << k;
  std::vector<double> lam(n);
  for (int p = 0; p < n; ++p) lam[p] = dst_eigenvalue_1d(p, n);

  // distinct coordinates appearing in any position
  std::vector<int> coords;
  for (auto p : pts) {
    if (std::abs(p.x) > half || std::abs(p.y) > half)
      throw std::domain_error("box_green_pairs: point outside the box");
    coords.push_back(p.x);
    coords.push_back(p.y);
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  int nc = static_cast<int>(coords.size());
  auto cidx = [&](int v) {
    return int(std::lower_bound(coords.begin(), coords.end(), v) -
               coords.begin());
  };

  // sine tables: sin(pi (p+1) (u + half + 1) / (n+1))
  Eigen::MatrixXd sins(nc, n);
  for (int c = 0; c < nc; ++c) {
    double w = M_PI * double(coords[c] + half + 1) / double(n + 1);
    for (int p = 0; p < n; ++p) sins(c, p) = std::sin(w * (p + 1));
  }

  // inner sums F[a,b](p) = sum_q sins(a,q) sins(b,q) / (lam_p + lam_q)
  int npairs = nc * (nc + 1) / 2;
  std::vector<Eigen::VectorXd> F(npairs);
  std::vector<std::pair<int, int>> pair_of(npairs);
  {
    int idx = 0;
    for (int a = 0; a < nc; ++a)
      for (int b = a; b < nc; ++b) pair_of[idx++] = {a, b};
  }
  parallel_for(
      npairs,
      [&](std::size_t i) {
        auto [a, b] = pair_of[i];
        Eigen::VectorXd f(n);
        for (int p = 0; p < n; ++p) {
          double lp = lam[p], acc = 0.0;
          const double* ra = sins.data() + a; // column-major stride nc
          const double* rb = sins.data() + b;
          for (int q = 0; q < n; ++q)
            acc += ra[std::size_t(q) * nc] * rb[std::size_t(q) * nc] /
                   (lp + lam[q]);
          f[p] = acc;
        }
        F[i] = std::move(f);
      },
      threads);
  auto fidx = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return a * nc - a * (a - 1) / 2 + (b - a);
  };

  double scale = 16.0 / (double(n + 1) * double(n + 1));
  std::size_t m = pts.size();
  Eigen::MatrixXd G(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      int x1 = cidx(pts[i].x), y1 = cidx(pts[i].y);
      int x2 = cidx(pts[j].x), y2 = cidx(pts[j].y);
      const Eigen::VectorXd& f = F[fidx(y1, y2)];
      double acc = 0.0;
      for (int p = 0; p < n; ++p) acc += sins(x1, p) * sins(x2, p) * f[p];
      G(i, j) = G(j, i) = acc * scale;
    }
  return G;
}

double HarmonicProfile::mean_value_residual() const {
  double worst = 0.0;
  const auto& pts = domain->points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double acc = 0.0;
    for (auto s : neighbor_steps()) acc += value_at(pts[i] + s);
    worst = std::max(worst, std::abs(interior[i] - 0.25 * acc));
  }
  return worst;
}

HarmonicProfile harmonic_extension(std::shared_ptr<const LatticeDomain> D,
                                   const Eigen::VectorXd& boundary_vals) {
  if (boundary_vals.size() != Eigen::Index(D->boundary().size()))
    throw std::domain_error("harmonic_extension: boundary values incomplete");
  const auto& pts = D->points();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(int(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (auto s : neighbor_steps()) {
      int b = D->boundary_index_of(pts[i] + s);
      if (b >= 0) rhs[int(i)] += boundary_vals[b];
    }

  Eigen::VectorXd u;
  if (D->is_rectangle()) {
    std::vector<double> b(rhs.data(), rhs.data() + rhs.size());
    auto sol = rect_poisson_solve(D->width(), D->height(), b);
    u = Eigen::Map<Eigen::VectorXd>(sol.data(), sol.size());
  } else {
    DirichletSolver solver(*D);
    u = solver.solve(rhs);
  }
  return {std::move(D), std::move(u), boundary_vals};
}

Eigen::VectorXd harmonic_measure(const LatticeDomain& D, LatticePoint x) {
  if (!D.contains(x)) throw std::domain_error("harmonic_measure: x interior");
  Eigen::VectorXd g = green_column(D, x);
  const auto& bnd = D.boundary();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(Eigen::Index(bnd.size()));
  // exit at z happens from an interior neighbor y with a 1/4 step
  for (std::size_t b = 0; b < bnd.size(); ++b)
    for (auto s : neighbor_steps()) {
      int j = D.index_of(bnd[b] + s);
      if (j >= 0) h[Eigen::Index(b)] += 0.25 * g[j];
    }
  return h;
}

HarmonicProfile pinning_profile(std::shared_ptr<const LatticeDomain> D) {
  if (!D->contains({0, 0}))
    throw std::domain_error("pinning_profile: 0 not in domain");
  std::vector<LatticePoint> rest;
  rest.reserve(D->size() - 1);
  for (auto p : D->points())
    if (!(p == LatticePoint{0, 0})) rest.push_back(p);

  Eigen::VectorXd interior(Eigen::Index(D->size()));
  if (rest.empty()) {
    interior[0] = 1.0;
  } else {
    auto punctured = std::make_shared<LatticeDomain>(std::move(rest));
    Eigen::VectorXd bvals =
        Eigen::VectorXd::Zero(Eigen::Index(punctured->boundary().size()));
    int b0 = punctured->boundary_index_of({0, 0});
    if (b0 < 0)
      throw std::runtime_error("pinning_profile: origin isolated from rest");
    bvals[b0] = 1.0;
    HarmonicProfile h = harmonic_extension(punctured, bvals);
    for (std::size_t i = 0; i < D->size(); ++i)
      interior[Eigen::Index(i)] = h.value_at(D->points()[i]);
    interior[D->index_of({0, 0})] = 1.0;
  }
  Eigen::VectorXd bz = Eigen::VectorXd::Zero(Eigen::Index(D->boundary().size()));
  return {std::move(D), std::move(interior), std::move(bz)};
}

} // namespace dgff
