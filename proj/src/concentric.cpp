#include "dgff/concentric.hpp"

#include <cmath>

#include "dgff/centering.hpp"
#include "dgff/fast_poisson.hpp"
#include "dgff/parallel.hpp"

namespace dgff {

namespace {

int box_side(int k) { return (1 << (k + 1)) + 1; }

// smallest r >= 1 with |x|_inf <= 2^r; callers special-case the origin
int shell_of(int m) {
  int r = 1;
  while ((1 << r) < m) ++r;
  return r;
}

// index of the annulus Delta^k \ closure(Delta^{k-1}) containing x, or 0
int annulus_of(LatticePoint p) {
  if (p.x == 0 && p.y == 0) return 0;
  int m = p.linf();
  int k = shell_of(m);
  if (k == 1) {
    // closure(Delta^0) is the plus-shape around the origin
    return (std::abs(p.x) + std::abs(p.y) >= 2) ? 1 : 0;
  }
  int ring = (1 << (k - 1)) + 1;
  if (m == ring && !(std::abs(p.x) == m && std::abs(p.y) == m)) return 0;
  return k;
}

} // namespace

DecompositionStats decomposition_stats(int n) {
  if (n < 1 || n > 9)
    throw std::domain_error("decomposition_stats: depth must be in 1..9");
  DecompositionStats st;
  st.n = n;
  st.box = std::make_shared<LatticeDomain>(concentric_box(n));

  // Green columns at the origin drive both the variances and the profiles,
  // so the identities sigma_k^2 = Cov_k(0,0) and b_k(0) = 0 hold exactly
  std::vector<std::vector<double>> col(n + 1);
  for (int k = 1; k <= n; ++k) {
    int s = box_side(k), half = 1 << k;
    col[k] = rect_green_column(s, s, (half)*s + half); // column at the origin
  }
  st.sigma2.resize(n + 1);
  st.sigma2[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    int s = box_side(k), half = 1 << k;
    double diag_k = col[k][std::size_t(half) * s + half];
    double diag_km1 = 1.0;
    if (k >= 2) {
      int sp = box_side(k - 1), halfp = 1 << (k - 1);
      diag_km1 = col[k - 1][std::size_t(halfp) * sp + halfp];
    }
    st.sigma2[k] = diag_k - diag_km1;
  }
  st.t.resize(n + 2);
  st.t[0] = 0.0;
  for (int k = 0; k <= n; ++k) st.t[k + 1] = st.t[k] + st.sigma2[k];

  const auto& pts = st.box->points();
  Eigen::Index N = Eigen::Index(pts.size());
  st.b.assign(n + 1, Eigen::VectorXd::Constant(N, -1.0));
  st.b[0][st.box->index_of({0, 0})] = 0.0;
  for (int k = 1; k <= n; ++k) {
    int s = box_side(k), half = 1 << k;
    int sp = (k >= 2) ? box_side(k - 1) : 0, halfp = 1 << (k - 1);
    for (Eigen::Index i = 0; i < N; ++i) {
      LatticePoint p = pts[std::size_t(i)];
      if (p.linf() > half) continue; // stays -1 outside Delta^k
      double gk = col[k][std::size_t(p.y + half) * s + (p.x + half)];
      double gkm1 = 0.0;
      if (k >= 2) {
        if (p.linf() <= halfp)
          gkm1 = col[k - 1][std::size_t(p.y + halfp) * sp + (p.x + halfp)];
      } else if (p.x == 0 && p.y == 0) {
        gkm1 = 1.0; // G^{Delta^0}(0,0)
      }
      st.b[k][i] = (gk - gkm1) / st.sigma2[k] - 1.0;
    }
    st.b[k][st.box->index_of({0, 0})] = 0.0; // exact by the shared columns
  }
  return st;
}

ConcentricSampler::ConcentricSampler(
    std::shared_ptr<const DecompositionStats> stats, bool with_components)
    : stats_(std::move(stats)), components_(with_components) {
  if (components_) {
    annulus_.resize(stats_->n + 1);
    annulus_solver_.resize(stats_->n + 1);
    for (int k = 1; k <= stats_->n; ++k) {
      annulus_[k] = std::make_shared<LatticeDomain>(concentric_annulus(k));
      annulus_solver_[k] = std::make_unique<DirichletSolver>(*annulus_[k]);
    }
  }
}

ConcentricSample ConcentricSampler::sample(Rng& rng) const {
  const DecompositionStats& st = *stats_;
  const int n = st.n;
  const LatticeDomain& box = *st.box;
  Eigen::Index N = Eigen::Index(box.size());

  ConcentricSample out;
  out.n = n;
  out.phi0.assign(n + 1, 0.0);
  out.field = Eigen::VectorXd::Zero(N);
  if (components_) {
    out.chi.assign(n + 1, Eigen::VectorXd::Zero(N));
    out.hprime.assign(n + 1, Eigen::VectorXd::Zero(N));
  }

  out.phi0[0] = rng.next_gaussian();
  out.field[box.index_of({0, 0})] += out.phi0[0];

  for (int k = 1; k <= n; ++k) {
    int s = box_side(k), half = 1 << k;
    int sp = (k >= 2) ? box_side(k - 1) : 1;
    int halfp = (k >= 2) ? (1 << (k - 1)) : 0;
    auto w = rect_dgff_sample(s, s, rng);
    auto wat = [&](LatticePoint p) {
      return w[std::size_t(p.y + half) * s + (p.x + half)];
    };

    // inward extension of the ring values across Delta^{k-1}
    LatticeDomain inner_box =
        (k >= 2) ? concentric_box(k - 1) : LatticeDomain({{0, 0}});
    std::vector<double> rhs(std::size_t(sp) * sp, 0.0);
    const auto& ring = inner_box.boundary();
    for (auto z : ring) {
      double v = wat(z);
      for (auto stp : neighbor_steps()) {
        LatticePoint q = z + stp;
        if (q.linf() <= halfp)
          rhs[std::size_t(q.y + halfp) * sp + (q.x + halfp)] += v;
      }
    }
    auto u_in = rect_poisson_solve(sp, sp, rhs);
    double phi0k = u_in[std::size_t(halfp) * sp + halfp];
    out.phi0[k] = phi0k;

    // the field gains phi_k + h'_k, which is u_in inside and w outside
    for (int y = -half; y <= half; ++y)
      for (int x = -half; x <= half; ++x) {
        LatticePoint p{x, y};
        double v = (p.linf() <= halfp)
                       ? u_in[std::size_t(y + halfp) * sp + (x + halfp)]
                       : wat(p);
        out.field[box.index_of(p)] += v;
      }

    if (!components_) continue;

    // outward extension across the annulus separates phi_k from h'_k
    const LatticeDomain& ann = *annulus_[k];
    Eigen::VectorXd rhs_a = Eigen::VectorXd::Zero(Eigen::Index(ann.size()));
    for (auto z : ring) {
      double v = wat(z);
      for (auto stp : neighbor_steps()) {
        int j = ann.index_of(z + stp);
        if (j >= 0) rhs_a[j] += v;
      }
    }
    Eigen::VectorXd u_ann = annulus_solver_[k]->solve(rhs_a);

    Eigen::VectorXd& chik = out.chi[k];
    Eigen::VectorXd& hk = out.hprime[k];
    const Eigen::VectorXd& bk = st.b[k];
    for (int y = -half; y <= half; ++y)
      for (int x = -half; x <= half; ++x) {
        LatticePoint p{x, y};
        int bi = box.index_of(p);
        double phikx;
        int ai = ann.index_of(p);
        if (ai >= 0) {
          phikx = u_ann[ai];
          hk[bi] = wat(p) - phikx;
        } else if (p.linf() <= halfp) {
          phikx = u_in[std::size_t(p.y + halfp) * sp + (p.x + halfp)];
        } else {
          phikx = wat(p); // ring vertices carry the raw field values
        }
        chik[bi] = phikx - (1.0 + bk[bi]) * phi0k;
      }
  }

  out.walk.assign(n + 2, 0.0);
  for (int k = 0; k <= n; ++k) out.walk[k + 1] = out.walk[k] + out.phi0[k];
  return out;
}

double ControlReport::theta(int k, int ell) const {
  double v = std::log(1.0 + double(std::max(k, std::min(ell, n - ell))));
  return v * v;
}

double ControlReport::theta_tilde(int k, int ell) {
  double v = std::log(1.0 + double(std::max(k, ell)));
  return v * v;
}

namespace {

struct SampleExtremes {
  // prefix maxima over Delta^r of |chi_l|, r = 0..n
  std::vector<std::vector<double>> chi_shell_max;
  std::vector<double> ann_max_a; // max over A_l of chi_l+chi_{l-1}+h'_l
  std::vector<double> ann_max_b; // with chi_{l+1} added (dropped at l=n)
};

SampleExtremes scan_sample(const ConcentricSample& s,
                           const LatticeDomain& box) {
  const int n = s.n;
  SampleExtremes ex;
  ex.chi_shell_max.assign(n + 1, std::vector<double>(n + 1, 0.0));
  ex.ann_max_a.assign(n + 1, -1e300);
  ex.ann_max_b.assign(n + 1, -1e300);

  const auto& pts = box.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    LatticePoint p = pts[i];
    int m = p.linf();
    int shell = (m == 0) ? 0 : shell_of(m);
    for (int l = 2; l <= n; ++l) {
      if (shell > l - 2) continue;
      double v = std::abs(s.chi[l][Eigen::Index(i)]);
      auto& row = ex.chi_shell_max[l];
      if (v > row[shell]) row[shell] = v;
    }
    int a = annulus_of(p);
    if (a >= 1) {
      double base = s.chi[a][Eigen::Index(i)] +
                    s.chi[a - 1][Eigen::Index(i)] +
                    s.hprime[a][Eigen::Index(i)];
      if (base > ex.ann_max_a[a]) ex.ann_max_a[a] = base;
      double withnext =
          base + (a + 1 <= n ? s.chi[a + 1][Eigen::Index(i)] : 0.0);
      if (withnext > ex.ann_max_b[a]) ex.ann_max_b[a] = withnext;
    }
  }
  // prefix maxima across shells
  for (int l = 2; l <= n; ++l)
    for (int r = 1; r <= l - 2; ++r)
      ex.chi_shell_max[l][r] =
          std::max(ex.chi_shell_max[l][r], ex.chi_shell_max[l][r - 1]);
  return ex;
}

template <typename Theta>
bool envelopes_hold(const ConcentricSample& s, const SampleExtremes& ex,
                    Theta theta, int k) {
  const int n = s.n;
  for (int l = 0; l <= n; ++l)
    if (std::abs(s.phi0[std::size_t(l)]) > theta(k, l)) return false;
  for (int l = 2; l <= n; ++l)
    for (int r = 0; r <= l - 2; ++r)
      if (ex.chi_shell_max[l][r] >
          std::exp2(0.5 * (r - l)) * theta(k, l))
        return false;
  for (int l = 1; l <= n; ++l) {
    double center = m_centering_raw(std::exp2(l));
    if (std::abs(ex.ann_max_a[l] - center) > theta(k, l)) return false;
    if (std::abs(ex.ann_max_b[l] - center) > theta(k, l)) return false;
  }
  return true;
}

} // namespace

ControlReport control_variables(const ConcentricSample& s,
                                ControlParams params) {
  if (s.chi.empty())
    throw std::logic_error(
        "control_variables: sample lacks components (fast-mode sample)");
  const int n = s.n;
  LatticeDomain box = concentric_box(n);
  SampleExtremes ex = scan_sample(s, box);

  ControlReport rep;
  rep.n = n;
  rep.C = params.C;

  auto theta = [&](int k, int l) {
    double v = std::log(1.0 + double(std::max(k, std::min(l, n - l))));
    return v * v;
  };
  int kmax = n / 2;
  rep.K = kmax + 1; // default when no scale qualifies
  for (int k = 2; k <= kmax; ++k)
    if (envelopes_hold(s, ex, theta, k)) {
      rep.K = k;
      break;
    }

  // depth-free envelopes, evaluated on the scales the sample carries
  rep.Ktilde = -1;
  for (int k = 2; k <= 1 << 20; ++k)
    if (envelopes_hold(s, ex, [](int kk, int l) {
          return ControlReport::theta_tilde(kk, l);
        }, k)) {
      rep.Ktilde = k;
      break;
    }
  return rep;
}

WholePlanePlan::WholePlanePlan(int n, int r, unsigned threads)
    : n_(n), r_(r) {
  if (r < 1 || r > 6) throw std::domain_error("WholePlanePlan: window 1..6");
  if (n < r + 2 || n > 14)
    throw std::domain_error("WholePlanePlan: need r+2 <= n <= 14");
  window_ = std::make_shared<LatticeDomain>(concentric_box(r));
  const auto& wpts = window_->points();
  Eigen::Index W = Eigen::Index(wpts.size());

  sigma2_.assign(n + 1, 0.0);
  sigma2_[0] = 1.0;
  bwin_.assign(n + 1, Eigen::VectorXd::Constant(W, -1.0));
  bwin_[0][window_->index_of({0, 0})] = 0.0;
  chi_.resize(n + 1);
  hprime_.resize(n + 1);

  auto factor_psd = [](const Eigen::MatrixXd& C) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    if (es.eigenvalues().minCoeff() < -1e-8 * top)
      throw std::runtime_error("WholePlanePlan: covariance not PSD");
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Eigen::MatrixXd(es.eigenvectors() * root.asDiagonal());
  };

  for (int k = 1; k <= n; ++k) {
    int half = 1 << k;
    // window points inside Delta^k, with the origin first
    std::vector<LatticePoint> inpts{{0, 0}};
    std::vector<int> inslots{window_->index_of({0, 0})};
    for (std::size_t i = 0; i < wpts.size(); ++i) {
      LatticePoint p = wpts[i];
      if (p == LatticePoint{0, 0} || p.linf() > half) continue;
      inpts.push_back(p);
      inslots.push_back(int(i));
    }
    Eigen::Index m = Eigen::Index(inpts.size());
    Eigen::MatrixXd gk = box_green_pairs(k, inpts, threads);
    Eigen::MatrixXd cov = gk;
    if (k == 1) {
      cov(0, 0) -= 1.0; // G^{Delta^0} is the unit mass at the origin
    } else {
      int halfp = 1 << (k - 1);
      std::vector<LatticePoint> prev;
      std::vector<Eigen::Index> previdx;
      for (Eigen::Index i = 0; i < m; ++i)
        if (inpts[std::size_t(i)].linf() <= halfp) {
          prev.push_back(inpts[std::size_t(i)]);
          previdx.push_back(i);
        }
      Eigen::MatrixXd gp = box_green_pairs(k - 1, prev, threads);
      for (std::size_t a = 0; a < prev.size(); ++a)
        for (std::size_t b = 0; b < prev.size(); ++b)
          cov(previdx[a], previdx[b]) -= gp(Eigen::Index(a), Eigen::Index(b));
    }

    // h'_k is an independent component; where its annulus meets the window
    // its Green matrix must be split off the phi_k covariance
    if (k <= r + 1) {
      LatticeDomain ann = concentric_annulus(k);
      std::vector<int> slots;
      std::vector<LatticePoint> apts;
      std::vector<Eigen::Index> in_cov;
      for (Eigen::Index i = 0; i < m; ++i)
        if (ann.contains(inpts[std::size_t(i)])) {
          slots.push_back(inslots[std::size_t(i)]);
          apts.push_back(inpts[std::size_t(i)]);
          in_cov.push_back(i);
        }
      if (!slots.empty()) {
        DirichletSolver solver(ann);
        Eigen::MatrixXd cov_h(slots.size(), slots.size());
        for (std::size_t a = 0; a < apts.size(); ++a) {
          Eigen::VectorXd rhs =
              Eigen::VectorXd::Zero(Eigen::Index(ann.size()));
          rhs[ann.index_of(apts[a])] = 4.0;
          Eigen::VectorXd colv = solver.solve(rhs);
          for (std::size_t b = 0; b < apts.size(); ++b)
            cov_h(Eigen::Index(b), Eigen::Index(a)) =
                colv[ann.index_of(apts[b])];
        }
        cov_h = 0.5 * (cov_h + cov_h.transpose()).eval();
        for (std::size_t a = 0; a < apts.size(); ++a)
          for (std::size_t b = 0; b < apts.size(); ++b)
            cov(in_cov[a], in_cov[b]) -=
                cov_h(Eigen::Index(a), Eigen::Index(b));
        hprime_[k].slots = std::move(slots);
        hprime_[k].L = factor_psd(cov_h);
      }
    }

    sigma2_[k] = cov(0, 0);
    for (Eigen::Index i = 1; i < m; ++i)
      bwin_[k][inslots[std::size_t(i)]] = cov(i, 0) / sigma2_[k] - 1.0;

    // chi_k on the window: Cov(phi) - (1+b)(1+b)^T sigma^2, origin dropped
    if (m > 1) {
      Eigen::MatrixXd cchi(m - 1, m - 1);
      for (Eigen::Index i = 1; i < m; ++i)
        for (Eigen::Index j = 1; j < m; ++j) {
          double bi = 1.0 + bwin_[k][inslots[std::size_t(i)]];
          double bj = 1.0 + bwin_[k][inslots[std::size_t(j)]];
          cchi(i - 1, j - 1) = cov(i, j) - bi * bj * sigma2_[k];
        }
      chi_[k].slots.assign(inslots.begin() + 1, inslots.end());
      chi_[k].L = factor_psd(cchi);
    }
  }
}

FieldSample WholePlanePlan::sample(Rng& rng) const {
  Eigen::Index W = Eigen::Index(window_->size());
  FieldSample out;
  out.domain = window_;
  out.values = Eigen::VectorXd::Zero(W);
  out.meta.sampler = "whole-plane-concentric";
  out.meta.conditioning = "phi(0) = 0, truncation depth " + std::to_string(n_);

  // per-scale substreams: enlarging the depth keeps shared scales identical
  std::uint64_t draw = rng.next_u64();
  for (int k = 0; k <= n_; ++k) {
    Rng rk(draw, std::uint64_t(k));
    double phi0k = (k == 0) ? rk.next_gaussian()
                            : std::sqrt(sigma2_[k]) * rk.next_gaussian();
    out.values += phi0k * bwin_[k];
    const Part& pc = chi_[std::size_t(k)];
    if (!pc.slots.empty()) {
      Eigen::VectorXd z(pc.L.cols());
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rk.next_gaussian();
      Eigen::VectorXd v = pc.L * z;
      for (std::size_t i = 0; i < pc.slots.size(); ++i)
        out.values[pc.slots[i]] += v[Eigen::Index(i)];
    }
    const Part& ph = hprime_[std::size_t(k)];
    if (!ph.slots.empty()) {
      Eigen::VectorXd z(ph.L.cols());
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rk.next_gaussian();
      Eigen::VectorXd v = ph.L * z;
      for (std::size_t i = 0; i < ph.slots.size(); ++i)
        out.values[ph.slots[i]] += v[Eigen::Index(i)];
    }
  }
  return out;
}

Eigen::MatrixXd WholePlanePlan::model_covariance() const {
  Eigen::Index W = Eigen::Index(window_->size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(W, W);
  for (int k = 0; k <= n_; ++k) {
    C.noalias() += sigma2_[k] * bwin_[k] * bwin_[k].transpose();
    for (const Part* part : {&chi_[std::size_t(k)], &hprime_[std::size_t(k)]}) {
      if (part->slots.empty()) continue;
      Eigen::MatrixXd cc = part->L * part->L.transpose();
      for (std::size_t a = 0; a < part->slots.size(); ++a)
        for (std::size_t b = 0; b < part->slots.size(); ++b)
          C(part->slots[a], part->slots[b]) +=
              cc(Eigen::Index(a), Eigen::Index(b));
    }
  }
  return C;
}

} // namespace dgff
