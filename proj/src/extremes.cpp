#include "dgff/extremes.hpp"

#include <algorithm>
#include <cmath>

#include "dgff/concentric.hpp"
#include "dgff/parallel.hpp"

namespace dgff {

namespace {

std::vector<LatticePoint> ball_offsets(double r) {
  return ball({0, 0}, r).points();
}

} // namespace

PointProcessSample local_maxima(const FieldSample& field, double r, double N,
                                std::shared_ptr<const LatticeDomain> window,
                                double floor) {
  if (r < 0) throw std::domain_error("local_maxima: r >= 0");
  PointProcessSample out;
  out.window = window;
  out.N = N;
  double mn = m_N(N);
  auto offsets = ball_offsets(r);

  const auto& pts = field.domain->points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double h = field.values[Eigen::Index(i)];
    if (h < floor) continue;
    LatticePoint x = pts[i];
    bool is_max = true, tie = false;
    for (auto z : offsets) {
      if (z.x == 0 && z.y == 0) continue;
      double hz = field.value_at(x + z);
      if (hz > h) {
        is_max = false;
        break;
      }
      if (hz == h) {
        tie = true;
        // lexicographic break: the smaller point keeps the maximum
        if (x + z < x) {
          is_max = false;
          break;
        }
      }
    }
    if (!is_max) continue;
    if (tie) ++out.ties;

    LocalMaxEntry e;
    e.position = x;
    e.scaled_x = x.x / N;
    e.scaled_y = x.y / N;
    e.height = h - mn;
    e.tie = tie;
    if (window && !window->empty()) {
      const auto& wpts = window->points();
      e.shape.resize(Eigen::Index(wpts.size()));
      for (std::size_t w = 0; w < wpts.size(); ++w) {
        LatticePoint q = x + wpts[w];
        e.shape[Eigen::Index(w)] =
            field.domain->contains(q)
                ? h - field.value_at(q)
                : std::numeric_limits<double>::quiet_NaN();
      }
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

std::vector<LatticePoint> level_set(const FieldSample& field, double t,
                                    double N) {
  double cut = m_N(N) - t;
  std::vector<LatticePoint> out;
  const auto& pts = field.domain->points();
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (field.values[Eigen::Index(i)] >= cut) out.push_back(pts[i]);
  return out;
}

double ClusterEstimate::p_at(double sub_radius) const {
  if (trials == 0) return 0.0;
  double r2 = sub_radius * sub_radius;
  std::size_t idx = std::min<std::size_t>(
      survivors_by_r2.size() - 1, static_cast<std::size_t>(std::floor(r2)));
  return double(survivors_by_r2[idx]) / double(trials);
}

ClusterEstimate sample_cluster_law(int r, const PotentialTable& table,
                                   Rng& rng, std::size_t budget,
                                   unsigned threads, std::size_t keep_shapes) {
  if (r < 1) throw std::domain_error("sample_cluster_law: r >= 1");
  if (budget < 1) throw std::domain_error("sample_cluster_law: budget >= 1");

  ClusterEstimate out;
  out.r = r;
  out.ball = std::make_shared<LatticeDomain>(ball({0, 0}, double(r)));
  out.trials = budget;

  // non-origin ball points ordered by radius; acceptance at any sub-radius
  // is a prefix event in this order
  std::vector<LatticePoint> pts;
  for (auto p : out.ball->points())
    if (!(p == LatticePoint{0, 0})) pts.push_back(p);
  std::sort(pts.begin(), pts.end(), [](LatticePoint a, LatticePoint b) {
    if (a.l2sq() != b.l2sq()) return a.l2sq() < b.l2sq();
    return a < b;
  });
  const std::size_t n = pts.size();

  // shifted thresholds: accept while phi_i >= -(2/sqrt g) a(x_i)
  std::vector<float> thresh(n);
  std::vector<double> a2g(n);
  for (std::size_t i = 0; i < n; ++i) {
    a2g[i] = kAlpha * table.value(pts[i]); // 2/sqrt(g) = alpha
    thresh[i] = float(-a2g[i]);
  }

  // dense Gram Cholesky in double, trial kernel in packed float rows
  Eigen::MatrixXd C(n, n);
  {
    std::vector<double> av(n);
    for (std::size_t i = 0; i < n; ++i) av[i] = table.value(pts[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double v = av[i] + av[j] - table.value(pts[i] - pts[j]);
        C(Eigen::Index(i), Eigen::Index(j)) = v;
        C(Eigen::Index(j), Eigen::Index(i)) = v;
      }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) {
    C += 1e-10 * Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
    llt.compute(C);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("sample_cluster_law: Gram factorization failed");
  }
  std::vector<float> L(n * (n + 1) / 2);
  {
    Eigen::MatrixXd Ld = llt.matrixL();
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        L[at++] = float(Ld(Eigen::Index(i), Eigen::Index(j)));
  }

  int rmax2 = r * r;
  std::vector<std::int32_t> first_viol_r2(budget);
  std::uint64_t base = rng.next_u64();
  parallel_for(
      budget,
      [&](std::size_t ti) {
        Rng tr(base, ti);
        std::vector<float> z(n);
        std::int32_t viol = -1;
        const float* row = L.data();
        for (std::size_t i = 0; i < n; ++i) {
          z[i] = float(tr.next_gaussian());
          float acc = 0.f;
          for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
          row += i + 1;
          if (acc < thresh[i]) {
            viol = std::int32_t(pts[i].l2sq());
            break;
          }
        }
        first_viol_r2[ti] = viol;
      },
      threads);

  out.survivors_by_r2.assign(std::size_t(rmax2) + 1, 0);
  {
    // survivors through radius^2 s: first violation strictly beyond s
    std::vector<std::size_t> viol_at(std::size_t(rmax2) + 2, 0);
    for (std::size_t ti = 0; ti < budget; ++ti) {
      std::int32_t v = first_viol_r2[ti];
      if (v < 0)
        ++out.accepts;
      else
        ++viol_at[std::size_t(v)];
    }
    std::size_t beyond = out.accepts;
    for (int s = rmax2; s >= 0; --s) {
      beyond += viol_at[std::size_t(s) + 1];
      out.survivors_by_r2[std::size_t(s)] = beyond;
    }
    // a violation exactly at radius^2 = s counts against sub-radius s
    // (the defining event is a closed ball)
  }

  out.p = wilson_ci(out.accepts, budget);
  out.no_acceptance = (out.accepts == 0);

  // regenerate the first accepted shapes deterministically
  std::size_t want = std::min<std::size_t>(keep_shapes, out.accepts);
  out.shapes.reserve(want);
  int i0 = out.ball->index_of({0, 0});
  for (std::size_t ti = 0; ti < budget && out.shapes.size() < want; ++ti) {
    if (first_viol_r2[ti] >= 0) continue;
    Rng tr(base, ti);
    std::vector<float> z(n);
    Eigen::VectorXd shape =
        Eigen::VectorXd::Zero(Eigen::Index(out.ball->size()));
    const float* row = L.data();
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = float(tr.next_gaussian());
      float acc = 0.f;
      for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
      row += i + 1;
      shape[out.ball->index_of(pts[i])] = double(acc) + a2g[i];
    }
    shape[i0] = 0.0;
    out.shapes.push_back(std::move(shape));
  }
  return out;
}

XiInEstimate xi_in(int ell, const LocalFunctional& f,
                   const PotentialTable& table, Rng& rng, std::size_t budget,
                   unsigned threads) {
  if (ell < 1) throw std::domain_error("xi_in: ell >= 1");
  auto stats = std::make_shared<const DecompositionStats>(
      decomposition_stats(ell));
  ConcentricSampler sampler(stats, /*with_components=*/false);
  const LatticeDomain& box = *stats->box;
  Eigen::Index N = Eigen::Index(box.size());

  Eigen::VectorXd a2g(N);
  for (Eigen::Index i = 0; i < N; ++i)
    a2g[i] = kAlpha * table.value(box.points()[std::size_t(i)]);

  const double slo = std::pow(double(ell), 1.0 / 6.0);
  const double shi = double(ell) * double(ell);
  const int i0 = box.index_of({0, 0});

  std::uint64_t base = rng.next_u64();
  std::vector<double> vals(budget);
  parallel_for(
      budget,
      [&](std::size_t bi) {
        Rng r(base, bi);
        ConcentricSample s = sampler.sample(r);
        double S = s.walk[std::size_t(ell)];
        if (S < slo || S > shi) {
          vals[bi] = 0.0;
          return;
        }
        double h0 = s.field[i0];
        // phi_ell <= (2/sqrt g) a  <=>  a2g - (field - h0) >= 0 everywhere
        Eigen::VectorXd centered = a2g - (s.field.array() - h0).matrix();
        if (centered.minCoeff() < 0.0) {
          vals[bi] = 0.0;
          return;
        }
        vals[bi] = f(box, centered) * S;
      },
      threads);

  MeanAccumulator acc;
  for (double v : vals) acc.add(v);
  XiInEstimate est;
  est.ell = ell;
  est.value = acc.mean();
  est.ci_lo = acc.mean() - 1.959963984540054 * acc.stderror();
  est.ci_hi = acc.mean() + 1.959963984540054 * acc.stderror();
  est.n = budget;
  return est;
}

namespace {

// model mean of the window-truncated exponential with rate a on [0, W]
double truncated_exp_mean(double a, double W) {
  if (a * W < 1e-9) return 0.5 * W;
  return 1.0 / a - W / std::expm1(a * W);
}

double mle_slope(const std::vector<double>& ys, double lo, double hi) {
  double mean = 0.0;
  for (double y : ys) mean += y - lo;
  mean /= double(ys.size());
  double W = hi - lo;
  double alo = 1e-8, ahi = 64.0;
  // truncated_exp_mean is decreasing in a
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (alo + ahi);
    if (truncated_exp_mean(mid, W) > mean)
      alo = mid;
    else
      ahi = mid;
  }
  return 0.5 * (alo + ahi);
}

} // namespace

SlopeFit intensity_exponent(const std::vector<double>& heights,
                            double window_lo, double window_hi, Rng& rng,
                            int bootstrap) {
  std::vector<double> in;
  for (double h : heights)
    if (h >= window_lo && h <= window_hi) in.push_back(h);
  if (in.size() < 200)
    throw InsufficientData("intensity_exponent: fewer than 200 heights in "
                           "the window");
  SlopeFit fit;
  fit.n = in.size();
  fit.slope = mle_slope(in, window_lo, window_hi);

  std::vector<double> boot(static_cast<std::size_t>(bootstrap));
  std::vector<double> res(in.size());
  for (int b = 0; b < bootstrap; ++b) {
    for (std::size_t i = 0; i < in.size(); ++i)
      res[i] = in[rng.next_below(in.size())];
    boot[std::size_t(b)] = mle_slope(res, window_lo, window_hi);
  }
  std::sort(boot.begin(), boot.end());
  fit.ci_lo = boot[std::size_t(0.025 * bootstrap)];
  fit.ci_hi = boot[std::size_t(std::min(bootstrap - 1.0, 0.975 * bootstrap))];
  return fit;
}

MaxHistogram max_histogram(const DomainSpec& spec, int N, std::size_t samples,
                           Rng& rng, int pos_bins, int height_bins,
                           double height_lo, double height_hi,
                           unsigned threads) {
  if (samples < 1) throw std::domain_error("max_histogram: samples >= 1");
  auto domain = std::make_shared<LatticeDomain>(discretize(spec, N));
  if (domain->empty()) throw std::domain_error("max_histogram: empty domain");
  auto plan = SamplerPlan::make(domain);
  double mn = m_N(double(N));

  MaxHistogram hg;
  hg.pos_bins = pos_bins;
  hg.height_bins = height_bins;
  hg.height_lo = height_lo;
  hg.height_hi = height_hi;
  hg.box_x0 = domain->min_x() / double(N);
  hg.box_y0 = domain->min_y() / double(N);
  hg.box_w = domain->width() / double(N);
  hg.box_h = domain->height() / double(N);
  hg.samples = samples;
  hg.mass.assign(std::size_t(pos_bins) * pos_bins * height_bins, 0.0);
  hg.raw_heights.resize(samples);

  std::vector<std::uint32_t> argmaxes(samples);
  std::uint64_t base = rng.next_u64();
  parallel_for(
      samples,
      [&](std::size_t si) {
        Rng r(base, si);
        FieldSample fld = plan.sample(r);
        Eigen::Index best;
        double mx = fld.values.maxCoeff(&best);
        argmaxes[si] = std::uint32_t(best);
        hg.raw_heights[si] = mx - mn;
      },
      threads);

  auto clampi = [](int v, int hi) { return std::max(0, std::min(v, hi)); };
  for (std::size_t si = 0; si < samples; ++si) {
    LatticePoint p = domain->points()[argmaxes[si]];
    double fx = (p.x / double(N) - hg.box_x0) / hg.box_w;
    double fy = (p.y / double(N) - hg.box_y0) / hg.box_h;
    int bx = clampi(int(fx * pos_bins), pos_bins - 1);
    int by = clampi(int(fy * pos_bins), pos_bins - 1);
    double fh = (hg.raw_heights[si] - height_lo) / (height_hi - height_lo);
    int bh = clampi(int(fh * height_bins), height_bins - 1);
    hg.cell(bx, by, bh) += 1.0;
  }
  for (double& v : hg.mass) v /= double(samples);

  hg.pos_marginal.assign(std::size_t(pos_bins) * pos_bins, 0.0);
  hg.height_marginal.assign(std::size_t(height_bins), 0.0);
  for (int by = 0; by < pos_bins; ++by)
    for (int bx = 0; bx < pos_bins; ++bx)
      for (int bh = 0; bh < height_bins; ++bh) {
        double v = hg.cell(bx, by, bh);
        hg.pos_marginal[std::size_t(by) * pos_bins + bx] += v;
        hg.height_marginal[std::size_t(bh)] += v;
      }
  return hg;
}

} // namespace dgff
