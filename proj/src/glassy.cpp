#include "dgff/glassy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "dgff/parallel.hpp"

namespace dgff {

GibbsWeights gibbs_weights(const FieldSample& field, double beta) {
  if (beta < 0) throw std::domain_error("gibbs_weights: beta >= 0");
  if (!field.values.allFinite())
    throw std::domain_error("gibbs_weights: non-finite field values");
  GibbsWeights out;
  out.beta = beta;
  double shift = field.values.maxCoeff();
  Eigen::ArrayXd e = (beta * (field.values.array() - shift)).exp();
  double z = e.sum();
  out.weights = (e / z).matrix();
  out.log_partition = beta * shift + std::log(z);
  return out;
}

double liouville_total(const FieldSample& field, double beta, double N) {
  if (beta <= 0) throw std::domain_error("liouville_total: beta > 0");
  GibbsWeights g = gibbs_weights(field, beta);
  return std::exp(g.log_partition - beta * m_N(N));
}

double y_beta(const Eigen::VectorXd& shape, const LatticeDomain& window,
              double beta, double cutoff) {
  double r2 = cutoff * cutoff;
  double acc = 0.0;
  const auto& pts = window.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (double(pts[i].l2sq()) > r2) continue;
    double v = shape[Eigen::Index(i)];
    if (std::isnan(v)) continue;
    acc += std::exp(-beta * v);
  }
  return acc;
}

AtomicMeasure sample_pd(double s, Rng& rng, double eps) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("sample_pd: s in (0,1)");
  if (!(eps > 0.0)) throw std::domain_error("sample_pd: eps > 0");
  AtomicMeasure out;
  // decreasing enumeration of the Poisson points: q_i = (s Gamma_i)^{-1/s}
  double gamma = 0.0, total = 0.0;
  const double qmin = eps;
  for (;;) {
    gamma += rng.next_exponential();
    double q = std::pow(s * gamma, -1.0 / s);
    if (q < qmin) break;
    out.masses.push_back(q);
    total += q;
  }
  for (double& m : out.masses) m /= total;
  out.discarded_mass_mean = std::pow(eps, 1.0 - s) / (1.0 - s);
  return out;
}

AtomicMeasure sample_sigma(
    double s, const std::function<std::pair<double, double>(Rng&)>& Q,
    Rng& rng, double eps) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("sample_sigma: s in (0,1)");
  AtomicMeasure out;
  double gamma = 0.0;
  for (;;) {
    gamma += rng.next_exponential();
    double q = std::pow(s * gamma, -1.0 / s);
    if (q < eps) break;
    out.masses.push_back(q);
    out.locations.push_back(Q(rng));
  }
  out.discarded_mass_mean = std::pow(eps, 1.0 - s) / (1.0 - s);
  return out;
}

FreezingCurve freezing_curve(const DomainSpec& spec, int N, double beta,
                             const std::vector<double>& grid,
                             std::size_t samples, Rng& rng, unsigned threads) {
  if (beta <= 0) throw std::domain_error("freezing_curve: beta > 0");
  auto domain = std::make_shared<LatticeDomain>(discretize(spec, N));
  auto plan = SamplerPlan::make(domain);

  std::vector<double> lse(samples);
  std::uint64_t base = rng.next_u64();
  parallel_for(
      samples,
      [&](std::size_t si) {
        Rng r(base, si);
        FieldSample f = plan.sample(r);
        lse[si] = gibbs_weights(f, beta).log_partition;
      },
      threads);

  FreezingCurve out;
  out.t = grid;
  out.value.resize(grid.size());
  out.se.resize(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    MeanAccumulator acc;
    for (std::size_t si = 0; si < samples; ++si)
      acc.add(std::exp(-std::exp(lse[si] - beta * grid[gi])));
    out.value[gi] = acc.mean();
    out.se[gi] = acc.stderror();
  }
  return out;
}

namespace {

double interp(const FreezingCurve& c, double t) {
  if (t <= c.t.front()) return c.value.front();
  if (t >= c.t.back()) return c.value.back();
  auto it = std::upper_bound(c.t.begin(), c.t.end(), t);
  std::size_t j = std::size_t(it - c.t.begin());
  double w = (t - c.t[j - 1]) / (c.t[j] - c.t[j - 1]);
  return (1 - w) * c.value[j - 1] + w * c.value[j];
}

} // namespace

FreezingMatch freezing_match(const FreezingCurve& a, const FreezingCurve& b,
                             double window_lo, double window_hi,
                             double max_shift) {
  auto sup_dist = [&](double shift) {
    double d = 0.0;
    const int probes = 241;
    for (int i = 0; i < probes; ++i) {
      double t = window_lo + (window_hi - window_lo) * i / (probes - 1);
      d = std::max(d, std::abs(interp(a, t) - interp(b, t + shift)));
    }
    return d;
  };
  // coarse scan, then golden-section refinement in the best bracket
  double best_s = 0.0, best_d = sup_dist(0.0);
  const int coarse = 81;
  for (int i = 0; i < coarse; ++i) {
    double s = -max_shift + 2.0 * max_shift * i / (coarse - 1);
    double d = sup_dist(s);
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  double step = 2.0 * max_shift / (coarse - 1);
  double refined = golden_section_min(sup_dist, best_s - step, best_s + step,
                                      1e-4);
  FreezingMatch m;
  m.shift = refined;
  m.sup_distance = sup_dist(refined);
  if (best_d < m.sup_distance) {
    m.shift = best_s;
    m.sup_distance = best_d;
  }
  return m;
}

GumbelCheck gumbel_absorption_check(
    double lambda, const std::function<double(Rng&)>& displacement,
    std::size_t replicas, Rng& rng, int top_k) {
  if (lambda <= 0) throw std::domain_error("gumbel_absorption_check: lambda");
  if (top_k < 1) throw std::domain_error("gumbel_absorption_check: top_k");

  // empirical MGF of the displacement, with a crude divergence control
  const std::size_t mgf_n = 20000;
  Rng mgf_rng = rng.substream(0xabcdef);
  double sum = 0.0, biggest = 0.0, xmax = -1e300;
  for (std::size_t i = 0; i < mgf_n; ++i) {
    double x = displacement(mgf_rng);
    double e = std::exp(lambda * x);
    sum += e;
    biggest = std::max(biggest, e);
    xmax = std::max(xmax, x);
  }
  if (biggest > 0.5 * sum)
    throw MgfDivergence("gumbel_absorption_check: the empirical MGF is "
                        "dominated by a single draw");
  double theta = sum / double(mgf_n);

  // displaced points deeper than the observed displacement range cannot
  // reach the running top-k
  double reach = xmax + 0.5;

  std::vector<double> shifted_tops(replicas * std::size_t(top_k));
  std::vector<double> fresh_tops(replicas * std::size_t(top_k));
  std::uint64_t base = rng.next_u64();
  parallel_for(replicas, [&](std::size_t ri) {
    Rng r(base, ri);
    // original PPP(e^{-lambda x} dx), displaced
    std::priority_queue<double, std::vector<double>, std::greater<double>> top;
    double gamma = 0.0;
    for (;;) {
      gamma += r.next_exponential();
      double z = -std::log(lambda * gamma) / lambda;
      if (int(top.size()) == top_k && z + reach < top.top()) break;
      double v = z + displacement(r);
      if (int(top.size()) < top_k)
        top.push(v);
      else if (v > top.top()) {
        top.pop();
        top.push(v);
      }
    }
    for (int i = top_k - 1; i >= 0; --i) {
      shifted_tops[ri * std::size_t(top_k) + std::size_t(i)] = top.top();
      top.pop();
    }
    // fresh PPP(theta e^{-lambda x} dx): top-k in closed form
    double g2 = 0.0;
    for (int i = 0; i < top_k; ++i) {
      g2 += r.next_exponential();
      fresh_tops[ri * std::size_t(top_k) + std::size_t(i)] =
          -std::log(lambda * g2 / theta) / lambda;
    }
  });

  GumbelCheck out;
  out.theta_hat = theta;
  out.replicas = replicas;
  out.ks = ks_two_sample(shifted_tops, fresh_tops);
  return out;
}

} // namespace dgff
