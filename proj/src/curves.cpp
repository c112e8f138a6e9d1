#include "dgff/curves.hpp"

#include <algorithm>
#include <cmath>

#include "dgff/parallel.hpp"
#include "dgff/stats.hpp"

namespace dgff {

CurveSpec CurveSpec::zero() { return CurveSpec{}; }

CurveSpec CurveSpec::constant(double c) {
  if (c < 0) throw std::domain_error("CurveSpec: negative constant");
  CurveSpec s;
  s.kind_ = Kind::Constant;
  s.zeta0_ = c;
  return s;
}

CurveSpec CurveSpec::polylog(double a, double sigma, double zeta0) {
  if (a <= 0 || sigma <= 0 || zeta0 < 0)
    throw std::domain_error("CurveSpec: polylog needs a,sigma>0, zeta0>=0");
  CurveSpec s;
  s.kind_ = Kind::PolyLog;
  s.a_ = a;
  s.sigma_ = sigma;
  s.zeta0_ = zeta0;
  return s;
}

CurveSpec CurveSpec::gamma_curve(double a) {
  if (a <= 0.5 * (1.0 + std::sqrt(5.0)))
    throw std::domain_error("CurveSpec: gamma family needs a > (1+sqrt5)/2");
  CurveSpec s;
  s.kind_ = Kind::Gamma;
  s.a_ = a;
  return s;
}

CurveSpec CurveSpec::power(double c, double p) {
  if (c < 0 || p <= 0) throw std::domain_error("CurveSpec: power curve");
  CurveSpec s;
  s.kind_ = Kind::Power;
  s.zeta0_ = c;
  s.p_ = p;
  return s;
}

CurveSpec CurveSpec::shifted(double u) const {
  if (u < 0) throw std::domain_error("CurveSpec: negative shift");
  CurveSpec s = *this;
  s.u_ += u;
  return s;
}

double CurveSpec::operator()(double s) const {
  double v = s + u_;
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return zeta0_;
    case Kind::PolyLog: {
      double l = std::log1p(v / (sigma_ * sigma_));
      return zeta0_ + 0.5 * a_ * sigma_ * sigma_ * l * l;
    }
    case Kind::Gamma: {
      double l = 1.0 + std::log(a_ + v);
      return a_ * l * l;
    }
    case Kind::Power:
      return zeta0_ * std::pow(v, p_);
  }
  return 0.0;
}

double tau_tail(double x, double t) {
  if (x <= 0 || t <= 0) throw std::domain_error("tau_tail: x,t > 0");
  return std::erf(x / std::sqrt(2.0 * t));
}

double bridge_positive(double x, double y, double t) {
  if (x <= 0 || y <= 0 || t <= 0)
    throw std::domain_error("bridge_positive: x,y,t > 0");
  return -std::expm1(-2.0 * x * y / t);
}

double argmax_density(double s, double z, double t) {
  if (s <= 0 || s >= t || z <= 0) return 0.0;
  return z * std::exp(-z * z / (2.0 * s)) /
         (M_PI * std::pow(s, 1.5) * std::sqrt(t - s));
}

namespace {

// Int_{x^2}^inf f(zeta(s)) s^{-3/2} ds = (2/x) Int_0^1 f(zeta(x^2/v^2)) dv,
// then v = e^{-w} for the endpoint; the integrand decays like e^{-w} times
// a polylog, so a fixed composite midpoint rule on [0, 60] is plenty.
template <typename F>
double tail_integral(double x, F f) {
  const int panels = 8192;
  const double wmax = 60.0;
  double h = wmax / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    double w = (i + 0.5) * h;
    double v = std::exp(-w);
    acc += f(x * x / (v * v)) * v;
  }
  return acc * h * 2.0 / x;
}

// rho / rho~ for an arbitrary nonnegative callable curve
template <typename F>
RhoPair rho_for(double x, F zeta) {
  RhoPair out;
  double zx2 = zeta(x * x);
  out.rho = zx2 + 0.5 * x * tail_integral(x, [&](double s) { return zeta(s); });
  out.rho_tilde = out.rho + 4.0 * zx2 * zx2 / x +
                  2.0 * tail_integral(x, [&](double s) {
                    double z = zeta(s);
                    return z * z;
                  });
  return out;
}

} // namespace

RhoPair rho_functionals(double x, const CurveSpec& zeta) {
  if (x <= 0) throw std::domain_error("rho_functionals: x > 0");
  if (!zeta.sqrt_growth_ok())
    throw GrowthClassError("rho: curve is not o(s^{1/2})");
  if (!zeta.quarter_growth_ok())
    throw GrowthClassError("rho~: curve is not o(s^{1/4})");
  return rho_for(x, [&](double s) { return zeta(s); });
}

double kappa1(double u) {
  double u23 = std::cbrt(u * u);
  return 4.0 * (1.0 + u23) * u23;
}

double kappa2(double u, double v) {
  return 48.0 * (1.0 + u) * (1.0 + v) * (std::sqrt(u) + std::sqrt(v));
}

BoundResult curve_bound(BoundKind kind, const BoundParams& p) {
  BoundResult out;
  const double sq2pi = std::sqrt(2.0 / M_PI);
  switch (kind) {
    case BoundKind::BmPosLower: {
      if (!p.curve->sqrt_growth_ok())
        throw GrowthClassError("curve_bound: curve is not o(s^{1/2})");
      double rho =
          rho_for(p.x, [&](double s) { return (*p.curve)(s); }).rho;
      out.delta = p.x * p.x / (2.0 * p.t) +
                  4.0 * std::cbrt((rho / p.x) * (rho / p.x));
      out.vacuous = out.delta >= 1.0;
      out.value = (1.0 - out.delta) * sq2pi * p.x / std::sqrt(p.t);
      break;
    }
    case BoundKind::BridgePosLower: {
      if (!p.curve->sqrt_growth_ok())
        throw GrowthClassError("curve_bound: curve is not o(s^{1/2})");
      double rx = rho_for(p.x, [&](double s) { return (*p.curve)(s); }).rho;
      double ry = rho_for(p.y, [&](double s) { return (*p.curve)(s); }).rho;
      double d = p.x * p.y / p.t +
                 4.0 * (std::sqrt(rx / p.x) + std::sqrt(ry / p.y)) *
                     std::exp((p.x - p.y) * (p.x - p.y) / (2.0 * p.t));
      out.delta = d;
      out.vacuous = d >= 1.0;
      out.value = (1.0 - d) * 2.0 * p.x * p.y / p.t;
      break;
    }
    case BoundKind::BmNegUpper: {
      RhoPair r = rho_functionals(p.x, *p.curve);
      out.delta = kappa1(r.rho_tilde / p.x);
      out.value = (1.0 + out.delta) * sq2pi * p.x / std::sqrt(p.t);
      break;
    }
    case BoundKind::BridgeNegUpper: {
      RhoPair rx = rho_functionals(p.x, *p.curve);
      RhoPair ry = rho_functionals(p.y, *p.curve);
      out.delta = kappa2(rx.rho_tilde / p.x, ry.rho_tilde / p.y) *
                  std::exp((p.x - p.y) * (p.x - p.y) / (2.0 * p.t));
      out.value = (1.0 + out.delta) * 2.0 * p.x * p.y / p.t;
      break;
    }
    case BoundKind::EntropicBm:
      out.value = p.entropic.c_bm * std::pow(p.u, -1.0 / 16.0) / std::sqrt(p.t);
      break;
    case BoundKind::EntropicBridge:
      out.value = p.entropic.c_bridge * std::pow(p.u, -1.0 / 16.0) / p.t;
      break;
  }
  return out;
}

McEstimate mc_curve_probability(PathKind kind, const CurveSpec& zeta,
                                CurveSign sign, double x, double y, double t,
                                int steps, std::size_t paths, Rng& rng,
                                unsigned threads) {
  if (steps < 64) throw std::domain_error("mc_curve_probability: steps >= 64");
  if (paths < 1000)
    throw std::domain_error("mc_curve_probability: paths >= 1000");
  double dt = t / steps;
  double sgn = (sign == CurveSign::AboveMinus) ? -1.0 : 1.0;
  auto barrier = [&](double s) {
    double arg = (kind == PathKind::Bridge) ? std::min(s, t - s) : s;
    return sgn * zeta(arg);
  };
  std::vector<double> bar(std::size_t(steps) + 1);
  for (int i = 0; i <= steps; ++i) bar[std::size_t(i)] = barrier(i * dt);

  std::uint64_t base = rng.next_u64();
  std::vector<double> weight(paths);
  parallel_for(
      paths,
      [&](std::size_t pi) {
        Rng r(base, pi);
        double wcur = 1.0;
        double b = x;
        // bridge via the drift correction of a free path
        double drift = (kind == PathKind::Bridge) ? (y - x) / t : 0.0;
        double prev = b;
        if (prev < bar[0]) {
          weight[pi] = 0.0;
          return;
        }
        double wsum = 0.0;
        std::vector<double> incr;
        if (kind == PathKind::Bridge) {
          // need the full increments to apply the bridge correction exactly
          incr.resize(std::size_t(steps));
          double tot = 0.0;
          for (int i = 0; i < steps; ++i) {
            incr[std::size_t(i)] = r.next_gaussian() * std::sqrt(dt);
            tot += incr[std::size_t(i)];
          }
          // B_s = x + W_s - (s/t)(W_t - (y-x))
          double corr = (tot - (y - x)) / steps;
          for (auto& v : incr) v -= corr;
        }
        for (int i = 1; i <= steps; ++i) {
          double cur;
          if (kind == PathKind::Bridge) {
            wsum += incr[std::size_t(i - 1)];
            cur = x + wsum;
          } else {
            cur = prev + r.next_gaussian() * std::sqrt(dt) + drift * dt;
          }
          if (cur < bar[std::size_t(i)]) {
            wcur = 0.0;
            break;
          }
          // exact crossing probability against the interval minorant
          double m = std::min(bar[std::size_t(i - 1)], bar[std::size_t(i)]);
          double a = prev - m, c = cur - m;
          wcur *= -std::expm1(-2.0 * a * c / dt);
          prev = cur;
        }
        weight[pi] = wcur;
      },
      threads);

  MeanAccumulator acc;
  for (double w : weight) acc.add(w);
  return {acc.mean(), acc.stderror(), paths};
}

double WalkClock::sigma2_min() const {
  return *std::min_element(sigma2.begin(), sigma2.end());
}
double WalkClock::sigma2_max() const {
  return *std::max_element(sigma2.begin(), sigma2.end());
}
std::vector<double> WalkClock::times() const {
  std::vector<double> t(sigma2.size() + 1, 0.0);
  for (std::size_t k = 0; k < sigma2.size(); ++k) t[k + 1] = t[k] + sigma2[k];
  return t;
}

RwCurveReport rw_above_curve(const WalkClock& clock, const CurveSpec& gamma,
                             int n, int k, double x, double y,
                             WalkConditioning cond, Rng& rng,
                             std::size_t paths, int violation_from,
                             unsigned threads) {
  if (int(clock.sigma2.size()) < n + 1)
    throw std::domain_error("rw_above_curve: clock too short");
  const bool bridge = (cond == WalkConditioning::BridgeToZero);
  const int lo = k;
  const int hi = bridge ? (n - k) : n;
  if (hi <= lo) throw std::domain_error("rw_above_curve: empty window");
  const int vfrom = (violation_from < 0) ? lo : violation_from;
  std::vector<double> t = clock.times();
  const double T = t[std::size_t(hi)] - t[std::size_t(lo)];

  std::vector<double> barrier(std::size_t(hi) + 1, 0.0);
  for (int l = lo; l <= hi; ++l)
    barrier[std::size_t(l)] = gamma(bridge ? double(std::min(l, n - l))
                                           : double(l));

  std::uint64_t base = rng.next_u64();
  std::vector<unsigned char> stayed(paths), violated(paths);
  parallel_for(
      paths,
      [&](std::size_t pi) {
        Rng r(base, pi);
        // walk as Brownian values at the clock times
        std::vector<double> s(std::size_t(hi) + 1, 0.0);
        s[std::size_t(lo)] = x;
        double acc = 0.0;
        for (int l = lo + 1; l <= hi; ++l) {
          acc += r.next_gaussian() *
                 std::sqrt(clock.sigma2[std::size_t(l - 1)]);
          s[std::size_t(l)] = x + acc;
        }
        if (bridge) {
          double total = s[std::size_t(hi)];
          for (int l = lo; l <= hi; ++l) {
            double frac = (t[std::size_t(l)] - t[std::size_t(lo)]) / T;
            s[std::size_t(l)] -= frac * (total - y);
          }
        }
        bool stay = true;
        bool viol = false;
        for (int l = lo; l <= hi && stay; ++l)
          if (s[std::size_t(l)] < -barrier[std::size_t(l)]) stay = false;
        if (stay)
          for (int l = std::max(vfrom, lo); l <= hi; ++l)
            if (s[std::size_t(l)] < barrier[std::size_t(l)]) {
              viol = true;
              break;
            }
        stayed[pi] = stay ? 1 : 0;
        violated[pi] = viol ? 1 : 0;
      },
      threads);

  std::size_t nstay = 0, nviol = 0;
  for (std::size_t i = 0; i < paths; ++i) {
    nstay += stayed[i];
    nviol += violated[i];
  }
  RwCurveReport rep;
  double ps = double(nstay) / double(paths);
  rep.stay = {ps, std::sqrt(std::max(ps * (1 - ps), 1e-300) / double(paths)),
              paths};
  if (nstay > 0) {
    double pv = double(nviol) / double(nstay);
    rep.violation_given_stay = {
        pv, std::sqrt(std::max(pv * (1 - pv), 1e-300) / double(nstay)), nstay};
  }

  // Brownian sandwich: staying above 0 bounds from below (gamma >= 0); the
  // doubled curve on the slowest clock, with the reflection product
  // correction, bounds from above
  double smin = clock.sigma2_min(), smax = clock.sigma2_max();
  if (x > 0 && (!bridge || y > 0)) {
    rep.sandwich_lower = bridge ? bridge_positive(x, y, T) : tau_tail(x, T);

    double logprod = 0.0;
    for (int j = lo; j <= hi; ++j) {
      double g = gamma(bridge ? double(std::min(j, n - j)) : double(j));
      double q = -std::expm1(-2.0 * g * g / smax);
      logprod += -2.0 * std::log(std::max(q, 1e-300));
    }
    auto doubled = [&](double s) {
      return 2.0 * gamma((t[std::size_t(lo)] + s) / smin);
    };
    double up;
    if (bridge) {
      double rtx = rho_for(x, doubled).rho_tilde;
      double rty = rho_for(y, doubled).rho_tilde;
      double d = kappa2(rtx / x, rty / y) *
                 std::exp((x - y) * (x - y) / (2.0 * T));
      up = (1.0 + d) * 2.0 * x * y / T;
    } else {
      double rtx = rho_for(x, doubled).rho_tilde;
      up = (1.0 + kappa1(rtx / x)) * std::sqrt(2.0 / M_PI) * x / std::sqrt(T);
    }
    rep.sandwich_upper = std::min(1.0, up * std::exp(logprod));
    rep.inside_sandwich = rep.stay.estimate >= rep.sandwich_lower - 1e-12 &&
                          rep.stay.estimate <= rep.sandwich_upper + 1e-12;
  }
  return rep;
}

} // namespace dgff
