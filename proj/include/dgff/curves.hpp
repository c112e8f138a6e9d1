#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dgff/rng.hpp"

namespace dgff {

struct GrowthClassError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Nonnegative nondecreasing curve with analytic metadata.  The polylog
// family has zeta'(s) = a log(1+s/sigma^2)/(1+s/sigma^2), the envelope the
// tail bound of rho~ is calibrated against; the gamma family is
// gamma(s) = a (1 + log(a+s))^2 with a > (1+sqrt(5))/2, which makes it
// nondecreasing and concave.
class CurveSpec {
public:
  enum class Kind { Zero, Constant, PolyLog, Gamma, Power };

  static CurveSpec zero();
  static CurveSpec constant(double c);
  static CurveSpec polylog(double a, double sigma, double zeta0);
  static CurveSpec gamma_curve(double a);
  static CurveSpec power(double c, double p); // c * s^p (test curve)
  CurveSpec shifted(double u) const;          // zeta_u(s) = zeta(u + s)

  double operator()(double s) const;
  Kind kind() const { return kind_; }
  double shift() const { return u_; }
  double a_param() const { return a_; }
  double sigma_param() const { return sigma_; }

  bool nondecreasing() const { return true; }
  bool concave() const { return kind_ == Kind::Gamma; }
  bool sqrt_growth_ok() const {
    return kind_ != Kind::Power || p_ < 0.5;
  }
  bool quarter_growth_ok() const {
    return kind_ != Kind::Power || p_ < 0.25;
  }

private:
  Kind kind_ = Kind::Zero;
  double a_ = 0.0, sigma_ = 1.0, zeta0_ = 0.0, p_ = 0.0, u_ = 0.0;
};

// exact reflection-principle formulas
double tau_tail(double x, double t);                    // P^0(tau_x > t)
double bridge_positive(double x, double y, double t);   // P^x(tau_0>t|B_t=y)
double argmax_density(double s, double z, double t);    // (T*_t, M*_t) joint

struct RhoPair {
  double rho = 0.0;
  double rho_tilde = 0.0;
};

// rho(x)  = zeta(x^2) + (x/2) Int_{x^2}^inf zeta(s) s^{-3/2} ds
// rho~(x) = rho(x) + 4 zeta(x^2)^2/x + 2 Int_{x^2}^inf zeta(s)^2 s^{-3/2} ds
RhoPair rho_functionals(double x, const CurveSpec& zeta);

enum class BoundKind {
  BmPosLower,     // (1-d) sqrt(2/pi) x/sqrt(t), d = x^2/2t + 4(rho/x)^{2/3}
  BridgePosLower, // (1-d) 2xy/t
  BmNegUpper,     // (1+kappa1(rho~/x)) sqrt(2/pi) x/sqrt(t)
  BridgeNegUpper, // (1+kappa2(., .) e^{(x-y)^2/2t}) 2xy/t
  EntropicBm,     // c u^{-1/16} / sqrt(t)
  EntropicBridge, // c u^{-1/16} / t
};

double kappa1(double u);
double kappa2(double u, double v);

// fitted on the Monte Carlo calibration grid and frozen; no tightness claim
struct EntropicConstants {
  double c_bm = 2.5;
  double c_bridge = 6.0;
};

struct BoundParams {
  double x = 0.0, y = 0.0, t = 0.0, u = 0.0;
  const CurveSpec* curve = nullptr;
  EntropicConstants entropic{};
};

struct BoundResult {
  double value = 0.0;
  double delta = 0.0;
  bool vacuous = false; // lower bounds with delta >= 1
};

BoundResult curve_bound(BoundKind kind, const BoundParams& p);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

enum class PathKind { Bm, Bridge };
enum class CurveSign { AbovePlus, AboveMinus };

// Path simulation on a uniform grid with the exact Brownian-bridge crossing
// correction against the piecewise-constant minorant of the barrier; the
// estimate is an upper-biased survival probability whose bias shrinks as
// steps grow.  Bridge paths use the symmetrized curve zeta(s ^ (t-s)).
McEstimate mc_curve_probability(PathKind kind, const CurveSpec& zeta,
                                CurveSign sign, double x, double y, double t,
                                int steps, std::size_t paths, Rng& rng,
                                unsigned threads = 0);

struct WalkClock {
  std::vector<double> sigma2; // step variances, index 0..n

  double sigma2_min() const;
  double sigma2_max() const;
  std::vector<double> times() const; // t_k = sum_{l<k} sigma2_l
};

enum class WalkConditioning { Free, BridgeToZero };

struct RwCurveReport {
  McEstimate stay;                  // stay above -gamma over the window
  McEstimate violation_given_stay;  // dip below +gamma on [vfrom..end] | stay
  double sandwich_lower = 0.0;      // Brownian lower bound for `stay`
  double sandwich_upper = 0.0;      // Brownian upper bound for `stay`
  bool inside_sandwich = false;
};

// Free: pins S_k = x, window l = k..n, barrier -gamma(l).
// BridgeToZero: pins S_k = x and S_{n-k} = y, window l = k..n-k, barrier
// -gamma(l ^ (n-l)).  The sandwich values realize the random-walk-to-
// Brownian reduction: stay-above-0 from below, the negative-curve upper
// bound on the doubled clock-stretched curve times the product correction
// from above.
RwCurveReport rw_above_curve(const WalkClock& clock, const CurveSpec& gamma,
                             int n, int k, double x, double y,
                             WalkConditioning cond, Rng& rng,
                             std::size_t paths, int violation_from = -1,
                             unsigned threads = 0);

} // namespace dgff
