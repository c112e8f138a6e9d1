#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "dgff/harmonic.hpp"
#include "dgff/lattice.hpp"
#include "dgff/rng.hpp"
#include "dgff/sampler.hpp"

namespace dgff {

// Exact per-scale statistics of the concentric decomposition over the
// dyadic boxes Delta^0 c Delta^1 c ... c Delta^n:
//   sigma_k^2 = Var(phi_k(0)) = G^{Delta^k}(0,0) - G^{Delta^{k-1}}(0,0)
//   b_k(x)    = Cov(phi_k(0), phi_k(x)) / sigma_k^2 - 1
// with b_k = -1 outside Delta^k and b_k(0) = 0.
struct DecompositionStats {
  int n = 0;
  std::vector<double> sigma2; // k = 0..n
  std::vector<double> t;      // t_k = sum_{l<k} sigma_l^2, k = 0..n+1
  std::shared_ptr<const LatticeDomain> box; // Delta^n
  std::vector<Eigen::VectorXd> b;           // profiles over box, k = 0..n
};

// full profiles need materialized boxes; depth is capped at 9
DecompositionStats decomposition_stats(int n);

struct ConcentricSample {
  int n = 0;
  std::vector<double> phi0;            // phi_k(0)
  std::vector<Eigen::VectorXd> chi;    // over box points (empty in fast mode)
  std::vector<Eigen::VectorXd> hprime; // over box points (empty in fast mode)
  Eigen::VectorXd field;               // reconstructed h^{Delta^n}
  std::vector<double> walk;            // S_0..S_{n+1}, S_k = sum_{l<k} phi_l(0)
};

// Samples the independent components {phi_k(0), chi_k, h'_k} by splitting a
// fresh DGFF on each Delta^k across the ring dividing Delta^{k-1} from the
// annulus, and assembles the field via the reconstruction identity.
class ConcentricSampler {
public:
  explicit ConcentricSampler(std::shared_ptr<const DecompositionStats> stats,
                             bool with_components = true);

  // with_components=false skips the annulus splits (phi_k/chi_k/h'_k are not
  // separated) but still yields the exact field and walk
  ConcentricSample sample(Rng& rng) const;

  const DecompositionStats& stats() const { return *stats_; }
  bool with_components() const { return components_; }

private:
  std::shared_ptr<const DecompositionStats> stats_;
  bool components_;
  std::vector<std::shared_ptr<const LatticeDomain>> annulus_; // index k-1
  std::vector<std::unique_ptr<DirichletSolver>> annulus_solver_;
};

// Control variables of the decomposition: the smallest polylog envelope
// scale K (depth-n version) and K_tilde (depth-free envelopes, evaluated on
// the truncated component family the sample carries).
struct ControlParams {
  double C = 5.0; // constant in R_k(l) = C [1 + Theta_k(l)]
};

struct ControlReport {
  int n = 0;
  int K = 0;      // in {2,...,floor(n/2)} or the default floor(n/2)+1
  int Ktilde = 0; // smallest admissible k >= 2 for the truncated family
  double C = 5.0;

  double theta(int k, int ell) const; // Theta_k(l) for this n
  static double theta_tilde(int k, int ell);
  double R(int ell) const { return C * (1.0 + theta(K, ell)); }
};

ControlReport control_variables(const ConcentricSample& s,
                                ControlParams params = {});

// Truncated whole-plane pinned field on the window Delta^r:
//   phi(x) = sum_{k<=n} (b_k(x) phi_k(0) + chi_k(x) + h'_k(x)).
// Component laws are exact at every scale; only the truncation at n is an
// approximation.  Paired seeds reuse the same per-scale streams, so
// enlarging n keeps the shared scales identical.
class WholePlanePlan {
public:
  WholePlanePlan(int n, int r, unsigned threads = 0);

  FieldSample sample(Rng& rng) const;
  Eigen::MatrixXd model_covariance() const; // over window point order
  int depth() const { return n_; }
  const std::shared_ptr<const LatticeDomain>& window() const {
    return window_;
  }

private:
  int n_ = 0, r_ = 0;
  std::shared_ptr<const LatticeDomain> window_;
  std::vector<double> sigma2_;
  std::vector<Eigen::VectorXd> bwin_; // b_k over window points
  struct Part {
    std::vector<int> slots;    // window indices carrying this factor
    Eigen::MatrixXd L;         // factor of the covariance on the slots
  };
  std::vector<Part> chi_;      // k = 0..n (k=0 empty)
  std::vector<Part> hprime_;   // nonempty only for k <= r+1
};

} // namespace dgff
