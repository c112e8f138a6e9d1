#pragma once

#include <functional>
#include <vector>

#include "dgff/extremes.hpp"
#include "dgff/sampler.hpp"
#include "dgff/stats.hpp"

namespace dgff {

struct GibbsWeights {
  double beta = 0.0;
  Eigen::VectorXd weights;   // probability vector over domain points
  double log_partition = 0.0; // log sum_x e^{beta h_x}
};

// weights proportional to e^{beta h_x}, accumulated max-shifted
GibbsWeights gibbs_weights(const FieldSample& field, double beta);

// sum_x e^{beta (h_x - m_N)}
double liouville_total(const FieldSample& field, double beta, double N);

// Y^beta of a cluster shape: sum over the window of e^{-beta phi_x},
// restricted to |x| <= cutoff; >= 1 since the origin contributes e^0
double y_beta(const Eigen::VectorXd& shape, const LatticeDomain& window,
              double beta, double cutoff);

struct AtomicMeasure {
  std::vector<double> masses; // positive, finite
  std::vector<std::pair<double, double>> locations; // aligned with masses
  double discarded_mass_mean = 0.0; // analytic E of the sub-epsilon mass
};

// Poisson-Dirichlet(s): points of a Poisson process with intensity
// x^{-1-s} dx on [eps, inf), normalized by their sum and sorted decreasing.
AtomicMeasure sample_pd(double s, Rng& rng, double eps = 1e-4);

// atoms q_i delta_{X_i} with X_i iid from Q, independent of the masses
AtomicMeasure sample_sigma(double s,
                           const std::function<std::pair<double, double>(Rng&)>& Q,
                           Rng& rng, double eps = 1e-4);

struct FreezingCurve {
  std::vector<double> t;     // grid
  std::vector<double> value; // MC mean of exp(-e^{-beta t} Z)
  std::vector<double> se;    // standard errors
};

// G_{N,beta}(t) = E exp{ -e^{-beta t} sum_x e^{beta h_x} } over the grid
FreezingCurve freezing_curve(const DomainSpec& spec, int N, double beta,
                             const std::vector<double>& grid,
                             std::size_t samples, Rng& rng,
                             unsigned threads = 0);

// sup-norm distance between two curves after the optimal horizontal shift,
// compared on [window_lo, window_hi] with linear interpolation
struct FreezingMatch {
  double shift = 0.0;
  double sup_distance = 0.0;
};
FreezingMatch freezing_match(const FreezingCurve& a, const FreezingCurve& b,
                             double window_lo, double window_hi,
                             double max_shift = 4.0);

struct MgfDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GumbelCheck {
  double ks = 0.0;
  double theta_hat = 0.0; // empirical MGF of the displacement at lambda
  std::size_t replicas = 0;
};

// Top-k points of a Gumbel PPP(e^{-lambda x} dx) displaced by iid X against
// a fresh PPP(theta e^{-lambda x} dx), theta = empirical MGF; two-sample KS
// over the pooled top-k values.
GumbelCheck gumbel_absorption_check(
    double lambda, const std::function<double(Rng&)>& displacement,
    std::size_t replicas, Rng& rng, int top_k = 3);

} // namespace dgff
