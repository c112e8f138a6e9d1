#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "dgff/centering.hpp"
#include "dgff/harmonic.hpp"
#include "dgff/sampler.hpp"
#include "dgff/stats.hpp"

namespace dgff {

struct LocalMaxEntry {
  LatticePoint position;
  double scaled_x = 0.0, scaled_y = 0.0; // position / N
  double height = 0.0;                   // h(x) - m_N
  // shape z -> h(x) - h(x+z) over the window points; entries clipped at the
  // domain are NaN
  Eigen::VectorXd shape;
  bool tie = false;
};

struct PointProcessSample {
  std::shared_ptr<const LatticeDomain> window;
  double N = 0.0;
  std::vector<LocalMaxEntry> entries;
  std::size_t ties = 0;
};

// r-local maxima of the field (field = 0 outside its domain); candidates
// below `floor` are skipped, which prunes scans aimed at the extremes
PointProcessSample local_maxima(
    const FieldSample& field, double r, double N,
    std::shared_ptr<const LatticeDomain> window,
    double floor = -std::numeric_limits<double>::infinity());

// { x : h(x) >= m_N - t }
std::vector<LatticePoint> level_set(const FieldSample& field, double t,
                                    double N);

struct ClusterEstimate {
  int r = 0;
  std::shared_ptr<const LatticeDomain> ball; // |x| <= r, origin included
  std::vector<Eigen::VectorXd> shapes;       // phi + (2/sqrt g) a, accepted
  ConfidenceInterval p;                      // acceptance with Wilson CI
  std::size_t trials = 0, accepts = 0;
  bool no_acceptance = false;
  // acceptance counts for every sub-radius (shared trials, exact nesting):
  // survivors[s] = #trials whose first violation lies beyond radius^2 = s
  std::vector<std::size_t> survivors_by_r2;
  double p_at(double sub_radius) const;
};

// Rejection sampler for the cluster law: nu^0 on the Euclidean ball of
// radius r, accepted iff phi + (2/sqrt g) a >= 0 everywhere on the ball.
// Points are ordered by radius and sampled through the Cholesky factor
// incrementally, so a trial aborts at its innermost violation.
ClusterEstimate sample_cluster_law(int r, const PotentialTable& table,
                                   Rng& rng, std::size_t budget,
                                   unsigned threads = 0,
                                   std::size_t keep_shapes = 4096);

struct XiInEstimate {
  int ell = 0;
  double value = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  std::size_t n = 0;
};

// bounded local functional of the recentred cluster field (2/sqrt g) a - phi
using LocalFunctional =
    std::function<double(const LatticeDomain&, const Eigen::VectorXd&)>;

// Monte Carlo for the inner cluster functional at depth ell: the walk value
// S_ell weighted by its [ell^{1/6}, ell^2] truncation and the event that
// phi_ell stays below (2/sqrt g) a on the whole box.
XiInEstimate xi_in(int ell, const LocalFunctional& f,
                   const PotentialTable& table, Rng& rng, std::size_t budget,
                   unsigned threads = 0);

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SlopeFit {
  double slope = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  std::size_t n = 0;
};

// maximum-likelihood exponential slope of heights restricted to
// [window_lo, window_hi], bootstrap CI; needs >= 200 in-window points
SlopeFit intensity_exponent(const std::vector<double>& heights,
                            double window_lo, double window_hi, Rng& rng,
                            int bootstrap = 200);

struct MaxHistogram {
  int pos_bins = 0, height_bins = 0;
  double height_lo = 0.0, height_hi = 0.0;
  double box_x0 = 0.0, box_y0 = 0.0, box_w = 1.0, box_h = 1.0; // scaled
  std::vector<double> mass;            // pos_bins^2 * height_bins, sums to 1
  std::vector<double> pos_marginal;    // pos_bins^2
  std::vector<double> height_marginal; // height_bins
  std::vector<double> raw_heights;     // max - m_N per sample
  std::size_t samples = 0;

  double& cell(int bx, int by, int bh) {
    return mass[(std::size_t(by) * pos_bins + bx) * height_bins + bh];
  }
};

// empirical joint density of (argmax/N, max - m_N) over independent fields
MaxHistogram max_histogram(const DomainSpec& spec, int N, std::size_t samples,
                           Rng& rng, int pos_bins = 8, int height_bins = 48,
                           double height_lo = -6.0, double height_hi = 6.0,
                           unsigned threads = 0);

} // namespace dgff
