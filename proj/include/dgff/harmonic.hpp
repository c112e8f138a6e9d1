#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dgff/lattice.hpp"

namespace dgff {

inline constexpr double kG = 2.0 / M_PI;       // g = 2/pi
inline constexpr double kAlpha = 2.5066282746310002; // 2/sqrt(g) = sqrt(2*pi)

struct ToleranceNotMet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
  int nodes = 6144;        // base panel count; scaled by max|coordinate|
  double tolerance = 1e-8; // Richardson stability requirement
};

// Potential kernel of the simple random walk on Z^2.  The defining Fourier
// integral over [-pi,pi]^2 is evaluated after integrating one momentum
// component in closed form, leaving a single smooth axis integral:
//   a(x) = (2/pi) Int_0^pi [1 - e^{-m r(k)} cos(k l)] / sinh r(k) dk,
//   cosh r(k) = 2 - cos k,  m = max|x_i|, l = min|x_i|.
// A midpoint rule on the axis is Richardson-checked against half resolution.
double potential_kernel(LatticePoint x, const QuadratureSpec& spec = {});

// raw tensor-product midpoint rule on [-pi,pi]^2 (slow; kept as an
// independent oracle for the axis-reduced evaluation)
double potential_kernel_2d(LatticePoint x, int mesh_per_axis);

// Memoized values of the potential kernel; fill before sharing across
// threads (single writer, then readers only).  Near the origin values come
// from the quadrature; beyond kNearRadius the asymptotic
//   a(x) ~ g log|x| + c0 + a4 cos(4 theta)/|x|^2
// is used with (c0, a4) fitted once against the quadrature on a calibration
// ring, which reproduces a to ~1e-8 (checked in the tests).
class PotentialTable {
public:
  static constexpr int kNearRadius = 48;

  explicit PotentialTable(QuadratureSpec spec = {}) : spec_(spec) {}

  double value(LatticePoint x) const;
  void ensure_box(int radius); // precompute all |x|_inf <= radius
  const QuadratureSpec& spec() const { return spec_; }
  double fitted_c0() const; // far-field constant (triggers the fit)

private:
  static std::uint64_t canonical_key(LatticePoint x);
  void fit_far_field() const;
  QuadratureSpec spec_;
  mutable std::map<std::uint64_t, double> cache_;
  mutable bool far_ready_ = false;
  mutable double c0_ = 0.0, a4_ = 0.0;
};

struct C0Fit {
  double c0 = 0.0;
  double g_hat = 0.0;        // slope when refit with g free
  double residual_spread = 0.0;
  int points = 0;
};

// least-squares constant in a(x) ~ g log|x| + c0 over radii in [rmin,rmax]
C0Fit fit_c0(const PotentialTable& table, double rmin, double rmax);

struct GreenMatrix {
  std::shared_ptr<const LatticeDomain> domain;
  Eigen::MatrixXd values; // indexed by domain point order
};

// dense solve of (I - P) G = I; |D| capped at 2e4 points
GreenMatrix green_matrix(const LatticeDomain& D);
GreenMatrix green_matrix(std::shared_ptr<const LatticeDomain> D);

// single Green column G(., x); DST route on rectangles, sparse solve else
Eigen::VectorXd green_column(const LatticeDomain& D, LatticePoint x);

// G^{Delta^k}(0,0) by the exact sine-eigenbasis sum (any k up to 15)
double box_green_diag0(int k);

// Green entries of Delta^k between the given points (all strictly inside),
// via separated eigen-sums; cost ~ (#distinct row-coordinate pairs) * s^2
Eigen::MatrixXd box_green_pairs(int k, const std::vector<LatticePoint>& pts,
                                unsigned threads = 0);

struct HarmonicProfile {
  std::shared_ptr<const LatticeDomain> domain;
  Eigen::VectorXd interior;      // over domain->points()
  Eigen::VectorXd boundary_vals; // over domain->boundary()

  double value_at(LatticePoint p) const {
    int i = domain->index_of(p);
    if (i >= 0) return interior[i];
    int b = domain->boundary_index_of(p);
    return b >= 0 ? boundary_vals[b] : 0.0;
  }
  // max |u(x) - avg of neighbors| over interior vertices with all data
  double mean_value_residual() const;
};

// unique discrete-harmonic interpolant of the boundary data
HarmonicProfile harmonic_extension(std::shared_ptr<const LatticeDomain> D,
                                   const Eigen::VectorXd& boundary_vals);

// hitting distribution on the external boundary for the walk from x
Eigen::VectorXd harmonic_measure(const LatticeDomain& D, LatticePoint x);

// g^D: harmonic on D \ {0}, 1 at the origin, 0 outside D
HarmonicProfile pinning_profile(std::shared_ptr<const LatticeDomain> D);

// assembled sparse system (4I - A) for the domain interior
Eigen::SparseMatrix<double> dirichlet_system(const LatticeDomain& D);

// reusable factorization of (4I - A); solves are const and thread-safe
class DirichletSolver {
public:
  explicit DirichletSolver(const LatticeDomain& D);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

} // namespace dgff
