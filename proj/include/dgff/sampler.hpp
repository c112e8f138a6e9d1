#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>

#include "dgff/harmonic.hpp"
#include "dgff/lattice.hpp"
#include "dgff/rng.hpp"

namespace dgff {

struct FieldMeta {
  std::string sampler;
  std::uint64_t seed = 0;
  std::string conditioning;
};

// Real-valued configuration on a domain; zero on and outside the boundary.
struct FieldSample {
  std::shared_ptr<const LatticeDomain> domain;
  Eigen::VectorXd values; // over domain->points()
  FieldMeta meta;

  double value_at(LatticePoint p) const {
    int i = domain->index_of(p);
    return i >= 0 ? values[i] : 0.0;
  }
};

enum class SamplerMethod { Auto, DenseFactorization, SpectralRectangle };

// Precomputed sampling plan whose model covariance is green_matrix(domain).
class SamplerPlan {
public:
  static SamplerPlan make(std::shared_ptr<const LatticeDomain> domain,
                          SamplerMethod method = SamplerMethod::Auto);

  FieldSample sample(Rng& rng) const;
  SamplerMethod method() const { return method_; }
  const std::shared_ptr<const LatticeDomain>& domain() const { return domain_; }

  // the covariance the plan realizes, assembled analytically (dense: L L^T,
  // spectral: sum of (4/lambda) psi psi^T over the sine eigenbasis)
  Eigen::MatrixXd model_covariance() const;

private:
  std::shared_ptr<const LatticeDomain> domain_;
  SamplerMethod method_ = SamplerMethod::Auto;
  Eigen::MatrixXd chol_; // dense path only
};

FieldSample sample_dgff(std::shared_ptr<const LatticeDomain> D, Rng& rng,
                        SamplerMethod method = SamplerMethod::Auto);

struct GibbsMarkovSplit {
  FieldSample binding; // harmonic extension of the outer layer, on D
  FieldSample inner;   // independent DGFF on the subdomain
};

// h^D = binding + inner in law, with the two parts independent
GibbsMarkovSplit sample_gibbs_markov(std::shared_ptr<const LatticeDomain> D,
                                     std::shared_ptr<const LatticeDomain> Dsub,
                                     Rng& rng);

// law of h^D given h^D(0) = t, realized as h^{D \ {0}} + t g^D
FieldSample sample_pinned(std::shared_ptr<const LatticeDomain> D, double t,
                          Rng& rng);

// Whole-plane pinned law nu^0 on a finite window:
// Cov(phi_x, phi_y) = a(x) + a(y) - a(x-y), phi(0) = 0 exactly.
class Nu0Plan {
public:
  Nu0Plan(std::shared_ptr<const LatticeDomain> window,
          const PotentialTable& table);

  FieldSample sample(Rng& rng) const;
  double jitter_used() const { return jitter_; }
  const std::shared_ptr<const LatticeDomain>& window() const {
    return window_;
  }
  // covariance over the non-origin points, in window order minus the origin
  const Eigen::MatrixXd& covariance() const { return cov_; }

private:
  std::shared_ptr<const LatticeDomain> window_;
  std::vector<int> slot_;       // window index per factor row
  Eigen::MatrixXd cov_, chol_;
  double jitter_ = 0.0;
};

// one-shot convenience: window = Delta^r
FieldSample sample_nu0(int r, const PotentialTable& table, Rng& rng);

} // namespace dgff
