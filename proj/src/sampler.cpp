#include "dgff/sampler.hpp"

#include <cmath>

#include "dgff/fast_poisson.hpp"

namespace dgff {

SamplerPlan SamplerPlan::make(std::shared_ptr<const LatticeDomain> domain,
                              SamplerMethod method) {
  if (domain->empty()) throw std::domain_error("SamplerPlan: empty domain");
  SamplerPlan plan;
  plan.domain_ = std::move(domain);
  if (method == SamplerMethod::Auto)
    method = plan.domain_->is_rectangle() ? SamplerMethod::SpectralRectangle
                                          : SamplerMethod::DenseFactorization;
  if (method == SamplerMethod::SpectralRectangle && !plan.domain_->is_rectangle())
    throw std::domain_error("spectral plan requires a full rectangle");
  plan.method_ = method;
  if (method == SamplerMethod::DenseFactorization) {
    GreenMatrix G = green_matrix(plan.domain_);
    Eigen::LLT<Eigen::MatrixXd> llt(G.values);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("SamplerPlan: Green factorization failed");
    plan.chol_ = llt.matrixL();
  }
  return plan;
}

FieldSample SamplerPlan::sample(Rng& rng) const {
  Eigen::Index n = Eigen::Index(domain_->size());
  FieldSample out;
  out.domain = domain_;
  if (method_ == SamplerMethod::SpectralRectangle) {
    auto v = rect_dgff_sample(domain_->width(), domain_->height(), rng);
    out.values = Eigen::Map<Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
    out.meta.sampler = "spectral-rectangle";
  } else {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.next_gaussian();
    out.values = chol_.triangularView<Eigen::Lower>() * z;
    out.meta.sampler = "dense-factorization";
  }
  return out;
}

Eigen::MatrixXd SamplerPlan::model_covariance() const {
  Eigen::Index n = Eigen::Index(domain_->size());
  if (method_ == SamplerMethod::DenseFactorization)
    return chol_ * chol_.transpose();

  // assemble sum over modes of (4/lambda) psi psi^T
  int W = domain_->width(), H = domain_->height();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd psi(n);
  double norm = 2.0 / std::sqrt(double(W + 1) * double(H + 1));
  for (int q = 0; q < H; ++q)
    for (int p = 0; p < W; ++p) {
      double lam = dst_eigenvalue_1d(p, W) + dst_eigenvalue_1d(q, H);
      for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
          psi[Eigen::Index(j) * W + i] =
              norm * std::sin(M_PI * (i + 1) * (p + 1) / (W + 1)) *
              std::sin(M_PI * (j + 1) * (q + 1) / (H + 1));
      cov.noalias() += (4.0 / lam) * psi * psi.transpose();
    }
  return cov;
}

FieldSample sample_dgff(std::shared_ptr<const LatticeDomain> D, Rng& rng,
                        SamplerMethod method) {
  return SamplerPlan::make(std::move(D), method).sample(rng);
}

GibbsMarkovSplit sample_gibbs_markov(std::shared_ptr<const LatticeDomain> D,
                                     std::shared_ptr<const LatticeDomain> Dsub,
                                     Rng& rng) {
  for (auto p : Dsub->points())
    if (!D->contains(p))
      throw std::domain_error("sample_gibbs_markov: subdomain not contained");

  GibbsMarkovSplit out;
  out.inner = sample_dgff(Dsub, rng);
  out.inner.meta.conditioning = "gibbs-markov inner";

  // outer layer of h^D: marginal covariance is G^D restricted to D - Dsub
  std::vector<LatticePoint> outer_pts;
  for (auto p : D->points())
    if (!Dsub->contains(p)) outer_pts.push_back(p);

  out.binding.domain = D;
  out.binding.values = Eigen::VectorXd::Zero(Eigen::Index(D->size()));
  out.binding.meta.sampler = "gibbs-markov binding";
  if (outer_pts.empty()) return out; // degenerate split: binding stays zero

  GreenMatrix GD = green_matrix(D);
  Eigen::Index m = Eigen::Index(outer_pts.size());
  Eigen::MatrixXd sigma(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      sigma(i, j) = GD.values(D->index_of(outer_pts[i]),
                              D->index_of(outer_pts[j]));
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gibbs_markov: outer factorization failed");
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = rng.next_gaussian();
  Eigen::VectorXd w = Eigen::MatrixXd(llt.matrixL()) * z;

  for (Eigen::Index i = 0; i < m; ++i)
    out.binding.values[D->index_of(outer_pts[i])] = w[i];

  // harmonic extension into the subdomain; boundary data are the outer
  // values, which are zero outside D by the field convention
  Eigen::VectorXd bvals(Eigen::Index(Dsub->boundary().size()));
  for (std::size_t b = 0; b < Dsub->boundary().size(); ++b)
    bvals[Eigen::Index(b)] = out.binding.value_at(Dsub->boundary()[b]);
  HarmonicProfile ext = harmonic_extension(Dsub, bvals);
  for (std::size_t i = 0; i < Dsub->size(); ++i)
    out.binding.values[D->index_of(Dsub->points()[i])] =
        ext.interior[Eigen::Index(i)];
  return out;
}

FieldSample sample_pinned(std::shared_ptr<const LatticeDomain> D, double t,
                          Rng& rng) {
  if (!D->contains({0, 0}))
    throw std::domain_error("sample_pinned: 0 not in domain");
  HarmonicProfile g = pinning_profile(D);

  FieldSample out;
  out.domain = D;
  out.values = t * g.interior;
  out.meta.sampler = "pinned";
  out.meta.conditioning = "h(0) = t";

  std::vector<LatticePoint> rest;
  for (auto p : D->points())
    if (!(p == LatticePoint{0, 0})) rest.push_back(p);
  if (!rest.empty()) {
    auto punctured = std::make_shared<LatticeDomain>(std::move(rest));
    FieldSample h = sample_dgff(punctured, rng);
    for (std::size_t i = 0; i < punctured->size(); ++i)
      out.values[D->index_of(punctured->points()[i])] +=
          h.values[Eigen::Index(i)];
  }
  return out;
}

Nu0Plan::Nu0Plan(std::shared_ptr<const LatticeDomain> window,
                 const PotentialTable& table)
    : window_(std::move(window)) {
  if (!window_->contains({0, 0}))
    throw std::domain_error("Nu0Plan: window must contain the origin");
  const auto& pts = window_->points();
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!(pts[i] == LatticePoint{0, 0})) slot_.push_back(int(i));

  Eigen::Index n = Eigen::Index(slot_.size());
  cov_.resize(n, n);
  std::vector<double> ax(slot_.size());
  for (Eigen::Index i = 0; i < n; ++i) ax[i] = table.value(pts[slot_[i]]);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      double v = ax[i] + ax[j] - table.value(pts[slot_[i]] - pts[slot_[j]]);
      cov_(i, j) = cov_(j, i) = v;
    }

  Eigen::MatrixXd work = cov_;
  for (int attempt = 0;; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      break;
    }
    if (attempt >= 8)
      throw std::runtime_error(
          "Nu0Plan: Gram factorization failed even with jitter");
    jitter_ = (jitter_ == 0.0) ? 1e-12 : jitter_ * 10.0;
    work = cov_ + jitter_ * Eigen::MatrixXd::Identity(n, n);
  }
}

FieldSample Nu0Plan::sample(Rng& rng) const {
  Eigen::Index n = Eigen::Index(slot_.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.next_gaussian();
  Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>() * z;

  FieldSample out;
  out.domain = window_;
  out.values = Eigen::VectorXd::Zero(Eigen::Index(window_->size()));
  for (Eigen::Index i = 0; i < n; ++i) out.values[slot_[i]] = v[i];
  out.meta.sampler = "nu0-gram";
  out.meta.conditioning = "phi(0) = 0";
  return out;
}

FieldSample sample_nu0(int r, const PotentialTable& table, Rng& rng) {
  auto window = std::make_shared<LatticeDomain>(concentric_box(r));
  Nu0Plan plan(window, table);
  return plan.sample(rng);
}

} // namespace dgff
