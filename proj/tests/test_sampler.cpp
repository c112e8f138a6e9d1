#include <doctest.h>

#include <cmath>

#include "dgff/sampler.hpp"

using namespace dgff;

TEST_CASE("spectral and dense plans realize the same covariance") {
  std::vector<LatticePoint> pts;
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) pts.push_back({x, y});
  auto rect = std::make_shared<LatticeDomain>(std::move(pts));

  auto dense = SamplerPlan::make(rect, SamplerMethod::DenseFactorization);
  auto spectral = SamplerPlan::make(rect, SamplerMethod::SpectralRectangle);
  Eigen::MatrixXd cd = dense.model_covariance();
  Eigen::MatrixXd cs = spectral.model_covariance();
  CHECK((cd - cs).cwiseAbs().maxCoeff() < 1e-8);

  auto G = green_matrix(rect);
  CHECK((cd - G.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("spectral plan refuses non-rectangles") {
  auto disc = std::make_shared<LatticeDomain>(ball({0, 0}, 2.0));
  CHECK_THROWS_AS(SamplerPlan::make(disc, SamplerMethod::SpectralRectangle),
                  std::domain_error);
}

TEST_CASE("empirical covariance matches the Green function on Delta^2") {
  auto D = std::make_shared<LatticeDomain>(concentric_box(2));
  auto plan = SamplerPlan::make(D); // rectangle -> spectral
  auto G = green_matrix(D);

  std::size_t n = 100000;
  Eigen::Index m = Eigen::Index(D->size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  Rng rng(123, 5);
  for (std::size_t s = 0; s < n; ++s) {
    auto f = plan.sample(rng);
    acc.noalias() += f.values * f.values.transpose();
  }
  acc /= double(n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      double se = std::sqrt((G.values(i, i) * G.values(j, j) +
                             G.values(i, j) * G.values(i, j)) /
                            double(n));
      CHECK(std::abs(acc(i, j) - G.values(i, j)) < 4.0 * se);
    }
}

TEST_CASE("reproducibility: same seed and plan give identical samples") {
  auto D = std::make_shared<LatticeDomain>(concentric_box(3));
  auto plan = SamplerPlan::make(D);
  Rng r1(42, 7), r2(42, 7);
  auto a = plan.sample(r1);
  auto b = plan.sample(r2);
  CHECK(a.values == b.values);

  Rng r3(42, 8);
  auto c = plan.sample(r3);
  CHECK(a.values != c.values);
}

TEST_CASE("gibbs-markov: degenerate split leaves the binding at zero") {
  auto D = std::make_shared<LatticeDomain>(concentric_box(1));
  Rng rng(1, 1);
  auto split = sample_gibbs_markov(D, D, rng);
  CHECK(split.binding.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(split.inner.values.cwiseAbs().maxCoeff() > 0.0);
}

namespace {

std::shared_ptr<LatticeDomain> box_at(int half, int cx = 0, int cy = 0) {
  std::vector<LatticePoint> pts;
  for (int y = -half; y <= half; ++y)
    for (int x = -half; x <= half; ++x) pts.push_back({cx + x, cy + y});
  return std::make_shared<LatticeDomain>(std::move(pts));
}

} // namespace

TEST_CASE("gibbs-markov: covariance identity G^D = G^Dsub + Cov(binding)") {
  auto D = box_at(3);    // 7x7
  auto Ds = box_at(1);   // centered 3x3
  auto GD = green_matrix(D);
  auto GS = green_matrix(Ds);

  // Cov(binding)|_{Dsub} = H Sigma_outer H^T with H the harmonic measure
  // of Dsub read on the outer layer
  std::vector<LatticePoint> outer;
  for (auto p : D->points())
    if (!Ds->contains(p)) outer.push_back(p);
  Eigen::MatrixXd sigma(outer.size(), outer.size());
  for (std::size_t i = 0; i < outer.size(); ++i)
    for (std::size_t j = 0; j < outer.size(); ++j)
      sigma(i, j) =
          GD.values(D->index_of(outer[i]), D->index_of(outer[j]));

  const auto& bnd = Ds->boundary();
  Eigen::MatrixXd H(Ds->size(), bnd.size());
  for (std::size_t i = 0; i < Ds->size(); ++i) {
    auto row = harmonic_measure(*Ds, Ds->points()[i]);
    for (std::size_t b = 0; b < bnd.size(); ++b)
      H(Eigen::Index(i), Eigen::Index(b)) = row[Eigen::Index(b)];
  }
  // boundary vertices of Dsub sit in the outer layer (zero outside D)
  Eigen::MatrixXd S(bnd.size(), bnd.size());
  for (std::size_t a = 0; a < bnd.size(); ++a)
    for (std::size_t b = 0; b < bnd.size(); ++b) {
      auto ia = std::find(outer.begin(), outer.end(), bnd[a]);
      auto ib = std::find(outer.begin(), outer.end(), bnd[b]);
      S(Eigen::Index(a), Eigen::Index(b)) =
          (ia != outer.end() && ib != outer.end())
              ? sigma(ia - outer.begin(), ib - outer.begin())
              : 0.0;
    }
  Eigen::MatrixXd covb = H * S * H.transpose();

  for (std::size_t i = 0; i < Ds->size(); ++i)
    for (std::size_t j = 0; j < Ds->size(); ++j) {
      double lhs = GD.values(D->index_of(Ds->points()[i]),
                             D->index_of(Ds->points()[j]));
      double rhs = GS.values(Eigen::Index(i), Eigen::Index(j)) +
                   covb(Eigen::Index(i), Eigen::Index(j));
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("gibbs-markov: binding is discrete harmonic inside the subdomain") {
  auto D = box_at(3);
  auto Ds = box_at(1);
  Rng rng(17, 3);
  for (int rep = 0; rep < 20; ++rep) {
    auto split = sample_gibbs_markov(D, Ds, rng);
    for (auto p : Ds->points()) {
      double acc = 0.0;
      for (auto s : neighbor_steps()) acc += split.binding.value_at(p + s);
      CHECK(std::abs(split.binding.value_at(p) - 0.25 * acc) < 1e-10);
    }
  }
}

TEST_CASE("gibbs-markov: containment is checked") {
  auto D = box_at(2);
  auto shifted = box_at(1, 4, 0);
  Rng rng(5, 0);
  CHECK_THROWS_AS(sample_gibbs_markov(D, shifted, rng), std::domain_error);
}

TEST_CASE("pinned field: value at the origin is exactly t") {
  auto D = std::make_shared<LatticeDomain>(concentric_box(2));
  Rng rng(11, 2);
  for (double t : {-3.0, 0.0, 2.5}) {
    for (int rep = 0; rep < 5; ++rep) {
      auto f = sample_pinned(D, t, rng);
      CHECK(f.value_at({0, 0}) == t);
    }
  }
  auto off = std::make_shared<LatticeDomain>(LatticeDomain({{3, 3}}));
  CHECK_THROWS_AS(sample_pinned(off, 1.0, rng), std::domain_error);
}

TEST_CASE("pinned field: mean equals t * pinning profile") {
  auto D = std::make_shared<LatticeDomain>(concentric_box(2));
  auto g = pinning_profile(D);
  double t = 4.0;
  std::size_t n = 100000;
  Rng rng(300, 1);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(Eigen::Index(D->size()));
  for (std::size_t s = 0; s < n; ++s) {
    auto f = sample_pinned(D, t, rng);
    acc += f.values;
  }
  acc /= double(n);
  // per-coordinate sd is at most sqrt(G(x,x)) <= sqrt(G_max)
  auto G = green_matrix(D);
  for (std::size_t i = 0; i < D->size(); ++i) {
    double se = std::sqrt(G.values(Eigen::Index(i), Eigen::Index(i)) /
                          double(n));
    CHECK(std::abs(acc[Eigen::Index(i)] - t * g.interior[Eigen::Index(i)]) <
          4.0 * se + 1e-12);
  }
}

TEST_CASE("nu0: pinned at zero with variance 2a(x)") {
  PotentialTable table;
  auto window = std::make_shared<LatticeDomain>(concentric_box(2));
  Nu0Plan plan(window, table);
  CHECK(plan.jitter_used() == 0.0);

  Rng rng(2024, 9);
  std::size_t n = 100000;
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(Eigen::Index(window->size()));
  double skew_acc = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    auto f = plan.sample(rng);
    CHECK(f.value_at({0, 0}) == 0.0);
    m2 += f.values.cwiseProduct(f.values);
    double v = f.value_at({1, 0});
    skew_acc += v * v * v;
  }
  m2 /= double(n);
  for (auto p : window->points()) {
    if (p == LatticePoint{0, 0}) continue;
    double want = 2.0 * table.value(p);
    double se = want * std::sqrt(2.0 / double(n)); // var of chi^2 mean
    CHECK(std::abs(m2[window->index_of(p)] - want) < 4.0 * se);
  }
  // phi <-> -phi symmetry: third moment of phi_{e1} vanishes
  double v2 = 2.0 * table.value({1, 0});
  double se3 = std::sqrt(15.0 * v2 * v2 * v2 / double(n));
  CHECK(std::abs(skew_acc / double(n)) < 4.0 * se3);
}

TEST_CASE("stochastic domination across nested boxes (smoke)") {
  // P(max_A h^{Dsub} >= lam) <= 2 P(max_A h^D >= lam) + MC slack
  auto D = box_at(4);
  auto Ds = box_at(2);
  auto planD = SamplerPlan::make(D);
  auto planS = SamplerPlan::make(Ds);
  Rng r1(88, 1), r2(88, 2);
  double lam = 1.5;
  std::size_t n = 20000, cs = 0, cd = 0;
  auto maxA = [&](const FieldSample& f) {
    double m = -1e300;
    for (int x = -2; x <= 2; ++x)
      for (int y = -2; y <= 2; ++y) m = std::max(m, f.value_at({x, y}));
    return m;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (maxA(planS.sample(r1)) >= lam) ++cs;
    if (maxA(planD.sample(r2)) >= lam) ++cd;
  }
  double ps = double(cs) / double(n), pd = double(cd) / double(n);
  double slack = 5.0 * std::sqrt(ps * (1 - ps) / n + pd * (1 - pd) / n);
  CHECK(ps <= 2.0 * pd + slack);
}

TEST_CASE("FKG smoke test: increasing functions correlate non-negatively") {
  auto D = std::make_shared<LatticeDomain>(concentric_box(2));
  auto plan = SamplerPlan::make(D);
  Rng rng(555, 0);
  std::size_t n = 40000;
  // two coordinatewise-increasing functions
  auto f = [&](const FieldSample& h) {
    return h.value_at({0, 0}) + h.value_at({1, 1});
  };
  auto g = [&](const FieldSample& h) {
    return std::min(h.value_at({-1, 0}), h.value_at({2, -2}));
  };
  double sf = 0, sg = 0, sfg = 0, sf2 = 0, sg2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto h = plan.sample(rng);
    double a = f(h), b = g(h);
    sf += a; sg += b; sfg += a * b; sf2 += a * a; sg2 += b * b;
  }
  double cov = sfg / n - (sf / n) * (sg / n);
  double va = sf2 / n - (sf / n) * (sf / n);
  double vb = sg2 / n - (sg / n) * (sg / n);
  double se = std::sqrt(va * vb / double(n));
  CHECK(cov > -4.0 * se);
}
