#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dgff {

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

// running mean / variance (Welford)
class MeanAccumulator {
public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const MeanAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) { *this = o; return; }
    double d = o.mean_ - mean_;
    std::size_t n = n_ + o.n_;
    m2_ += o.m2_ + d * d * (double(n_) * double(o.n_)) / double(n);
    mean_ += d * double(o.n_) / double(n);
    n_ = n;
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
  double stderror() const {
    return n_ > 1 ? std::sqrt(variance() / double(n_)) : 0.0;
  }

private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
};

struct ConfidenceInterval {
  double value = 0.0, lo = 0.0, hi = 0.0;
  std::size_t n = 0;
};

// Wilson score interval for a binomial proportion
inline ConfidenceInterval wilson_ci(std::size_t successes, std::size_t trials,
                                    double z = 1.959963984540054) {
  if (trials == 0) throw std::domain_error("wilson_ci: no trials");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z / denom * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {p, center - half, center + half, trials};
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::domain_error("median: empty");
  std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + m - 1, v.begin() + m);
  return 0.5 * (hi + v[m - 1]);
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::domain_error("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(double(i) / na - double(j) / nb));
  }
  return d;
}

template <typename Cdf>
double ks_one_sample(std::vector<double> a, Cdf cdf) {
  if (a.empty()) throw std::domain_error("ks: empty sample");
  std::sort(a.begin(), a.end());
  double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double f = cdf(a[i]);
    d = std::max(d, std::abs(f - double(i) / n));
    d = std::max(d, std::abs(double(i + 1) / n - f));
  }
  return d;
}

// minimize a unimodal function on [lo,hi]
template <typename F>
double golden_section_min(F f, double lo, double hi, double tol = 1e-6) {
  const double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

} // namespace dgff
