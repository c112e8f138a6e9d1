#include "dgff/fast_poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dgff {

namespace {

// FFTW plan creation is not thread-safe; execution via the new-array API is.
std::mutex g_plan_mutex;

fftw_plan get_plan(int W, int H) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find({W, H});
  if (it != cache.end()) return it->second;
  double* buf = fftw_alloc_real(static_cast<std::size_t>(W) * H);
  // row-major: H rows of length W
  fftw_plan p = fftw_plan_r2r_2d(H, W, buf, buf, FFTW_RODFT00, FFTW_RODFT00,
                                 FFTW_ESTIMATE);
  fftw_free(buf);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  cache[{W, H}] = p;
  return p;
}

struct FftwBuffer {
  double* p;
  explicit FftwBuffer(std::size_t n)
      : p(fftw_alloc_real(n)) {
    if (!p) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

} // namespace

void dst2_inplace(std::vector<double>& data, int W, int H) {
  std::size_t n = static_cast<std::size_t>(W) * H;
  if (data.size() != n) throw std::invalid_argument("dst2: size mismatch");
  fftw_plan plan = get_plan(W, H);
  FftwBuffer buf(n);
  std::memcpy(buf.p, data.data(), n * sizeof(double));
  fftw_execute_r2r(plan, buf.p, buf.p);
  std::memcpy(data.data(), buf.p, n * sizeof(double));
}

double dst_eigenvalue_1d(int p, int n) {
  return 2.0 - 2.0 * std::cos(M_PI * (p + 1) / (n + 1));
}

std::vector<double> rect_poisson_solve(int W, int H,
                                       const std::vector<double>& b) {
  std::vector<double> u = b;
  dst2_inplace(u, W, H);
  for (int q = 0; q < H; ++q) {
    double ly = dst_eigenvalue_1d(q, H);
    for (int p = 0; p < W; ++p)
      u[static_cast<std::size_t>(q) * W + p] /= (dst_eigenvalue_1d(p, W) + ly);
  }
  dst2_inplace(u, W, H);
  // DST-I applied twice multiplies by 2(n+1) per dimension
  double norm = 4.0 * (W + 1) * (H + 1);
  for (double& v : u) v /= norm;
  return u;
}

std::vector<double> rect_green_column(int W, int H, int idx) {
  std::vector<double> b(static_cast<std::size_t>(W) * H, 0.0);
  b[idx] = 4.0;
  return rect_poisson_solve(W, H, b);
}

std::vector<double> rect_dgff_sample(int W, int H, Rng& rng) {
  std::size_t n = static_cast<std::size_t>(W) * H;
  std::vector<double> a(n);
  for (int q = 0; q < H; ++q) {
    double ly = dst_eigenvalue_1d(q, H);
    for (int p = 0; p < W; ++p) {
      double lam = dst_eigenvalue_1d(p, W) + ly;
      a[static_cast<std::size_t>(q) * W + p] =
          rng.next_gaussian() * std::sqrt(4.0 / lam);
    }
  }
  dst2_inplace(a, W, H);
  double norm = 1.0 / (2.0 * std::sqrt(static_cast<double>(W + 1) * (H + 1)));
  for (double& v : a) v *= norm;
  return a;
}

} // namespace dgff
