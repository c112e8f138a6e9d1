#pragma once

#include <vector>

#include "dgff/rng.hpp"

namespace dgff {

// Dirichlet sine machinery on a W x H rectangle of interior points.
// The killed-walk Green operator is G = 4 (4I - A)^{-1}; its eigenbasis is
// the DST-I basis with 1D eigenvalues lam_p = 2 - 2 cos(pi (p+1)/(n+1)).

// unnormalized DST-I in both dimensions (FFTW RODFT00), in place
void dst2_inplace(std::vector<double>& data, int W, int H);

double dst_eigenvalue_1d(int p, int n); // 2 - 2cos(pi(p+1)/(n+1))

// solve (4I - A) u = b on the rectangle, zero Dirichlet boundary
std::vector<double> rect_poisson_solve(int W, int H,
                                       const std::vector<double>& b);

// Green column G(., idx): 4 * (4I - A)^{-1} e_idx
std::vector<double> rect_green_column(int W, int H, int idx);

// exact DGFF sample on the rectangle: sum_k sqrt(4/lam_k) Z_k psi_k
std::vector<double> rect_dgff_sample(int W, int H, Rng& rng);

} // namespace dgff
