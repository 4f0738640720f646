// Closed-form oscillator ground state against the lowest grid eigenpair.
//
//   demo_mho_ground_state [lambda] [B] [n]

#include <cstdio>
#include <string>

#include "magtun/mho.hpp"
#include "magtun/spectral.hpp"

using namespace magtun;

int main(int argc, char** argv) {
  const double lambda = argc > 1 ? std::stod(argv[1]) : 30.0;
  const double B = argc > 2 ? std::stod(argv[2]) : 0.5;
  const int n = argc > 3 ? std::stoi(argv[3]) : 120;
  MHOParams p = mho_params(1.0, 2.0, B, lambda);
  Grid2D g = Grid2D::square(mho_box_half_width(p), n);
  SpectralResult r = lowest_eigs(build_mho_operator(p, g), 2);
  Field psi = Field::sample(g, [&](const Vec2& x) { return ground_state(p, x); });
  psi.normalize();
  double overlap = std::abs(psi.inner(r.eigenvectors[0]));
  std::printf("grid %d x %d, L = %.4f, h = %.5f\n", g.n1, g.n2, g.L1, g.h);
  std::printf("E0 closed form  %.10f\n", p.E0.real());
  std::printf("E0 grid         %.10f  (relative error %.3e)\n", r.eigenvalues[0],
              r.eigenvalues[0] / p.E0.real() - 1.0);
  std::printf("first gap       closed form %.6f, grid %.6f\n", lambda * p.first_gap(),
              r.eigenvalues[1] - r.eigenvalues[0]);
  std::printf("|<psi0, phi>|   %.10f\n", overlap);
}
