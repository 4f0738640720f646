// Landau resolvent kernel K(x, 0) along the x1 axis for a few spectral
// parameters in the well regime z = -lambda^2 + mu lambda, written as the
// kernel CSV table.
//
//   demo_landau_kernel_table [lambda] [b] > table.csv

#include <iostream>
#include <string>
#include <vector>

#include "magtun/io.hpp"
#include "magtun/landau.hpp"

using namespace magtun;

int main(int argc, char** argv) {
  const double lambda = argc > 1 ? std::stod(argv[1]) : 40.0;
  const double b = argc > 2 ? std::stod(argv[2]) : 0.2;
  std::vector<KernelSample> rows;
  for (double mu : {0.0, 0.5, 1.0}) {
    LandauKernelParams p;
    p.B = b * lambda;
    p.z = -lambda * lambda + mu * lambda;
    p.validate();
    for (int k = 1; k <= 40; ++k) {
      double r = 0.005 * k;
      cd w = 0.5 * p.B * r * r;
      auto q = gamma_tricomi_u1(p.a(), w, 1e-12);
      const cd scale = std::exp(-0.5 * w) / (4.0 * std::numbers::pi);
      // y = 0 makes the gauge phase trivial, so K(x, 0) is the radial part
      rows.push_back({Vec2(r, 0.0), Vec2::Zero(), mu, q.value * scale, q.abs_err * std::abs(scale)});
    }
  }
  write_kernel_csv(rows, std::cout);
}
