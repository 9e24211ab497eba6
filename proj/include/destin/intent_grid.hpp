#pragma once

#include <stdexcept>
#include <vector>

namespace destin {

/// Candidate arrival times with composite-Simpson weights over [t_a, t_b].
/// Weights sum to the interval length.
struct QuadratureGrid {
  std::vector<double> points;
  std::vector<double> weights;
  double t_a = 0.0;
  double t_b = 0.0;

  std::size_t size() const { return points.size(); }
};

/// Uniform grid with composite-Simpson weights. Simpson needs an even number
/// of subintervals, so an even q is bumped to q + 1.
inline QuadratureGrid make_grid(double t_a, double t_b, int q) {
  if (!(t_b > t_a)) throw std::invalid_argument("make_grid: degenerate interval");
  if (q < 3) throw std::invalid_argument("make_grid: need at least 3 points");
  if (q % 2 == 0) ++q;

  QuadratureGrid grid;
  grid.t_a = t_a;
  grid.t_b = t_b;
  const int n = q - 1;  // subintervals
  const double h = (t_b - t_a) / n;
  grid.points.resize(q);
  grid.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    grid.points[i] = t_a + h * i;
    const double c = (i == 0 || i == q - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    grid.weights[i] = c * h / 3.0;
  }
  grid.points.back() = t_b;  // exact upper bound
  return grid;
}

}  // namespace destin
