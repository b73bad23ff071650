#pragma once

#include "fbh/geometry.hpp"

namespace fbh {

// Flat torus [0, period)^n with periodic axes.
ChartManifold flat_torus(int n, double period = 6.283185307179586);
// Flat box [lo, hi]^n.
ChartManifold flat_box(int n, double lo, double hi);
// Round unit sphere chart dtheta^2 + sin^2 theta dphi^2, theta in (delta, pi - delta).
ChartManifold sphere_chart(double delta = 0.1);
// dt^2 + e^{2t} dy^2 on [-w, w]^2, curvature -1.
ChartManifold hyperbolic_chart(double half_width = 2.0);
// Box [lo, hi]^n with metric e^{2u} times the flat one.
ChartManifold conformally_flat_box(int n, double lo, double hi, const Expr& u);
// Torus [0, period)^n with metric e^{2u} times the flat one; u must be periodic.
ChartManifold conformal_torus(int n, const Expr& u, double period = 6.283185307179586);
// One flat coordinate named name on [lo, hi].
ChartManifold interval(const std::string& name, double lo, double hi, bool periodic = false);

}  // namespace fbh
