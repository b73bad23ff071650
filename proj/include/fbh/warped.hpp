#pragma once

#include "fbh/geometry.hpp"

#include <string>
#include <vector>

namespace fbh {

enum class WarpKind { doubly, singly_lambda, singly_mu, direct };

std::string to_string(WarpKind k);
WarpKind warp_kind_from_string(const std::string& s);

// M x_(mu, lambda) N with metric mu(y)^2 g(x) + lambda(x)^2 h(y).
// Product coordinates are (x_0..x_{m-1}, y_0..y_{n-1}); lambda is an
// expression in the base coordinates, mu in the fiber coordinates.
class WarpedProduct {
 public:
  // Throws NonPositiveWeight if a warping is not positive at the sample
  // points and WrongKind if a warping declared identically 1 is not.
  WarpedProduct(ChartManifold base, ChartManifold fiber, ScalarField lambda, ScalarField mu, WarpKind kind);
  static WarpedProduct singly(ChartManifold base, ChartManifold fiber, ScalarField lambda);
  static WarpedProduct direct(ChartManifold base, ChartManifold fiber);

  const ChartManifold& base() const { return base_; }
  const ChartManifold& fiber() const { return fiber_; }
  const ScalarField& lambda() const { return lambda_; }
  const ScalarField& mu() const { return mu_; }
  WarpKind kind() const { return kind_; }
  int m() const { return base_.dim(); }
  int n() const { return fiber_.dim(); }

  // lambda and mu as expressions in the product coordinates.
  Expr lambda_on_product() const { return lambda_; }
  Expr mu_on_product() const { return mu_.shifted(m()); }

  Point base_point(const Point& p) const;
  Point fiber_point(const Point& p) const;
  Point join(const Point& x, const Point& y) const;

  const ChartManifold& chart() const { return chart_; }

 private:
  ChartManifold base_, fiber_;
  ScalarField lambda_, mu_;
  WarpKind kind_;
  ChartManifold chart_;
};

// Tangent vector of the product split into base and fiber parts.
struct BlockVector {
  Point base;
  std::vector<double> x1, x2;

  std::vector<double> stacked() const;
  static BlockVector split(const WarpedProduct& w, const Point& p, std::span<const double> v);
};

Eigen::MatrixXd warped_metric_at(const WarpedProduct& w, const Point& p);
ChartManifold as_chart_manifold(const WarpedProduct& w);

// Levi-Civita connection of a singly warped product written through the
// product connection and lambda^2.  y holds the m+n components of a
// vector field in product coordinates.
BlockVector closed_form_connection(const WarpedProduct& w, const BlockVector& x, const ExprVec& y);

// Curvature R(X,Y)Z of a singly warped product in three algebraically
// equivalent closed forms: through Hess(lambda), through lambda^2 and
// grad lambda^2 written out termwise, and as wedge products.
BlockVector closed_form_curvature(const WarpedProduct& w, const BlockVector& x, const BlockVector& y,
                                  const BlockVector& z);
BlockVector closed_form_curvature_squared(const WarpedProduct& w, const BlockVector& x, const BlockVector& y,
                                          const BlockVector& z);
BlockVector closed_form_curvature_wedge(const WarpedProduct& w, const BlockVector& x, const BlockVector& y,
                                        const BlockVector& z);

// (X ^ Y) Z = g(Y, Z) X - g(X, Z) Y with the warped metric.
BlockVector wedge(const WarpedProduct& w, const BlockVector& x, const BlockVector& y, const BlockVector& z);

}  // namespace fbh
