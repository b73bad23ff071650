#pragma once

#include "fbh/expr.hpp"
#include "fbh/linalg.hpp"

#include <Eigen/Dense>

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fbh {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;
  double length() const { return hi - lo; }
};

struct Point {
  std::vector<double> coords;
  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
};

struct TangentVector {
  Point base;
  std::vector<double> components;
};

using ScalarField = Expr;

// Coordinate patch with a metric given by expressions in the patch
// coordinates.  Periodic axes wrap; the metric must be periodic there.
class ChartManifold {
 public:
  // metric_upper holds g_ij for i <= j, row by row.
  ChartManifold(std::string name, std::vector<std::string> coords, std::vector<Interval> box,
                std::vector<Expr> metric_upper);
  static ChartManifold diagonal(std::string name, std::vector<std::string> coords,
                                std::vector<Interval> box, std::vector<Expr> diag);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coord_names() const { return coords_; }
  const std::vector<Interval>& box() const { return box_; }
  const Expr& metric_entry(int i, int j) const;
  // True when every metric entry is a constant expression.
  bool has_constant_metric() const { return constant_metric_; }

  Eigen::MatrixXd metric(const Point& p) const;
  template <class T>
  Matrix<T> metric_at(std::span<const T> x) const {
    Matrix<T> g(dim(), dim());
    for (int i = 0; i < dim(); ++i)
      for (int j = i; j < dim(); ++j) {
        g(i, j) = metric_entry(i, j).eval(x);
        if (j != i) g(j, i) = g(i, j);
      }
    return g;
  }

  bool contains(const Point& p) const;
  Point wrap(const Point& p) const;
  // Throws OutOfDomain unless p lies in the box after wrapping periodic axes.
  void require_contains(const Point& p) const;
  // Uniform sample from the box shrunk by margin * length on non-periodic axes.
  Point sample(std::mt19937_64& rng, double margin = 0.05) const;

 private:
  std::string name_;
  std::vector<std::string> coords_;
  std::vector<Interval> box_;
  std::vector<Expr> upper_;
  bool constant_metric_ = true;
};

// Jets of metric data around a point, in the manifold's own coordinates.
struct LocalMetric {
  int dim = 0;
  JetMat g, ginv;     // order K
  JetVec gamma;       // Gamma^k_ij at k*d*d + i*d + j, order K-1

  const Jet& Gamma(int k, int i, int j) const { return gamma[(k * dim + i) * dim + j]; }
  // R^l_ijk with R(d_i, d_j) d_k = R^l_ijk d_l, order K-2.
  JetVec riemann() const;
};

LocalMetric local_metric(const ChartManifold& m, const Point& p, int order);
// Identity coordinate jets x_i = p_i + delta_i.
JetVec coordinate_jets(const Point& p, int order);

// Christoffel symbols Gamma^k_ij at k*d*d + i*d + j.
std::vector<double> christoffel(const ChartManifold& m, const Point& p);
// R^l_ijk at ((l*d + i)*d + j)*d + k.
std::vector<double> riemann(const ChartManifold& m, const Point& p);
std::vector<double> riemann_apply(const ChartManifold& m, const Point& p, std::span<const double> x,
                                  std::span<const double> y, std::span<const double> z);
// Ric(X) = sum_i R(X, e_i) e_i.
std::vector<double> ricci_apply(const ChartManifold& m, const Point& p, std::span<const double> x);
std::vector<double> gradient(const ChartManifold& m, const ScalarField& f, const Point& p);
Eigen::MatrixXd hessian(const ChartManifold& m, const ScalarField& f, const Point& p);
double laplacian(const ChartManifold& m, const ScalarField& f, const Point& p);
// Columns form a g-orthonormal basis: E = L^{-T} for g = L L^T, optionally rotated.
Eigen::MatrixXd orthonormal_frame(const ChartManifold& m, const Point& p,
                                  const std::optional<Eigen::MatrixXd>& rotation = std::nullopt);
// (nabla_X Y)(p) for a vector field Y given by component expressions.
std::vector<double> covariant_derivative_vf(const ChartManifold& m, const TangentVector& x,
                                            const ExprVec& y);
double inner(const ChartManifold& m, const Point& p, std::span<const double> u, std::span<const double> v);

// Jet-level helpers shared by the higher modules.
Jet inner_jet(const JetMat& g, const JetVec& u, const JetVec& v);
JetVec lower_jet(const JetMat& g, const JetVec& u);
JetVec raise_jet(const JetMat& ginv, const JetVec& w);
JetVec values_as_jets(std::span<const double> v);
std::vector<double> jet_values(const JetVec& v);

// Deterministic random rotation for frame-independence checks.
Eigen::MatrixXd random_rotation(int dim, std::uint64_t seed);

}  // namespace fbh
