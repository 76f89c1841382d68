#pragma once

// Complex <-> real isomorphisms that let real-valued crossbars carry
// complex baseband math.
//
//   R(A) = [ Re A  -Im A ]        J(x) = [ Re x ]
//          [ Im A   Re A ]               [ Im x ]
//
// R is an algebra homomorphism (R(AB) = R(A)R(B), R(A^H) = R(A)^T) and
// R(A)J(x) = J(Ax). Every module uses the [Re; Im] stacking order.

#include <Eigen/Dense>
#include <complex>

#include "rrambb/error.hpp"

namespace rrambb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline RealMatrix real_mapping(const ComplexMatrix& a) {
  const Eigen::Index k = a.rows();
  const Eigen::Index l = a.cols();
  RealMatrix r(2 * k, 2 * l);
  r.topLeftCorner(k, l) = a.real();
  r.topRightCorner(k, l) = -a.imag();
  r.bottomLeftCorner(k, l) = a.imag();
  r.bottomRightCorner(k, l) = a.real();
  return r;
}

inline RealVector vector_mapping(const ComplexVector& x) {
  const Eigen::Index k = x.size();
  RealVector v(2 * k);
  v.head(k) = x.real();
  v.tail(k) = x.imag();
  return v;
}

inline ComplexVector inverse_vector_mapping(const RealVector& v) {
  if (!(v.size() % 2 == 0))
    fail(ErrorKind::OddLength, "stacked vector of length " + std::to_string(v.size()) + " is not a [Re; Im] image");
  const Eigen::Index k = v.size() / 2;
  ComplexVector x(k);
  for (Eigen::Index i = 0; i < k; ++i) x(i) = Complex(v(i), v(k + i));
  return x;
}

/// Reads a complex matrix back from the first block column of R(A).
inline ComplexMatrix inverse_real_mapping(const RealMatrix& r) {
  require(r.rows() % 2 == 0 && r.cols() % 2 == 0, ErrorKind::OddLength, "block matrix must have even dimensions");
  const Eigen::Index k = r.rows() / 2;
  const Eigen::Index l = r.cols() / 2;
  ComplexMatrix a(k, l);
  a.real() = r.topLeftCorner(k, l);
  a.imag() = r.bottomLeftCorner(k, l);
  return a;
}

/// Elementwise check of the [[P, -Q], [Q, P]] structure.
inline bool has_block_structure(const RealMatrix& r, double tol = 0.0) {
  if (r.rows() % 2 != 0 || r.cols() % 2 != 0) return false;
  const Eigen::Index k = r.rows() / 2;
  const Eigen::Index l = r.cols() / 2;
  if (k == 0 || l == 0) return true;
  const double d1 = (r.topLeftCorner(k, l) - r.bottomRightCorner(k, l)).cwiseAbs().maxCoeff();
  const double d2 = (r.topRightCorner(k, l) + r.bottomLeftCorner(k, l)).cwiseAbs().maxCoeff();
  return d1 <= tol && d2 <= tol;
}

}  // namespace rrambb
