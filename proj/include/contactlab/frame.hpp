#pragma once

#include <vector>

#include "contactlab/manifold.hpp"

namespace contactlab {

/// Reeb vector plus an ordered basis of ker(alpha_q).
struct ContactFrame {
  Vec reeb;
  std::vector<Vec> xi_basis;

  /// Columns (reeb, xi_basis...).
  Mat matrix() const {
    const int d = static_cast<int>(reeb.size());
    Mat F(d, d);
    F.col(0) = reeb;
    for (int i = 0; i < d - 1; ++i) F.col(i + 1) = xi_basis[i];
    return F;
  }
};

/// Solves the stacked system [alpha ; dalpha(., .)] R = (1, 0, ..., 0):
/// alpha_q(R) = 1 and dalpha_q(R, .) = 0. Throws degeneracy_error when the
/// contact condition fails numerically (rank-deficient stack or residual
/// above residual_tol).
inline Vec reeb_vector(const ContactManifold& m, const ChartPoint& q,
                       double residual_tol = 1e-10) {
  const int d = m.dim();
  const Vec a = m.alpha(q);
  const Mat D = m.dalpha(q);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                kMaxDim + 1, kMaxDim>
      S(d + 1, d);
  S.row(0) = a.transpose();
  // dalpha(R, e_j) = sum_i R_i D(i,j) = (D^T R)_j
  S.bottomRows(d) = D.transpose();
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1> rhs =
      decltype(rhs)::Zero(d + 1);
  rhs[0] = 1.0;

  Eigen::ColPivHouseholderQR<decltype(S)> qr(S);
  if (qr.rank() < d)
    throw degeneracy_error("contact condition violated: stacked system is "
                           "rank-deficient at the sampled point");
  const Vec R = qr.solve(rhs);
  const double res = (S * R - rhs).template lpNorm<Eigen::Infinity>();
  if (!(res < residual_tol))
    throw degeneracy_error("Reeb stacked-system residual " +
                           std::to_string(res) + " exceeds tolerance");
  return R;
}

namespace detail {

/// Deterministic sign rule: leading component of magnitude > tol is positive.
inline void fix_sign(Vec& v, double tol = 1e-10) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace detail

/// Deterministic kernel extraction: Gram-Schmidt of the Euclidean-orthogonal
/// complement of alpha_q over the standard basis vectors in order, each
/// accepted vector sign-fixed by its leading nonzero component.
inline ContactFrame contact_frame(const ContactManifold& m,
                                  const ChartPoint& q) {
  const int d = m.dim();
  ContactFrame frame;
  frame.reeb = reeb_vector(m, q);
  if (auto supplied = m.kernel_frame(q); !supplied.empty()) {
    if (static_cast<int>(supplied.size()) != d - 1)
      throw degeneracy_error("manifold-supplied kernel frame has wrong size");
    frame.xi_basis = std::move(supplied);
    const Mat F = frame.matrix();
    if (std::abs(F.determinant()) < 1e-12)
      throw degeneracy_error("frame vectors are linearly dependent");
    return frame;
  }
  const Vec a = m.alpha(q);
  const double an = a.norm();
  if (!(an > 1e-14))
    throw degeneracy_error("alpha vanishes at the sampled point");
  const Vec ahat = a / an;

  frame.xi_basis.reserve(d - 1);
  for (int i = 0; i < d && static_cast<int>(frame.xi_basis.size()) < d - 1;
       ++i) {
    Vec w = Vec::Zero(d);
    w[i] = 1.0;
    // Two projection passes: a single pass loses orthogonality to roundoff
    // when the surviving component is small (candidate nearly parallel to
    // the span), which would poison finite differences of the metric.
    for (int pass = 0; pass < 2; ++pass) {
      w -= w.dot(ahat) * ahat;
      for (const Vec& b : frame.xi_basis) w -= w.dot(b) * b;
    }
    const double n = w.norm();
    if (n > 1e-8) {
      w /= n;
      detail::fix_sign(w);
      frame.xi_basis.push_back(w);
    }
  }
  if (static_cast<int>(frame.xi_basis.size()) != d - 1)
    throw degeneracy_error("kernel extraction failed to produce a basis");

  const Mat F = frame.matrix();
  if (std::abs(F.determinant()) < 1e-12)
    throw degeneracy_error("frame vectors are linearly dependent");
  return frame;
}

}  // namespace contactlab
