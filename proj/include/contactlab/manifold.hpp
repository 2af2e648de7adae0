#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "contactlab/errors.hpp"
#include "contactlab/rng.hpp"
#include "contactlab/types.hpp"

namespace contactlab {

/// A closed contact manifold presented through a chart atlas. Evaluators for
/// the contact form alpha and its exterior derivative dalpha are pure
/// functions of the chart point; concurrent use is safe.
class ContactManifold {
 public:
  virtual ~ContactManifold() = default;

  virtual int dim() const = 0;
  virtual int num_charts() const { return 1; }
  virtual std::string name() const = 0;

  /// Covector components of alpha at q, in chart coordinates.
  virtual Vec alpha(const ChartPoint& q) const = 0;

  /// Matrix D with D(i,j) = dalpha(e_i, e_j). Antisymmetric. The default
  /// falls back to finite differences of alpha with Richardson refinement.
  virtual Mat dalpha(const ChartPoint& q) const;

  /// Canonical chart representative (wraps torus coordinates, switches
  /// stereographic charts when outside the safe region).
  virtual void normalize(ChartPoint& q) const { (void)q; }

  /// Distance from q to the boundary of its chart's validity domain.
  virtual double chart_margin(const ChartPoint& q) const {
    (void)q;
    return std::numeric_limits<double>::infinity();
  }

  virtual bool needs_transition(const ChartPoint& q) const {
    (void)q;
    return false;
  }

  /// Switch q (and optionally a velocity) to the other chart, in place.
  virtual void transition(ChartPoint& q, Vec* v) const {
    (void)q;
    (void)v;
    throw input_error("manifold '" + name() + "' has a single chart");
  }

  /// Re-express a point (and optionally a velocity) in a requested chart.
  virtual ChartPoint to_chart(const ChartPoint& q, int chart_id,
                              Vec* v) const {
    (void)v;
    if (q.chart_id != chart_id)
      throw input_error("chart " + std::to_string(chart_id) +
                        " not available on '" + name() + "'");
    return q;
  }

  /// Wrap-aware coordinate difference a - b within one chart.
  virtual Vec coord_delta(const Vec& a, const Vec& b, int chart_id) const {
    (void)chart_id;
    return a - b;
  }

  /// Optional globally consistent basis of ker(alpha_q) in chart
  /// coordinates. Multi-chart manifolds must supply one: a per-chart basis
  /// would make metrics built from it disagree between charts, breaking
  /// energy conservation across transitions. Empty => the generic
  /// Gram-Schmidt construction is used.
  virtual std::vector<Vec> kernel_frame(const ChartPoint& q) const {
    (void)q;
    return {};
  }
};

/// D(i,j) = d_i alpha_j - d_j alpha_i via central differences; exactly
/// antisymmetric by construction (D - D^T)/2 applied once.
inline Mat eval_dalpha_fd(const ContactManifold& m, const ChartPoint& q,
                          double h) {
  if (!(h > 0.0)) throw input_error("eval_dalpha_fd: step must be positive");
  if (m.chart_margin(q) < 2.0 * h)
    throw std::domain_error("eval_dalpha_fd: step too large for chart margin");
  const int d = m.dim();
  Mat grad(d, d);  // grad(i,j) = d_i alpha_j
  ChartPoint qp = q, qm = q;
  for (int i = 0; i < d; ++i) {
    qp.coords = q.coords;
    qm.coords = q.coords;
    qp.coords[i] += h;
    qm.coords[i] -= h;
    grad.row(i) = ((m.alpha(qp) - m.alpha(qm)) / (2.0 * h)).transpose();
  }
  Mat D = grad - grad.transpose();
  return 0.5 * (D - D.transpose());
}

/// Richardson-refined variant: combines steps h and h/2 for O(h^4) accuracy.
inline Mat eval_dalpha_fd_richardson(const ContactManifold& m,
                                     const ChartPoint& q, double h) {
  const Mat Dh = eval_dalpha_fd(m, q, h);
  const Mat Dh2 = eval_dalpha_fd(m, q, 0.5 * h);
  return (4.0 * Dh2 - Dh) / 3.0;
}

inline Mat ContactManifold::dalpha(const ChartPoint& q) const {
  return eval_dalpha_fd_richardson(*this, q, 1e-4);
}

// ---------------------------------------------------------------------------
// T^3 = (R/Z)^3 with alpha = cos(2 pi z) dx + sin(2 pi z) dy.
// Single chart; coordinates are canonical in [0,1)^3 after normalization and
// every evaluator is 1-periodic, so unnormalized coordinates evaluate
// identically.
// ---------------------------------------------------------------------------
class TorusManifold final : public ContactManifold {
 public:
  int dim() const override { return 3; }
  std::string name() const override { return "t3-standard"; }

  Vec alpha(const ChartPoint& q) const override {
    const double w = 2.0 * M_PI * q.coords[2];
    Vec a(3);
    a << std::cos(w), std::sin(w), 0.0;
    return a;
  }

  Mat dalpha(const ChartPoint& q) const override {
    const double w = 2.0 * M_PI * q.coords[2];
    const double c = 2.0 * M_PI * std::cos(w);
    const double s = 2.0 * M_PI * std::sin(w);
    Mat D = Mat::Zero(3, 3);
    // dalpha = -2 pi sin(2 pi z) dz^dx + 2 pi cos(2 pi z) dz^dy
    D(2, 0) = -s;
    D(0, 2) = s;
    D(2, 1) = c;
    D(1, 2) = -c;
    return D;
  }

  void normalize(ChartPoint& q) const override {
    for (int i = 0; i < 3; ++i) {
      q.coords[i] -= std::floor(q.coords[i]);
      if (q.coords[i] >= 1.0) q.coords[i] = 0.0;  // guard floor(1-eps) case
    }
  }

  Vec coord_delta(const Vec& a, const Vec& b, int) const override {
    Vec d = a - b;
    for (int i = 0; i < 3; ++i) d[i] -= std::round(d[i]);
    return d;
  }
};

// ---------------------------------------------------------------------------
// S^3 as the unit sphere in R^4 with coordinates (x1, y1, x2, y2) and the
// restriction of x1 dy1 - y1 dx1 + x2 dy2 - y2 dx2. Two stereographic charts:
// chart 0 projects from (0,0,0,1), chart 1 from (0,0,0,-1); the transition is
// the sphere inversion u -> u/|u|^2. Forms are pushed to chart coordinates
// analytically through the Jacobian of the inverse projection.
// ---------------------------------------------------------------------------
class SphereManifold final : public ContactManifold {
 public:
  // Charts are valid everywhere except their projection pole; evaluations are
  // restricted to |u| <= kMaxRadius and the integrator switches at kSwitch.
  static constexpr double kSwitchRadius = 2.0;
  static constexpr double kMaxRadius = 4.0;

  int dim() const override { return 3; }
  int num_charts() const override { return 2; }
  std::string name() const override { return "s3-standard"; }

  /// Ambient R^4 point of a chart point.
  Eigen::Vector4d embed(const ChartPoint& q) const {
    const double s = q.coords.squaredNorm();
    const double d = 1.0 + s;
    Eigen::Vector4d X;
    X << 2.0 * q.coords[0] / d, 2.0 * q.coords[1] / d, 2.0 * q.coords[2] / d,
        (q.chart_id == 0 ? (s - 1.0) / d : (1.0 - s) / d);
    return X;
  }

  /// Jacobian of embed, 4x3.
  Eigen::Matrix<double, 4, 3> embed_jacobian(const ChartPoint& q) const {
    const double s = q.coords.squaredNorm();
    const double d = 1.0 + s;
    const double d2 = d * d;
    Eigen::Matrix<double, 4, 3> J;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        J(a, b) = 2.0 * ((a == b ? 1.0 : 0.0) / d -
                         2.0 * q.coords[a] * q.coords[b] / d2);
    for (int b = 0; b < 3; ++b) {
      const double t = 4.0 * q.coords[b] / d2;
      J(3, b) = (q.chart_id == 0 ? t : -t);
    }
    return J;
  }

  /// Chart point of an ambient unit vector; picks the chart in which the
  /// coordinates have norm <= 1.
  ChartPoint from_ambient(const Eigen::Vector4d& X) const {
    ChartPoint q;
    q.chart_id = (X[3] > 0.0) ? 1 : 0;
    const double denom = (q.chart_id == 0) ? (1.0 - X[3]) : (1.0 + X[3]);
    q.coords.resize(3);
    q.coords << X[0] / denom, X[1] / denom, X[2] / denom;
    return q;
  }

  static Eigen::Vector4d ambient_alpha(const Eigen::Vector4d& X) {
    Eigen::Vector4d a;
    a << -X[1], X[0], -X[3], X[2];
    return a;
  }

  static Eigen::Matrix4d ambient_dalpha() {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A(0, 1) = 2.0;
    A(1, 0) = -2.0;
    A(2, 3) = 2.0;
    A(3, 2) = -2.0;
    return A;
  }

  Vec alpha(const ChartPoint& q) const override {
    return (embed_jacobian(q).transpose() * ambient_alpha(embed(q))).eval();
  }

  Mat dalpha(const ChartPoint& q) const override {
    const Eigen::Matrix<double, 4, 3> J = embed_jacobian(q);
    return (J.transpose() * ambient_dalpha() * J).eval();
  }

  double chart_margin(const ChartPoint& q) const override {
    return kMaxRadius - q.coords.norm();
  }

  bool needs_transition(const ChartPoint& q) const override {
    return q.coords.norm() > kSwitchRadius;
  }

  void transition(ChartPoint& q, Vec* v) const override {
    const double s = q.coords.squaredNorm();
    if (s < 1e-24)
      throw degeneracy_error("s3 transition at the projection pole");
    if (v != nullptr) {
      // d(u/|u|^2) = (I - 2 u u^T/|u|^2) / |u|^2
      Vec u = q.coords;
      *v = (*v - (2.0 * u.dot(*v) / s) * u) / s;
    }
    q.coords /= s;
    q.chart_id = 1 - q.chart_id;
  }

  void normalize(ChartPoint& q) const override {
    if (needs_transition(q)) transition(q, nullptr);
  }

  ChartPoint to_chart(const ChartPoint& q, int chart_id,
                      Vec* v) const override {
    ChartPoint out = q;
    if (out.chart_id != chart_id) transition(out, v);
    return out;
  }

  /// Global trivialization of ker(alpha): writing an ambient point as the
  /// unit quaternion p = x1 + i y1 + j x2 + k y2, left multiplication gives
  /// the orthonormal tangent frame (ip, jp, kp). ip is the ambient Reeb
  /// direction, so (jp, kp) spans ker(alpha) at every point, smoothly and
  /// identically in both charts. Chart representatives solve J w = u in the
  /// least-squares sense (u lies in range(J) exactly).
  std::vector<Vec> kernel_frame(const ChartPoint& q) const override {
    const Eigen::Vector4d p = embed(q);
    const Eigen::Matrix<double, 4, 3> J = embed_jacobian(q);
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::LLT<Eigen::Matrix3d> llt(JtJ);
    if (llt.info() != Eigen::Success)
      throw degeneracy_error("s3 chart jacobian is rank-deficient");
    Eigen::Vector4d jp, kp;
    jp << -p[2], p[3], p[0], -p[1];
    kp << -p[3], -p[2], p[1], p[0];
    std::vector<Vec> basis(2);
    basis[0] = llt.solve(J.transpose() * jp);
    basis[1] = llt.solve(J.transpose() * kp);
    return basis;
  }
};

// ---------------------------------------------------------------------------
// Custom contact forms on the torus chart, loaded as coefficient tables.
// Each covector component is a trigonometric polynomial
//   alpha_c(q) = sum_k amp_k * trig_k(2 pi freq_k . q + phase_k),
// which keeps the form globally single-valued on (R/Z)^3. dalpha comes from
// the finite-difference exterior derivative (Richardson refined).
// ---------------------------------------------------------------------------
struct TrigTerm {
  int component = 0;          // which alpha component receives the term
  double amplitude = 0.0;
  bool is_sin = false;        // cos otherwise
  Vec freq;                   // integer frequencies, length dim
  double phase = 0.0;
};

class CustomTorusForm final : public ContactManifold {
 public:
  CustomTorusForm(int dim, std::vector<TrigTerm> terms)
      : dim_(dim), terms_(std::move(terms)) {
    if (dim_ % 2 == 0 || dim_ < 3)
      throw config_error("contact manifold dimension must be odd and >= 3");
  }

  int dim() const override { return dim_; }
  std::string name() const override { return "t3-custom"; }

  Vec alpha(const ChartPoint& q) const override {
    Vec a = Vec::Zero(dim_);
    for (const TrigTerm& t : terms_) {
      const double w = 2.0 * M_PI * t.freq.dot(q.coords) + t.phase;
      a[t.component] += t.amplitude * (t.is_sin ? std::sin(w) : std::cos(w));
    }
    return a;
  }

  void normalize(ChartPoint& q) const override {
    for (int i = 0; i < dim_; ++i) {
      q.coords[i] -= std::floor(q.coords[i]);
      if (q.coords[i] >= 1.0) q.coords[i] = 0.0;
    }
  }

  Vec coord_delta(const Vec& a, const Vec& b, int) const override {
    Vec d = a - b;
    for (int i = 0; i < dim_; ++i) d[i] -= std::round(d[i]);
    return d;
  }

 private:
  int dim_;
  std::vector<TrigTerm> terms_;
};

inline std::shared_ptr<const ContactManifold> make_manifold(
    const std::string& key) {
  if (key == "t3-standard") return std::make_shared<TorusManifold>();
  if (key == "s3-standard") return std::make_shared<SphereManifold>();
  throw config_error("unknown manifold key '" + key + "'");
}

// --- sampling helpers -------------------------------------------------------

/// Regular n^3 grid of canonical torus points.
inline std::vector<ChartPoint> torus_grid(int n) {
  std::vector<ChartPoint> pts;
  pts.reserve(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        pts.push_back(make_point(
            0, {double(i) / n, double(j) / n, double(k) / n}));
  return pts;
}

/// Seeded quasi-random chart points on S^3 (uniform on the sphere, assigned
/// to the chart where the coordinates have norm <= 1).
inline std::vector<ChartPoint> sphere_points(const SphereManifold& s3, int n,
                                             Rng& rng) {
  std::vector<ChartPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector4d X = rng.sphere_point(4).head<4>();
    pts.push_back(s3.from_ambient(X));
  }
  return pts;
}

}  // namespace contactlab
