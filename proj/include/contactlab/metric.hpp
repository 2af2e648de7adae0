#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "contactlab/frame.hpp"

namespace contactlab {

/// Bundle metric on the contact distribution: SPD coefficient matrix of size
/// (dim-1)^2, expressed in the deterministic ContactFrame's xi_basis.
struct BundleMetric {
  std::function<Mat(const ChartPoint&)> coeff;
  std::string desc = "identity";
};

inline BundleMetric bundle_identity(int fiber_dim) {
  BundleMetric bm;
  bm.coeff = [fiber_dim](const ChartPoint&) {
    return Mat(Mat::Identity(fiber_dim, fiber_dim));
  };
  bm.desc = "identity";
  return bm;
}

inline BundleMetric bundle_constant(const Mat& c, std::string desc) {
  BundleMetric bm;
  bm.coeff = [c](const ChartPoint&) { return c; };
  bm.desc = std::move(desc);
  return bm;
}

/// Diagonal bundle metric with entries b_i(q) = c0_i + amp_i cos(2 pi f_i z),
/// z the last chart coordinate. Truncated-Fourier slice used on T^3.
struct FourierDiagTerm {
  double c0 = 1.0;
  double amp = 0.0;
  double freq = 1.0;
  double phase = 0.0;
};

inline BundleMetric bundle_fourier_z(const std::vector<FourierDiagTerm>& terms,
                                     std::string desc = "fourier-z") {
  BundleMetric bm;
  bm.coeff = [terms](const ChartPoint& q) {
    const int n = static_cast<int>(terms.size());
    const double z = q.coords[q.coords.size() - 1];
    Mat c = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      c(i, i) = terms[i].c0 + terms[i].amp * std::cos(2.0 * M_PI *
                                                          terms[i].freq * z +
                                                      terms[i].phase);
    return c;
  };
  bm.desc = std::move(desc);
  return bm;
}

/// Riemannian metric as chart-coordinate matrix evaluators.
class MetricField {
 public:
  using Fn = std::function<Mat(const ChartPoint&)>;
  using MarginFn = std::function<double(const ChartPoint&)>;

  MetricField() = default;
  MetricField(Fn g, std::string provenance, MarginFn margin = {})
      : g_fn_(std::move(g)),
        provenance_(std::move(provenance)),
        margin_(std::move(margin)) {}

  Mat g(const ChartPoint& q) const {
    if (constant_ && q.chart_id == 0) return g0_;
    return g_fn_(q);
  }
  Mat g_inv(const ChartPoint& q) const { return g(q).inverse(); }
  const std::string& provenance() const { return provenance_; }

  double chart_margin(const ChartPoint& q) const {
    return margin_ ? margin_(q) : std::numeric_limits<double>::infinity();
  }

  /// True when the chart-0 coefficient matrix is position-independent, so
  /// every Christoffel symbol vanishes and the geodesic term can be skipped.
  bool constant_on_chart(int chart_id) const {
    return constant_ && chart_id == 0;
  }
  void mark_constant(const Mat& g0) {
    constant_ = true;
    g0_ = g0;
  }

 private:
  Fn g_fn_;
  std::string provenance_ = "custom";
  MarginFn margin_;
  bool constant_ = false;
  Mat g0_;
};

namespace detail {

inline void check_bundle_spd(const Mat& c) {
  if ((c - c.transpose()).lpNorm<Eigen::Infinity>() > 1e-12)
    throw input_error("bundle metric coefficient matrix is not symmetric");
  Eigen::LLT<Mat> llt(c);
  if (llt.info() != Eigen::Success)
    throw input_error("bundle metric coefficient matrix is not positive "
                      "definite");
}

/// g = F^{-T} G_frame F^{-1} for the frame matrix F = (R | xi_basis).
inline Mat conjugate_to_chart(const Mat& F, const Mat& g_frame) {
  Eigen::PartialPivLU<Mat> lu(F);
  if (std::abs(lu.determinant()) < 1e-12)
    throw degeneracy_error("frame matrix singular while extending metric");
  const Mat Fi = lu.inverse();
  return Fi.transpose() * g_frame * Fi;
}

}  // namespace detail

/// Extends a bundle metric on ker(alpha) to the unique metric with
/// g(R,R) = 1 and R orthogonal to ker(alpha): block diag(1, bm) in the
/// contact frame, conjugated to chart coordinates.
inline MetricField extend_metric(
    std::shared_ptr<const ContactManifold> manifold, BundleMetric bm) {
  auto m = std::move(manifold);
  auto coeff = std::move(bm.coeff);
  const int d = m->dim();
  MetricField::Fn g_fn = [m, coeff, d](const ChartPoint& q) {
    const ContactFrame frame = contact_frame(*m, q);
    const Mat c = coeff(q);
    detail::check_bundle_spd(c);
    Mat g_frame = Mat::Zero(d, d);
    g_frame(0, 0) = 1.0;
    g_frame.bottomRightCorner(d - 1, d - 1) = c;
    return detail::conjugate_to_chart(frame.matrix(), g_frame);
  };
  MetricField::MarginFn margin = [m](const ChartPoint& q) {
    return m->chart_margin(q);
  };
  MetricField field(std::move(g_fn), "class-G", std::move(margin));
  // Constancy probe: when the extended metric is position-independent on
  // chart 0 (e.g. the identity bundle over the standard torus form, whose
  // contact frame is orthonormal everywhere), record that so the geodesic
  // term can short-circuit. Scattered probe points avoid symmetry accidents.
  static const double kProbe[][3] = {
      {0.137, 0.311, 0.057}, {0.723, 0.089, 0.419}, {0.271, 0.618, 0.333},
      {0.911, 0.447, 0.762}, {0.059, 0.853, 0.541}, {0.487, 0.229, 0.977},
      {0.613, 0.701, 0.149}, {0.349, 0.941, 0.683}};
  if (d == 3) {
    const Mat g0 = field.g(make_point(0, {kProbe[0][0], kProbe[0][1],
                                          kProbe[0][2]}));
    bool flat = true;
    for (int i = 1; i < 8 && flat; ++i) {
      const Mat gi = field.g(
          make_point(0, {kProbe[i][0], kProbe[i][1], kProbe[i][2]}));
      flat = (gi - g0).lpNorm<Eigen::Infinity>() < 1e-13;
    }
    if (flat) field.mark_constant(g0);
  }
  return field;
}

/// Documented non-class-G negative control: the class-G frame block picks up
/// a cross term g(R, xi_1) = amp * sin(2 pi z), z the last chart coordinate,
/// tilting R against the kernel direction that d_z R points along. Stays SPD
/// for amp^2 < min eigenvalue of the bundle block.
inline MetricField perturbed_metric(
    std::shared_ptr<const ContactManifold> manifold, BundleMetric bm,
    double amp = 0.3) {
  auto m = std::move(manifold);
  auto coeff = std::move(bm.coeff);
  const int d = m->dim();
  MetricField::Fn g_fn = [m, coeff, d, amp](const ChartPoint& q) {
    const ContactFrame frame = contact_frame(*m, q);
    const Mat c = coeff(q);
    detail::check_bundle_spd(c);
    Mat g_frame = Mat::Zero(d, d);
    g_frame(0, 0) = 1.0;
    g_frame.bottomRightCorner(d - 1, d - 1) = c;
    const double cross =
        amp * std::sin(2.0 * M_PI * q.coords[q.coords.size() - 1]);
    g_frame(0, 1) = cross;
    g_frame(1, 0) = cross;
    return detail::conjugate_to_chart(frame.matrix(), g_frame);
  };
  MetricField::MarginFn margin = [m](const ChartPoint& q) {
    return m->chart_margin(q);
  };
  return MetricField(std::move(g_fn), "custom", std::move(margin));
}

inline MetricField constant_metric(const Mat& g0) {
  return MetricField([g0](const ChartPoint&) { return g0; }, "custom");
}

/// Gamma^k_ij, symmetric in the lower indices by construction.
struct ChristoffelTensor {
  int dim = 0;
  std::vector<Mat> gamma;  // gamma[k](i,j)

  double operator()(int k, int i, int j) const { return gamma[k](i, j); }
};

namespace detail {

/// dg[i] = derivative of g along coordinate i by the fourth-order central
/// stencil (g(-2h) - 8 g(-h) + 8 g(h) - g(2h)) / (12 h). The wider stencil
/// keeps the noise floor of the frame/solve pipeline (~1e-12 per evaluation)
/// from dominating at a usable step size.
inline void metric_derivatives(const MetricField& metric, const ChartPoint& q,
                               double h, std::vector<Mat>& dg) {
  if (metric.chart_margin(q) < 3.0 * h)
    throw std::domain_error("christoffel: point too close to chart boundary");
  const int d = static_cast<int>(q.coords.size());
  dg.resize(d);
  ChartPoint qs = q;
  for (int i = 0; i < d; ++i) {
    const double qi = q.coords[i];
    qs.coords = q.coords;
    qs.coords[i] = qi - 2.0 * h;
    Mat acc = metric.g(qs);
    qs.coords[i] = qi - h;
    acc -= 8.0 * metric.g(qs);
    qs.coords[i] = qi + h;
    acc += 8.0 * metric.g(qs);
    qs.coords[i] = qi + 2.0 * h;
    acc -= metric.g(qs);
    dg[i] = acc / (12.0 * h);
  }
}

}  // namespace detail

inline constexpr double kDefaultFdStep = 1e-3;

inline ChristoffelTensor christoffel(const MetricField& metric,
                                     const ChartPoint& q,
                                     double h = kDefaultFdStep) {
  const int d = static_cast<int>(q.coords.size());
  if (metric.constant_on_chart(q.chart_id)) {
    ChristoffelTensor G;
    G.dim = d;
    G.gamma.assign(d, Mat::Zero(d, d));
    return G;
  }
  std::vector<Mat> dg;
  detail::metric_derivatives(metric, q, h, dg);
  const Mat ginv = metric.g_inv(q);
  ChristoffelTensor G;
  G.dim = d;
  G.gamma.assign(d, Mat::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        G.gamma[k](i, j) = 0.5 * s;
        G.gamma[k](j, i) = G.gamma[k](i, j);
      }
  return G;
}

/// Gamma^k_ij v^i v^j contracted directly; the hot path of the geodesic
/// right-hand side, avoiding assembly of the full tensor.
inline Vec christoffel_quadratic(const MetricField& metric, const ChartPoint& q,
                                 const Vec& v, double h = kDefaultFdStep) {
  const int d = static_cast<int>(q.coords.size());
  if (metric.constant_on_chart(q.chart_id)) return Vec(Vec::Zero(d));
  std::vector<Mat> dg;
  detail::metric_derivatives(metric, q, h, dg);
  // Gamma(v,v)_k = g^{kl} ( w_l - u_l / 2 ),
  // w = sum_i v_i dg[i] v,  u_l = v^T dg[l] v
  Vec w = Vec::Zero(d), u(d);
  for (int i = 0; i < d; ++i) {
    const Vec dgi_v = dg[i] * v;
    w += v[i] * dgi_v;
    u[i] = v.dot(dgi_v);
  }
  return metric.g(q).ldlt().solve(w - 0.5 * u);
}

/// sqrt(p . g_inv . p).
inline double covector_norm(const MetricField& metric, const ChartPoint& q,
                            const Vec& p) {
  return std::sqrt(p.dot(metric.g_inv(q) * p));
}

}  // namespace contactlab
