#pragma once

#include <numeric>

#include "contactlab/orbits.hpp"

namespace contactlab {

/// Finite-dimensional family of globally single-valued functions f whose
/// exact differentials df feed the minimax characterization of the critical
/// value. "fourier-t3" uses integer-frequency Fourier modes on the torus;
/// "chart-poly-s3" uses ambient polynomials restricted to the sphere (smooth
/// across both charts by construction).
class FunctionBasis {
 public:
  FunctionBasis(std::string kind, int degree,
                std::shared_ptr<const ContactManifold> manifold)
      : kind_(std::move(kind)), degree_(degree), manifold_(std::move(manifold)) {
    if (kind_ == "fourier-t3") {
      for (int a = -degree_; a <= degree_; ++a)
        for (int b = -degree_; b <= degree_; ++b)
          for (int c = -degree_; c <= degree_; ++c) {
            if (a == 0 && b == 0 && c == 0) continue;
            // canonical representative: first nonzero frequency positive
            if (a < 0 || (a == 0 && (b < 0 || (b == 0 && c < 0)))) continue;
            modes_.push_back(make_vec({double(a), double(b), double(c)}));
          }
      n_coeffs_ = 2 * static_cast<int>(modes_.size());
    } else if (kind_ == "chart-poly-s3") {
      sphere_ = dynamic_cast<const SphereManifold*>(manifold_.get());
      if (sphere_ == nullptr)
        throw config_error("chart-poly-s3 basis requires the s3 catalog "
                           "manifold");
      // ambient monomials x^e, 1 <= |e| <= degree, over (x1, y1, x2, y2)
      std::array<int, 4> e{0, 0, 0, 0};
      enumerate_monomials(e, 0, degree_);
      n_coeffs_ = static_cast<int>(monomials_.size());
    } else {
      throw config_error("unknown function basis kind '" + kind_ + "'");
    }
  }

  const std::string& kind() const { return kind_; }
  int degree() const { return degree_; }
  int n_coeffs() const { return n_coeffs_; }

  /// Rows = per-coefficient gradient covectors d(phi_k) at q (n_coeffs x dim).
  Eigen::MatrixXd mode_gradients(const ChartPoint& q) const {
    const int d = manifold_->dim();
    Eigen::MatrixXd B(n_coeffs_, d);
    if (kind_ == "fourier-t3") {
      for (std::size_t k = 0; k < modes_.size(); ++k) {
        const double w = 2.0 * M_PI * modes_[k].dot(q.coords);
        const Vec mk = 2.0 * M_PI * modes_[k];
        B.row(2 * k) = (-std::sin(w) * mk).transpose();      // cos mode
        B.row(2 * k + 1) = (std::cos(w) * mk).transpose();   // sin mode
      }
    } else {
      const Eigen::Vector4d X = sphere_->embed(q);
      const Eigen::Matrix<double, 4, 3> J = sphere_->embed_jacobian(q);
      for (std::size_t k = 0; k < monomials_.size(); ++k) {
        Eigen::Vector4d grad = Eigen::Vector4d::Zero();
        for (int a = 0; a < 4; ++a) {
          const auto& e = monomials_[k];
          if (e[a] == 0) continue;
          double p = static_cast<double>(e[a]);
          for (int b = 0; b < 4; ++b) {
            int pw = e[b] - (a == b ? 1 : 0);
            for (int r = 0; r < pw; ++r) p *= X[b];
          }
          grad[a] = p;
        }
        B.row(k) = (J.transpose() * grad).transpose();
      }
    }
    return B;
  }

  /// df_q for a coefficient vector.
  Vec gradient(const Eigen::VectorXd& coeffs, const ChartPoint& q) const {
    return (mode_gradients(q).transpose() * coeffs).eval();
  }

 private:
  void enumerate_monomials(std::array<int, 4>& e, int pos, int budget) {
    if (pos == 4) {
      if (budget < degree_) monomials_.push_back(e);  // at least degree 1 used
      return;
    }
    for (int p = 0; p <= budget; ++p) {
      e[pos] = p;
      enumerate_monomials(e, pos + 1, budget - p);
    }
    e[pos] = 0;
  }

  std::string kind_;
  int degree_;
  std::shared_ptr<const ContactManifold> manifold_;
  const SphereManifold* sphere_ = nullptr;
  std::vector<Vec> modes_;                   // fourier-t3
  std::vector<std::array<int, 4>> monomials_;  // chart-poly-s3
  int n_coeffs_ = 0;
};

struct ManeLowerResult {
  double value = -std::numeric_limits<double>::infinity();
  bool has_witness = false;
  int witness_index = -1;
  double quadrature_error = 0.0;
};

/// Each closed loop certifies -S_L(gamma)/T <= c(L); returns the best bound
/// over the family with the maximizing loop as witness. An empty family
/// yields the -inf sentinel.
inline ManeLowerResult mane_lower(const MagneticSystem& sys,
                                  const std::vector<Trajectory>& loops,
                                  double closure_tol = 1e-6) {
  ManeLowerResult res;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const QuadratureResult S = action(sys, loops[i], closure_tol);
    const double T = loops[i].duration();
    const double bound = -S.value / T;
    if (bound > res.value) {
      res.value = bound;
      res.has_witness = true;
      res.witness_index = static_cast<int>(i);
      res.quadrature_error = S.error_estimate / T;
    }
  }
  return res;
}

struct MinimaxOptions {
  std::vector<double> betas{10.0, 100.0, 1000.0};
  int iters_per_beta = 60;
  double step = 0.05;
  int divergence_patience = 10;
};

struct ManeUpperResult {
  double value = 0.0;            // certified hard max on the refined grid
  Eigen::VectorXd coeffs;        // witness coefficients
  double smoothed_final = 0.0;   // last softmax objective value
  std::string disclaimer =
      "upper bound certified only on a finite grid; a rigorous global bound "
      "would need a Lipschitz estimate for H(., df)";
};

namespace detail {

struct GridCache {
  std::vector<Vec> alpha_eff;            // strength * alpha
  std::vector<Mat> ginv;
  std::vector<Eigen::MatrixXd> basis;    // mode gradients per point
};

inline GridCache build_grid_cache(const MagneticSystem& sys,
                                  const FunctionBasis& basis,
                                  const std::vector<ChartPoint>& grid) {
  GridCache c;
  c.alpha_eff.reserve(grid.size());
  c.ginv.reserve(grid.size());
  c.basis.reserve(grid.size());
  for (const ChartPoint& q : grid) {
    c.alpha_eff.push_back(sys.strength * sys.manifold->alpha(q));
    c.ginv.push_back(sys.metric.g_inv(q));
    c.basis.push_back(basis.mode_gradients(q));
  }
  return c;
}

/// Softmax-smoothed max of H over the cached grid plus its coefficient
/// gradient: F_beta = max + log(mean exp(beta (H - max)))/beta.
inline double smoothed_sup(const GridCache& c, const Eigen::VectorXd& coeffs,
                           double beta, Eigen::VectorXd* grad) {
  const std::size_t n = c.alpha_eff.size();
  std::vector<double> H(n);
  std::vector<Vec> gd(grad ? n : 0);
  double hmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec d = c.alpha_eff[i] + c.basis[i].transpose() * coeffs;
    const Vec gid = c.ginv[i] * d;
    H[i] = 0.5 * d.dot(gid);
    if (grad) gd[i] = gid;
    hmax = std::max(hmax, H[i]);
  }
  double Z = 0.0;
  if (grad) grad->setZero(coeffs.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(beta * (H[i] - hmax));
    Z += w;
    if (grad) *grad += w * (c.basis[i] * gd[i]);
  }
  if (grad) *grad /= Z;
  return hmax + std::log(Z / static_cast<double>(n)) / beta;
}

/// Exact maximum of H(q, df_q) over a point set.
inline double hard_max(const MagneticSystem& sys, const FunctionBasis& basis,
                       const Eigen::VectorXd& coeffs,
                       const std::vector<ChartPoint>& pts) {
  double m = -std::numeric_limits<double>::infinity();
  for (const ChartPoint& q : pts)
    m = std::max(m, hamiltonian(sys, q, basis.gradient(coeffs, q)));
  return m;
}

}  // namespace detail

/// Minimizes the softmax-smoothed sup of H(q, df_q) over the grid by gradient
/// descent with beta-continuation, then certifies the reported bound as the
/// hard max on the refined grid. The zero-coefficient candidate is always
/// kept in play, so optimization can never report worse than f = 0.
inline ManeUpperResult mane_upper(const MagneticSystem& sys,
                                  const FunctionBasis& basis,
                                  const std::vector<ChartPoint>& grid,
                                  const std::vector<ChartPoint>& refined_grid,
                                  const MinimaxOptions& opt = {}) {
  if (grid.empty() || refined_grid.empty())
    throw input_error("mane_upper: empty grid");
  const detail::GridCache cache = detail::build_grid_cache(sys, basis, grid);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.n_coeffs());
  Eigen::VectorXd best = c;
  double smoothed = 0.0;

  for (double beta : opt.betas) {
    Eigen::VectorXd grad(basis.n_coeffs());
    double f = detail::smoothed_sup(cache, c, beta, &grad);
    // Objective values at different beta are not comparable, so the
    // divergence tracker is per-beta.
    double best_obj = f;
    best = c;
    int rising = 0;
    for (int it = 0; it < opt.iters_per_beta; ++it) {
      double step = opt.step;
      bool accepted = false;
      for (int bt = 0; bt < 20; ++bt) {
        const Eigen::VectorXd trial = c - step * grad;
        const double ft = detail::smoothed_sup(cache, trial, beta, nullptr);
        if (ft < f) {
          c = trial;
          f = detail::smoothed_sup(cache, c, beta, &grad);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // line search exhausted: converged at this beta
      if (f > best_obj) {
        if (++rising > opt.divergence_patience)
          throw optimization_error("mane_upper: objective rising for " +
                                   std::to_string(rising) +
                                   " consecutive accepted steps");
      } else {
        rising = 0;
        best_obj = f;
        best = c;
      }
    }
    smoothed = f;
  }

  // Certification: true upper bound of the refined-grid maximum. f = 0 is a
  // valid competitor and guards against an optimizer excursion.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(basis.n_coeffs());
  const double at_best = detail::hard_max(sys, basis, best, refined_grid);
  const double at_zero = detail::hard_max(sys, basis, zero, refined_grid);

  ManeUpperResult res;
  res.smoothed_final = smoothed;
  if (at_best <= at_zero) {
    res.value = at_best;
    res.coeffs = best;
  } else {
    res.value = at_zero;
    res.coeffs = zero;
  }
  return res;
}

/// Certified bracket for the critical value.
struct ManeBracket {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  int lower_witness = -1;          // index into the loop family
  Eigen::VectorXd upper_witness;   // basis coefficients
  int grid_resolution = 0;
  std::string disclaimer;
};

/// Runs both characterizations and asserts lower <= upper + 1e-9. A crossed
/// bracket signals an implementation bug (both bounds are rigorous up to
/// quadrature/grid error) and is a hard failure.
inline ManeBracket mane_bracket(const MagneticSystem& sys,
                                const FunctionBasis& basis,
                                const std::vector<Trajectory>& loops,
                                const std::vector<ChartPoint>& grid,
                                const std::vector<ChartPoint>& refined_grid,
                                const MinimaxOptions& opt = {},
                                int grid_resolution = 0) {
  const ManeLowerResult lo = mane_lower(sys, loops);
  const ManeUpperResult hi = mane_upper(sys, basis, grid, refined_grid, opt);
  ManeBracket b;
  b.lower = lo.value;
  b.upper = hi.value;
  b.lower_witness = lo.witness_index;
  b.upper_witness = hi.coeffs;
  b.grid_resolution = grid_resolution;
  b.disclaimer = hi.disclaimer;
  if (!(b.lower <= b.upper + 1e-9))
    throw verification_error(
        "crossed Mane bracket: lower " + std::to_string(b.lower) +
            " > upper " + std::to_string(b.upper),
        b.lower - b.upper);
  return b;
}

// --- loop-family builders ---------------------------------------------------

/// Constant-speed reparametrization of a trajectory: t -> t/s, v -> s v.
inline Trajectory resample_speed(const Trajectory& traj, double s) {
  Trajectory out = traj;
  out.dt = traj.dt / s;
  for (auto& smp : out.samples) {
    smp.t /= s;
    smp.state.v *= s;
  }
  for (auto& ev : out.transitions) ev.t /= s;
  return out;
}

/// Coordinate circle on the torus chart: unit loop along one axis at speed s.
inline Trajectory coordinate_circle(const ChartPoint& base, int axis, double s,
                                    int n_samples = 512) {
  Trajectory traj;
  traj.scheme = "analytic";
  const double period = 1.0 / s;
  traj.dt = period / n_samples;
  const int d = static_cast<int>(base.coords.size());
  for (int i = 0; i <= n_samples; ++i) {
    TrajectorySample smp;
    smp.t = period * i / n_samples;
    smp.state.q = base;
    smp.state.q.coords[axis] =
        std::fmod(base.coords[axis] + s * smp.t, 1.0);
    smp.state.v = Vec::Zero(d);
    smp.state.v[axis] = s;
    traj.samples.push_back(std::move(smp));
  }
  return traj;
}

}  // namespace contactlab
