#pragma once

#include <Eigen/Dense>

namespace contactlab {

// Catalog manifolds are 3-dimensional; the code is dimension-generic up to
// kMaxDim so small fixed-capacity matrices stay on the stack.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                          Eigen::ColMajor, kMaxDim, kMaxDim>;

/// A manifold point expressed in one chart of the atlas.
struct ChartPoint {
  int chart_id = 0;
  Vec coords;
};

/// A point of TM: base point plus chart-coordinate velocity.
struct TangentState {
  ChartPoint q;
  Vec v;
};

inline ChartPoint make_point(int chart_id, std::initializer_list<double> c) {
  ChartPoint p;
  p.chart_id = chart_id;
  p.coords.resize(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (double x : c) p.coords[i++] = x;
  return p;
}

inline Vec make_vec(std::initializer_list<double> c) {
  Vec v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (double x : c) v[i++] = x;
  return v;
}

}  // namespace contactlab
