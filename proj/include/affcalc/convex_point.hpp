#ifndef AFFCALC_CONVEX_POINT_HPP
#define AFFCALC_CONVEX_POINT_HPP

#include <concepts>

#include <Eigen/Dense>

#include "affcalc/measures.hpp"

namespace affcalc {

// Mixture operation (1 - t) x + t y on the convex sets the derivative engine
// works over: scalars, small Euclidean vectors and probability measures.

inline double mix_points(double x, double y, double t) { return (1.0 - t) * x + t * y; }

template <typename Derived>
typename Derived::PlainObject mix_points(const Eigen::MatrixBase<Derived>& x,
                                         const Eigen::MatrixBase<Derived>& y, double t) {
  return ((1.0 - t) * x + t * y).eval();
}

inline DiscreteMeasure mix_points(const DiscreteMeasure& x, const DiscreteMeasure& y,
                                  double t) {
  return mix(x, y, t);
}

template <typename P>
concept ConvexPoint = std::copy_constructible<P> && requires(const P& a, const P& b, double t) {
  { mix_points(a, b, t) } -> std::convertible_to<P>;
};

}  // namespace affcalc

#endif  // AFFCALC_CONVEX_POINT_HPP
