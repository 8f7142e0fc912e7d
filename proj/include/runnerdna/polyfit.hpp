#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "runnerdna/error.hpp"

namespace runnerdna {

// Least-squares polynomial fit of a series against its sample index.
//
// The abscissa is mapped affinely onto [-1, 1] before building the normal
// equations: polynomials of degree d are closed under affine substitution,
// so the fitted values (and hence the residual RMSE) are unchanged, while
// the Gram matrix stays well conditioned for any series length.
namespace detail {

template <std::size_t N>
inline std::array<double, N> solve_linear(std::array<std::array<double, N>, N> a,
                                          std::array<double, N> b) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-300)
      raise(Errc::SingularFit, "singular normal equations");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

template <std::size_t Terms>
inline std::vector<double> fit_values(std::span<const double> values) {
  const std::size_t n = values.size();
  const double half = static_cast<double>(n - 1) / 2.0;
  auto abscissa = [half](std::size_t i) {
    return (static_cast<double>(i) - half) / (half > 0.0 ? half : 1.0);
  };

  std::array<std::array<double, Terms>, Terms> gram{};
  std::array<double, Terms> rhs{};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = abscissa(i);
    std::array<double, Terms> pw{};
    pw[0] = 1.0;
    for (std::size_t k = 1; k < Terms; ++k) pw[k] = pw[k - 1] * t;
    for (std::size_t r = 0; r < Terms; ++r) {
      for (std::size_t c = 0; c < Terms; ++c) gram[r][c] += pw[r] * pw[c];
      rhs[r] += pw[r] * values[i];
    }
  }
  const std::array<double, Terms> coef = solve_linear<Terms>(gram, rhs);

  std::vector<double> fitted(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = abscissa(i);
    double acc = coef[Terms - 1];
    for (std::size_t k = Terms - 1; k-- > 0;) acc = acc * t + coef[k];
    fitted[i] = acc;
  }
  return fitted;
}

}  // namespace detail

inline std::vector<double> fit_polynomial_values(std::span<const double> values,
                                                 int degree) {
  if (degree != 1 && degree != 3)
    raise(Errc::InvalidArgument, "fit degree must be 1 or 3");
  if (values.size() < static_cast<std::size_t>(degree + 2))
    raise(Errc::TooShort, "need at least degree + 2 samples for a residual fit");
  for (double v : values)
    if (!std::isfinite(v)) raise(Errc::NonFiniteValue, "fit input not finite");
  return degree == 1 ? detail::fit_values<2>(values)
                     : detail::fit_values<4>(values);
}

// sqrt(sum residual^2 / n) of the degree-1 or degree-3 least-squares fit.
inline double fit_polynomial_rmse(std::span<const double> values, int degree) {
  const std::vector<double> fitted = fit_polynomial_values(values, degree);
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = values[i] - fitted[i];
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(values.size()));
}

}  // namespace runnerdna
