#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nck {

// Gauss–Legendre rule mapped to [0, 1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

namespace detail {
template <unsigned N>
Rule unit_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.x.push_back(0.5);
      r.w.push_back(0.5 * wt[i]);
      continue;
    }
    r.x.push_back(0.5 - 0.5 * a[i]);
    r.w.push_back(0.5 * wt[i]);
    r.x.push_back(0.5 + 0.5 * a[i]);
    r.w.push_back(0.5 * wt[i]);
  }
  return r;
}
}  // namespace detail

inline Rule gauss_legendre(int p) {
  switch (p) {
    case 2: return detail::unit_rule<2>();
    case 3: return detail::unit_rule<3>();
    case 4: return detail::unit_rule<4>();
    case 5: return detail::unit_rule<5>();
    case 6: return detail::unit_rule<6>();
    case 7: return detail::unit_rule<7>();
    case 8: return detail::unit_rule<8>();
    case 10: return detail::unit_rule<10>();
    case 15: return detail::unit_rule<15>();
    case 20: return detail::unit_rule<20>();
    default: throw std::invalid_argument("gauss_legendre: unsupported number of points");
  }
}

// Adaptive Gauss–Kronrod on [a, b] after x = a + (b−a)(1−cos θ)/2, which absorbs
// square-root behaviour at both endpoints.
template <class F>
double integrate_cosine_mapped(F&& f, double a, double b, double tol, double* l1 = nullptr) {
  if (!(b > a)) return 0.0;
  const double half = 0.5 * (b - a);
  auto g = [&](double th) {
    const double x = a + half * (1.0 - std::cos(th));
    return f(x) * half * std::sin(th);
  };
  double err = 0.0, L1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(g, 0.0, std::numbers::pi, 8, tol,
                                                                                 &err, &L1);
  if (l1) *l1 = L1;
  return v;
}

}  // namespace nck
