#include "nck/regularized.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nck/parallel.hpp"

namespace nck {

Cutoff::Cutoff(int n_) : n(n_) {
  if (n < 1) throw std::invalid_argument("cutoff: n must be >= 1");
}

double Cutoff::operator()(double x) const {
  const double dn = n;
  if (x < 0) return 0.0;
  if (x <= 1.0 / dn) return std::sqrt(dn);
  if (x <= dn) return 1.0 / std::sqrt(x);
  if (x < dn + 1.0) return (dn + 1.0 - x) / std::sqrt(dn);
  return 0.0;
}

double Cutoff::sup() const { return std::sqrt(static_cast<double>(n)); }

double Cutoff::integral() const {
  const double dn = n, r = std::sqrt(dn);
  return 1.0 / r + 2.0 * (r - 1.0 / r) + 0.5 / r;
}

double Cutoff::integral_squared() const {
  const double dn = n;
  return 1.0 + 2.0 * std::log(dn) + 1.0 / (3.0 * dn);
}

double cutoff_eval(int n, double x) { return Cutoff(n)(x); }

DensityFn::DensityFn(double dx, std::vector<double> h) : dx_(dx), h_(std::move(h)) {
  if (!(dx_ > 0)) throw std::invalid_argument("DensityFn: dx must be > 0");
  if (h_.size() < 2) throw std::invalid_argument("DensityFn: needs at least two nodes");
  for (double v : h_)
    if (!std::isfinite(v)) throw std::invalid_argument("DensityFn: values must be finite");
}

DensityFn::DensityFn(double dx, std::size_t nodes) : DensityFn(dx, std::vector<double>(nodes, 0.0)) {}

double DensityFn::moment(double alpha) const {
  double s = 0.0;
  if (h_[0] != 0.0) {
    if (alpha == 0.0)
      s += weight(0) * h_[0];
    else if (alpha < 0.0)
      throw std::domain_error("DensityFn::moment: negative moment with mass at the origin node");
  }
  for (std::size_t i = 1; i < h_.size(); ++i)
    if (h_[i] != 0.0) s += weight(i) * std::pow(x(i), alpha) * h_[i];
  return s;
}

double DensityFn::mass_below(double xc) const {
  double s = 0.0;
  for (std::size_t i = 0; i < h_.size() && x(i) < xc; ++i) s += weight(i) * h_[i];
  return s;
}

double DensityFn::moment_from(double xc, double alpha) const {
  double s = 0.0;
  for (std::size_t i = 0; i < h_.size(); ++i) {
    if (x(i) < xc || h_[i] == 0.0) continue;
    if (i == 0) {
      if (alpha == 0.0) s += weight(0) * h_[0];
      else if (alpha < 0.0) throw std::domain_error("DensityFn::moment_from: negative moment at the origin node");
      continue;
    }
    s += weight(i) * std::pow(x(i), alpha) * h_[i];
  }
  return s;
}

double DensityFn::sup_norm() const {
  double s = 0.0;
  for (double v : h_) s = std::max(s, std::abs(v));
  return s;
}

DensityFn DensityFn::from_measure(const RadialMeasure& mu, double dx, std::size_t nodes) {
  DensityFn out(dx, nodes);
  std::vector<double> W(nodes, 0.0);
  const double xmax = dx * static_cast<double>(nodes - 1);
  auto put_point = [&](double x, double w) {
    if (x > xmax) return;
    const double s = x / dx;
    std::size_t i = static_cast<std::size_t>(std::floor(s));
    if (i >= nodes - 1) {
      W[nodes - 1] += w;
      return;
    }
    const double th = s - static_cast<double>(i);
    W[i] += w * (1.0 - th);
    W[i + 1] += w * th;
  };
  put_point(0.0, mu.atom0());
  for (const auto& a : mu.atoms()) put_point(a.x, a.w);
  if (mu.has_density()) {
    const auto& g = *mu.grid();
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const double v = mu.density()[c];
      if (v == 0.0) continue;
      const double a = g.lo(c), b = std::min(g.hi(c), xmax);
      if (!(b > a)) continue;
      std::size_t i = static_cast<std::size_t>(std::floor(a / dx));
      for (; i + 1 < nodes; ++i) {
        const double xl = dx * static_cast<double>(i), xr = xl + dx;
        if (xl >= b) break;
        const double p = std::max(a, xl), q = std::min(b, xr);
        if (!(q > p)) continue;
        const double m0 = v * (q - p);
        const double m1 = v * 0.5 * (q - p) * (q + p);
        const double right = (m1 - xl * m0) / dx;
        W[i] += m0 - right;
        W[i + 1] += right;
      }
    }
  }
  for (std::size_t i = 0; i < nodes; ++i) out[i] = std::max(0.0, W[i]) / out.weight(i);
  return out;
}

RadialMeasure DensityFn::to_measure() const {
  std::vector<double> edges;
  edges.reserve(size() + 1);
  edges.push_back(0.0);
  for (std::size_t i = 0; i < size(); ++i) edges.push_back(x(i) + 0.5 * dx_);
  std::vector<double> d(size());
  for (std::size_t i = 0; i < size(); ++i) d[i] = std::max(0.0, h_[i]);
  return RadialMeasure::density_only(GridSpec::from_edges(std::move(edges)), std::move(d));
}

Operators apply_operators(const DensityFn& h, const Cutoff& phi_n, int threads) {
  const std::size_t M = h.size();
  for (double v : h.values())
    if (v < 0) throw std::domain_error("regularized operators: negative input value");
  // dⱼ = ωⱼ φₙ(xⱼ) hⱼ, nonzero only inside supp φₙ.
  std::vector<double> c(M, 0.0), d(M, 0.0);
  std::size_t J = 0;
  for (std::size_t j = 0; j < M; ++j) {
    const double p = phi_n(h.x(j));
    if (p == 0.0) continue;
    c[j] = p * h[j];
    d[j] = h.weight(j) * c[j];
    if (c[j] != 0.0) J = j + 1;
  }
  Operators op;
  op.K.assign(M, 0.0);
  op.L.assign(M, 0.0);
  op.A.assign(M, 0.0);
  const std::size_t kmax = std::min(M, 2 * J);
  parallel_for(kmax, threads, [&](std::size_t m) {
    double conv = 0.0;
    const std::size_t jlo = m >= J ? m - J + 1 : 0;
    const std::size_t jhi = std::min(m, J - 1);
    for (std::size_t j = jlo; j <= jhi && J > 0; ++j) conv += d[j] * d[m - j];
    double corr = 0.0;
    if (m < J) {
      for (std::size_t k = 0; k + m < J; ++k) corr += d[k + m] * d[k];
      if (m > 0) corr *= 2.0;
    }
    op.K[m] = (conv + corr) / h.weight(m);
  });
  // Suffix sums for L, prefix sums for A.
  double suffix = 0.0;  // Σ_{j>m} ω_j c_j
  for (std::size_t m = M; m-- > 0;) {
    if (m == 0)
      op.L[0] = 2.0 * suffix;
    else
      op.L[m] = 2.0 * (0.5 * d[m] + suffix);
    suffix += d[m];
  }
  double prefix = 0.0;  // Σ_{k<m} ω_k c_k
  for (std::size_t m = 0; m < M; ++m) {
    const double p = phi_n(h.x(m));
    op.A[m] = p == 0.0 ? 0.0 : p * (h.x(m) + 4.0 * prefix + 2.0 * d[m]);
    prefix += d[m];
  }
  return op;
}

DensityFn k_n(const DensityFn& h, int n, int threads) {
  return DensityFn(h.dx(), apply_operators(h, Cutoff(n), threads).K);
}

DensityFn l_n(const DensityFn& h, int n, int threads) {
  return DensityFn(h.dx(), apply_operators(h, Cutoff(n), threads).L);
}

DensityFn a_n(const DensityFn& h, int n, int threads) {
  return DensityFn(h.dx(), apply_operators(h, Cutoff(n), threads).A);
}

std::vector<double> j3n(const DensityFn& h, int n, int threads) {
  const Operators op = apply_operators(h, Cutoff(n), threads);
  std::vector<double> J(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) J[i] = op.K[i] + op.L[i] - h[i] * op.A[i];
  return J;
}

double q3n_tilde(const TestFunction& phi, const DensityFn& h, int n, int threads) {
  const Cutoff cut(n);
  const std::size_t M = h.size();
  std::vector<double> d(M, 0.0), ph(M);
  for (std::size_t j = 0; j < M; ++j) {
    d[j] = h.weight(j) * cut(h.x(j)) * h[j];
    ph[j] = phi(h.x(j));
  }
  std::vector<double> rows(M, 0.0);
  parallel_for(M, threads, [&](std::size_t j) {
    if (d[j] == 0.0) return;
    const double xj = h.x(j);
    double s = d[j] * (phi(2.0 * xj) + phi(0.0) - 2.0 * ph[j]);
    for (std::size_t k = 0; k < j; ++k) {
      if (d[k] == 0.0) continue;
      const double xk = h.x(k);
      s += 2.0 * d[k] * (phi(xj + xk) + phi(xj - xk) - 2.0 * ph[j]);
    }
    rows[j] = d[j] * s - d[j] * ell_kernel(phi, xj);
  });
  return pairwise_sum(rows);
}

double lattice_pairing(const TestFunction& phi, const DensityFn& lattice, const std::vector<double>& g) {
  std::vector<double> t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t[i] = lattice.weight(i) * phi(lattice.x(i)) * g[i];
  return pairwise_sum(t);
}

double regularized_halfmoment(const DensityFn& h, const Cutoff& phi_n) {
  double s = 0.0;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double x = h.x(i);
    if (x >= phi_n.support()) break;
    s += h.weight(i) * x * phi_n(x) * h[i];
  }
  return s;
}

}  // namespace nck
