#include "nck/weakops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nck/parallel.hpp"
#include "nck/quadrature.hpp"

namespace nck {

namespace {

void require_no_atom0(const RadialMeasure& g, const char* who) {
  if (g.atom0() != 0.0) throw std::invalid_argument(std::string(who) + ": measure must not carry an atom at 0");
}

struct Acc {
  double v = 0.0;
  double a = 0.0;
  void add(double value, double scale) {
    v += value;
    a += scale;
  }
};

// Λ(φ)(x, y) for x ≤ y together with its absolute scale.
inline void lambda_ordered(const TestFunction& phi, double lo, double hi, double phi_hi, double weight, Acc& acc) {
  const double p = phi(hi + lo), q = phi(hi - lo);
  acc.add(weight * (p + q - 2.0 * phi_hi), std::abs(weight) * (std::abs(p) + std::abs(q) + 2.0 * std::abs(phi_hi)));
}

struct CellNodes {
  std::vector<double> x;    // node positions in x
  std::vector<double> wu;   // weights in u = √x
  std::vector<double> phx;  // φ(x) at the nodes
};

// Tensor Gauss nodes per cell in u = √x.
CellNodes cell_nodes(const TestFunction& phi, const GridSpec& grid, const Rule& r) {
  CellNodes c;
  const std::size_t p = r.x.size();
  c.x.resize(grid.cells() * p);
  c.wu.resize(grid.cells() * p);
  c.phx.resize(grid.cells() * p);
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    const double u0 = std::sqrt(grid.lo(i)), u1 = std::sqrt(grid.hi(i));
    for (std::size_t k = 0; k < p; ++k) {
      const double u = u0 + (u1 - u0) * r.x[k];
      c.x[i * p + k] = u * u;
      c.wu[i * p + k] = (u1 - u0) * r.w[k];
      c.phx[i * p + k] = phi(u * u);
    }
  }
  return c;
}

Acc quadratic_atomic(const TestFunction& phi, const std::vector<Atom>& atoms, int threads) {
  const std::size_t m = atoms.size();
  std::vector<double> rv(m), ra(m);
  parallel_for(m, threads, [&](std::size_t i) {
    Acc acc;
    const double xi = atoms[i].x;
    lambda_ordered(phi, xi, xi, phi(xi), atoms[i].w * atoms[i].w / xi, acc);
    for (std::size_t j = i + 1; j < m; ++j) {
      const double xj = atoms[j].x;
      lambda_ordered(phi, xi, xj, phi(xj), 2.0 * atoms[i].w * atoms[j].w / std::sqrt(xi * xj), acc);
    }
    rv[i] = acc.v;
    ra[i] = acc.a;
  });
  return {pairwise_sum(rv), pairwise_sum(ra)};
}

Acc quadratic_density(const TestFunction& phi, const GridSpec& grid, const std::vector<double>& dens,
                      const QuadOptions& opt) {
  const Rule r = gauss_legendre(opt.gauss_points);
  const std::size_t p = r.x.size();
  const CellNodes c = cell_nodes(phi, grid, r);
  const std::size_t n = grid.cells();
  std::vector<double> rv(n), ra(n);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    Acc acc;
    const double vi = dens[i];
    if (vi == 0.0) {
      rv[i] = ra[i] = 0.0;
      return;
    }
    // Diagonal cell: two mirrored triangles u < v, Duffy-mapped.
    {
      const double u0 = std::sqrt(grid.lo(i)), L = std::sqrt(grid.hi(i)) - u0;
      Acc tri;
      for (std::size_t a = 0; a < p; ++a) {
        const double v = u0 + L * r.x[a];
        const double yv = v * v, ph = phi(yv);
        for (std::size_t b = 0; b < p; ++b) {
          const double u = u0 + (v - u0) * r.x[b];
          lambda_ordered(phi, u * u, yv, ph, r.w[a] * r.w[b] * L * (v - u0), tri);
        }
      }
      acc.add(8.0 * vi * vi * tri.v, 8.0 * vi * vi * tri.a);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const double vj = dens[j];
      if (vj == 0.0) continue;
      Acc blk;
      for (std::size_t b = 0; b < p; ++b) {
        const double y = c.x[j * p + b], py = c.phx[j * p + b], wy = c.wu[j * p + b];
        for (std::size_t a = 0; a < p; ++a) lambda_ordered(phi, c.x[i * p + a], y, py, c.wu[i * p + a] * wy, blk);
      }
      acc.add(8.0 * vi * vj * blk.v, 8.0 * vi * vj * blk.a);
    }
    rv[i] = acc.v;
    ra[i] = acc.a;
  });
  return {pairwise_sum(rv), pairwise_sum(ra)};
}

Acc quadratic_cross(const TestFunction& phi, const std::vector<Atom>& atoms, const GridSpec& grid,
                    const std::vector<double>& dens, const QuadOptions& opt) {
  const Rule r = gauss_legendre(opt.gauss_points);
  const std::size_t m = atoms.size();
  std::vector<double> rv(m), ra(m);
  parallel_for(m, opt.threads, [&](std::size_t k) {
    const double xa = atoms[k].x, wa = atoms[k].w, ua = std::sqrt(xa), pa = phi(xa);
    Acc acc;
    auto piece = [&](double u0, double u1, double coeff) {
      for (std::size_t q = 0; q < r.x.size(); ++q) {
        const double u = u0 + (u1 - u0) * r.x[q], y = u * u;
        const double wq = coeff * (u1 - u0) * r.w[q];
        if (y <= xa)
          lambda_ordered(phi, y, xa, pa, wq, acc);
        else
          lambda_ordered(phi, xa, y, phi(y), wq, acc);
      }
    };
    for (std::size_t j = 0; j < grid.cells(); ++j) {
      if (dens[j] == 0.0) continue;
      const double u0 = std::sqrt(grid.lo(j)), u1 = std::sqrt(grid.hi(j));
      const double coeff = 4.0 * wa * dens[j] / ua;
      if (ua > u0 && ua < u1) {
        piece(u0, ua, coeff);
        piece(ua, u1, coeff);
      } else {
        piece(u0, u1, coeff);
      }
    }
    rv[k] = acc.v;
    ra[k] = acc.a;
  });
  return {pairwise_sum(rv), pairwise_sum(ra)};
}

template <class Kernel>
FunctionalResult linear_functional(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt,
                                   Kernel&& kernel) {
  FunctionalResult res;
  Acc at;
  for (const auto& a : g.atoms()) {
    const double k = kernel(a.x);
    const double s = a.x * (std::abs(phi(0.0)) + std::abs(phi(a.x))) + 2.0 * std::abs(phi.antiderivative(a.x));
    at.add(a.w * k / std::sqrt(a.x), a.w * s / std::sqrt(a.x));
  }
  Acc de;
  if (g.has_density()) {
    const Rule r = gauss_legendre(opt.linear_gauss_points);
    const auto& grid = *g.grid();
    std::vector<double> rv(grid.cells()), ra(grid.cells());
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      const double v = g.density()[i];
      rv[i] = ra[i] = 0.0;
      if (v == 0.0) continue;
      const double u0 = std::sqrt(grid.lo(i)), u1 = std::sqrt(grid.hi(i));
      for (std::size_t q = 0; q < r.x.size(); ++q) {
        const double u = u0 + (u1 - u0) * r.x[q], x = u * u;
        const double wq = 2.0 * v * (u1 - u0) * r.w[q];
        const double s = x * (std::abs(phi(0.0)) + std::abs(phi(x))) + 2.0 * std::abs(phi.antiderivative(x));
        rv[i] += wq * kernel(x);
        ra[i] += wq * s;
      }
    }
    de = {pairwise_sum(rv), pairwise_sum(ra)};
  }
  res.atomic = at.v;
  res.density = de.v;
  res.value = at.v + de.v;
  res.abs_scale = at.a + de.a;
  return res;
}

}  // namespace

FunctionalResult q3_quadratic(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt) {
  require_no_atom0(g, "q3_quadratic");
  FunctionalResult res;
  const Acc at = quadratic_atomic(phi, g.atoms(), opt.threads);
  Acc de, cr;
  if (g.has_density()) {
    de = quadratic_density(phi, *g.grid(), g.density(), opt);
    if (!g.atoms().empty()) cr = quadratic_cross(phi, g.atoms(), *g.grid(), g.density(), opt);
  }
  res.atomic = at.v;
  res.density = de.v;
  res.cross = cr.v;
  res.value = at.v + de.v + cr.v;
  res.abs_scale = at.a + de.a + cr.a;
  return res;
}

FunctionalResult q3_linear(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt) {
  require_no_atom0(g, "q3_linear");
  return linear_functional(phi, g, opt, [&](double x) { return ell0_kernel(phi, x); });
}

FunctionalResult q3_linear_tilde(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt) {
  require_no_atom0(g, "q3_linear_tilde");
  return linear_functional(phi, g, opt, [&](double x) { return ell_kernel(phi, x); });
}

namespace {
FunctionalResult difference(const FunctionalResult& a, const FunctionalResult& b) {
  FunctionalResult r;
  r.value = a.value - b.value;
  r.abs_scale = a.abs_scale + b.abs_scale;
  r.atomic = a.atomic - b.atomic;
  r.density = a.density - b.density;
  r.cross = a.cross - b.cross;
  return r;
}
}  // namespace

FunctionalResult q3(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt) {
  const FunctionalResult r = difference(q3_quadratic(phi, g, opt), q3_linear(phi, g, opt));
#ifndef NDEBUG
  if (q3_identity_residual(phi, g, opt) > 1e-12) throw std::logic_error("q3: identity with q3_tilde violated");
#endif
  return r;
}

FunctionalResult q3_tilde(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt) {
  return difference(q3_quadratic(phi, g, opt), q3_linear_tilde(phi, g, opt));
}

double q3_identity_residual(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt) {
  const FunctionalResult quad = q3_quadratic(phi, g, opt);
  const FunctionalResult lin = q3_linear(phi, g, opt);
  const FunctionalResult lint = q3_linear_tilde(phi, g, opt);
  const double half = moment(g, 0.5);
  const double a = quad.value - lin.value;
  const double b = quad.value - lint.value - phi(0.0) * half;
  const double scale = quad.abs_scale + lin.abs_scale + lint.abs_scale + std::abs(phi(0.0)) * half;
  return scale > 0 ? std::abs(a - b) / scale : std::abs(a - b);
}

double weight_W(double x1, double x2, double x3) {
  if (x1 > 0 && x2 > 0 && x3 > 0) {
    const double x4 = x1 + x2 - x3;
    if (x4 <= 0) return 0.0;
    const double w = std::sqrt(std::min({x1, x2, x3, x4}));
    return w / std::sqrt(x1 * x2 * x3);
  }
  if (x3 == 0 && x1 > 0 && x2 > 0) return 1.0 / std::sqrt(x1 * x2);
  if (x2 == 0 && x1 > x3 && x3 > 0) return 1.0 / std::sqrt(x1 * x3);
  if (x1 == 0 && x2 > x3 && x3 > 0) return 1.0 / std::sqrt(x2 * x3);
  return 0.0;
}

double phi_capital(const TestFunction& phi, double x1, double x2, double x3) {
  const double W = weight_W(x1, x2, x3);
  return W == 0.0 ? 0.0 : W * delta_phi(phi, x1, x2, x3);
}

namespace {

// ∫₀^∞ √x₃ Φ_φ(x1, x2, x3) dx₃; the integrand vanishes beyond x1 + x2.
Acc quadratic_x3(const TestFunction& phi, double x1, double x2, double tol) {
  Acc acc;
  if (x1 == 0 && x2 == 0) return acc;
  const double top = x1 + x2;
  std::vector<double> br = {0.0, top, x1, x2, 0.5 * top};
  for (double k : phi.kinks) {
    br.push_back(k);
    br.push_back(top - k);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::remove_if(br.begin(), br.end(), [&](double b) { return b < 0 || b > top; }), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  auto f = [&](double x3) {
    if (x3 <= 0 || x3 >= top) return 0.0;
    return std::sqrt(x3) * phi_capital(phi, x1, x2, x3);
  };
  auto fa = [&](double x3) {
    if (x3 <= 0 || x3 >= top) return 0.0;
    const double W = std::sqrt(x3) * weight_W(x1, x2, x3);
    const double x4 = std::max(0.0, x1 + x2 - x3);
    return W * (std::abs(phi(x4)) + std::abs(phi(x3)) + std::abs(phi(x2)) + std::abs(phi(x1)));
  };
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double a = br[i], b = br[i + 1];
    if (!(b > a)) continue;
    acc.add(integrate_cosine_mapped(f, a, b, tol), integrate_cosine_mapped(fa, a, b, 1e-8));
  }
  return acc;
}

FunctionalResult q4_atomic(const TestFunction& phi, const std::vector<Atom>& atoms, const QuadOptions& opt) {
  const std::size_t m = atoms.size();
  std::vector<double> cv(m), ca(m), qv(m), qa(m);
  parallel_for(m, opt.threads, [&](std::size_t i) {
    Acc cub, quad;
    const double x1 = atoms[i].x, w1 = atoms[i].w;
    for (std::size_t j = 0; j < m; ++j) {
      const double x2 = atoms[j].x, w2 = atoms[j].w;
      for (std::size_t k = 0; k < m; ++k) {
        const double x3 = atoms[k].x;
        const double W = weight_W(x1, x2, x3);
        if (W == 0.0) continue;
        const double x4 = std::max(0.0, x1 + x2 - x3);
        const double c = w1 * w2 * atoms[k].w * W;
        cub.add(c * delta_phi(phi, x1, x2, x3),
                c * (std::abs(phi(x4)) + std::abs(phi(x3)) + std::abs(phi(x2)) + std::abs(phi(x1))));
      }
      const Acc q = quadratic_x3(phi, x1, x2, opt.q4_tol);
      quad.add(0.5 * w1 * w2 * q.v, 0.5 * w1 * w2 * q.a);
    }
    cv[i] = cub.v;
    ca[i] = cub.a;
    qv[i] = quad.v;
    qa[i] = quad.a;
  });
  FunctionalResult r;
  r.atomic = pairwise_sum(cv);
  r.cross = pairwise_sum(qv);
  r.value = r.atomic + r.cross;
  r.abs_scale = pairwise_sum(ca) + pairwise_sum(qa);
  return r;
}

}  // namespace

FunctionalResult q4_full(const TestFunction& phi, const RadialMeasure& G, const QuadOptions& opt) {
  if (G.has_density()) throw std::invalid_argument("q4_full: only atomic measures are supported");
  std::vector<Atom> atoms;
  if (G.atom0() > 0) atoms.push_back({0.0, G.atom0()});
  atoms.insert(atoms.end(), G.atoms().begin(), G.atoms().end());
  return q4_atomic(phi, atoms, opt);
}

FunctionalResult q4_script(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt) {
  require_no_atom0(g, "q4_script");
  if (g.has_density()) throw std::invalid_argument("q4_script: only atomic measures are supported");
  return q4_atomic(phi, g.atoms(), opt);
}

TransferResult transfer_functional(const RadialMeasure& g, const std::vector<double>& eps_sequence,
                                   const QuadOptions& opt) {
  require_no_atom0(g, "transfer_functional");
  if (eps_sequence.empty()) throw std::invalid_argument("transfer_functional: empty eps sequence");
  for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
    if (!(eps_sequence[i] > 0)) throw std::invalid_argument("transfer_functional: eps must be > 0");
    if (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1]))
      throw std::invalid_argument("transfer_functional: eps sequence must be strictly decreasing");
  }
  TransferResult out;
  double floor = 0.0;
  if (g.has_density()) {
    const auto& grid = *g.grid();
    floor = grid.edges[std::min<std::size_t>(3, grid.cells())];
  }
  for (double e : eps_sequence) {
    if (e <= floor)
      out.warnings.push_back("eps=" + std::to_string(e) + " is below three origin cells; estimate resolves the mesh");
    out.eps.push_back(e);
    out.estimates.push_back(q3_quadratic(phi_eps(e), g, opt).value);
  }
  const std::size_t k = out.estimates.size();
  if (k == 1) {
    out.extrapolated = out.estimates[0];
  } else {
    const double e1 = out.eps[k - 2], e2 = out.eps[k - 1];
    const double q1 = out.estimates[k - 2], q2 = out.estimates[k - 1];
    out.extrapolated = (e1 * q2 - e2 * q1) / (e1 - e2);
  }
  for (std::size_t i = 2; i < k; ++i) {
    const double d0 = std::abs(out.estimates[i - 1] - out.estimates[i - 2]);
    const double d1 = std::abs(out.estimates[i] - out.estimates[i - 1]);
    if (d1 > d0 && d1 > 1e-12 * std::abs(out.estimates[i])) out.converged = false;
  }
  if (!out.converged) out.warnings.push_back("successive estimates diverge");
  return out;
}

nlohmann::json functional_record(const std::string& functional, const std::string& phi, const FunctionalResult& r,
                                 double tol) {
  return {{"functional", functional},
          {"phi", phi},
          {"value", r.value},
          {"tol", tol},
          {"parts", {{"atomic", r.atomic}, {"density", r.density}, {"cross", r.cross}}}};
}

}  // namespace nck
