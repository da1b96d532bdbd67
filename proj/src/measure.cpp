#include "nck/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nck {

GridSpec GridSpec::uniform(double x_min, double x_max, std::size_t cells) {
  if (cells == 0 || !(x_max > x_min) || x_min < 0)
    throw std::invalid_argument("uniform grid: need x_max > x_min >= 0 and cells > 0");
  GridSpec g;
  g.edges.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    g.edges[i] = x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(cells);
  g.edges.back() = x_max;
  return g;
}

GridSpec GridSpec::geometric(double x_first, double x_max, double ratio) {
  if (!(x_first > 0) || !(x_max > x_first) || !(ratio > 1))
    throw std::invalid_argument("geometric grid: need 0 < x_first < x_max and ratio > 1");
  GridSpec g;
  g.edges.push_back(0.0);
  double x = x_first;
  while (x < x_max * (1 - 1e-12)) {
    g.edges.push_back(x);
    x *= ratio;
  }
  g.edges.push_back(x_max);
  return g;
}

GridSpec GridSpec::from_edges(std::vector<double> edges) {
  GridSpec g{std::move(edges)};
  g.validate();
  return g;
}

std::size_t GridSpec::locate(double x) const {
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(i, cells() - 1);
}

void GridSpec::validate() const {
  if (edges.size() < 2) throw std::invalid_argument("grid needs at least one cell");
  if (edges.front() < 0) throw std::invalid_argument("grid must lie in [0, inf)");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("grid edges must be strictly increasing");
}

RadialMeasure::RadialMeasure(double atom0, std::vector<Atom> atoms) : atom0_(atom0), atoms_(std::move(atoms)) {
  canonicalize();
}

RadialMeasure::RadialMeasure(double atom0, std::vector<Atom> atoms, GridSpec grid, std::vector<double> density)
    : atom0_(atom0), atoms_(std::move(atoms)), grid_(std::move(grid)), density_(std::move(density)) {
  canonicalize();
}

RadialMeasure RadialMeasure::density_only(GridSpec grid, std::vector<double> density) {
  return RadialMeasure(0.0, {}, std::move(grid), std::move(density));
}

void RadialMeasure::canonicalize() {
  if (!(atom0_ >= 0) || !std::isfinite(atom0_)) throw std::invalid_argument("atom0 must be finite and >= 0");
  for (const auto& a : atoms_) {
    if (!(a.w >= 0) || !std::isfinite(a.w) || !std::isfinite(a.x) || a.x < 0)
      throw std::invalid_argument("atoms need x >= 0 and finite w >= 0");
  }
  std::vector<Atom> kept;
  for (const auto& a : atoms_) {
    if (a.x == 0.0) {
      atom0_ += a.w;
    } else if (a.w > 0) {
      kept.push_back(a);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  atoms_.clear();
  for (const auto& a : kept) {
    if (!atoms_.empty() && atoms_.back().x == a.x)
      atoms_.back().w += a.w;
    else
      atoms_.push_back(a);
  }
  if (grid_) {
    grid_->validate();
    if (density_.size() != grid_->cells()) throw std::invalid_argument("density size must match grid cells");
    for (double v : density_)
      if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("density values must be finite and >= 0");
  } else if (!density_.empty()) {
    throw std::invalid_argument("density given without grid");
  }
}

namespace {

double power_integral(double a, double b, double alpha) {
  if (alpha == -1.0) return std::log(b / a);
  const double p = alpha + 1.0;
  return (std::pow(b, p) - std::pow(a, p)) / p;
}

}  // namespace

double moment(const RadialMeasure& mu, double alpha) {
  double s = 0.0;
  if (mu.atom0() > 0) {
    if (alpha == 0.0)
      s += mu.atom0();
    else if (alpha < 0.0)
      throw std::domain_error("negative moment of a measure with an atom at 0");
  }
  for (const auto& a : mu.atoms()) s += a.w * std::pow(a.x, alpha);
  if (mu.has_density()) {
    const auto& g = *mu.grid();
    const auto& d = mu.density();
    for (std::size_t i = 0; i < g.cells(); ++i) {
      if (d[i] == 0.0) continue;
      if (g.lo(i) == 0.0 && alpha <= -1.0) throw std::domain_error("moment not integrable at x = 0");
      s += d[i] * power_integral(g.lo(i), g.hi(i), alpha);
    }
  }
  return s;
}

double mass_in(const RadialMeasure& mu, double a, double b) {
  double s = 0.0;
  if (a <= 0.0 && b > 0.0) s += mu.atom0();
  for (const auto& at : mu.atoms())
    if (at.x >= a && at.x < b) s += at.w;
  if (mu.has_density()) {
    const auto& g = *mu.grid();
    for (std::size_t i = 0; i < g.cells(); ++i) {
      const double lo = std::max(a, g.lo(i));
      const double hi = std::min(b, g.hi(i));
      if (hi > lo) s += mu.density()[i] * (hi - lo);
    }
  }
  return s;
}

namespace {

// √x/(e^{βx−μ}−1) dx written in u = √x: 2u²/(e^{βu²−μ}−1) du, finite at u = 0.
double be_integrand_u(double u, double beta, double mu_chem) {
  if (u == 0.0) return mu_chem == 0.0 ? 2.0 / beta : 0.0;
  const double u2 = u * u;
  return 2.0 * u2 / std::expm1(beta * u2 - mu_chem);
}

}  // namespace

double bose_einstein_tail(double beta, double mu_chem, double x0) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double u) { return be_integrand_u(u, beta, mu_chem); };
  return gauss_kronrod<double, 31>::integrate(f, std::sqrt(x0), std::numeric_limits<double>::infinity(), 15,
                                              1e-13);
}

RadialMeasure bose_einstein(double beta, double mu_chem, double c, const GridSpec& grid, double tail_tol) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(beta > 0)) throw std::invalid_argument("bose_einstein: beta must be > 0");
  if (mu_chem > 0) throw std::invalid_argument("bose_einstein: mu_chem must be <= 0");
  if (c < 0) throw std::invalid_argument("bose_einstein: c must be >= 0");
  if (c > 0 && mu_chem < 0) throw std::invalid_argument("bose_einstein: c * mu_chem must vanish");
  grid.validate();
  if (grid.x_min() != 0.0) throw std::invalid_argument("bose_einstein: grid must start at 0");
  const double tail = bose_einstein_tail(beta, mu_chem, grid.x_max());
  if (tail > tail_tol) throw std::invalid_argument("bose_einstein: x_max leaves tail mass above tolerance");
  std::vector<double> dens(grid.cells());
  auto f = [&](double u) { return be_integrand_u(u, beta, mu_chem); };
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    const double m = gauss_kronrod<double, 15>::integrate(f, std::sqrt(grid.lo(i)), std::sqrt(grid.hi(i)), 10,
                                                          1e-14);
    dens[i] = m / grid.width(i);
  }
  return RadialMeasure(c, {}, grid, std::move(dens));
}

namespace {

struct Mollifier {
  double k;   // eⁿ
  double s;   // 1 − e^{−n}
  double rb;  // √b

  // ∫₀^z J for the half-Gaussian J(z) = a e^{−bz²}.
  double F(double z) const { return z <= 0 ? 0.0 : std::erf(rb * z); }
  // ∫₀^z F.
  double G(double z) const {
    if (z <= 0) return 0.0;
    const double t = rb * z;
    return z * std::erf(t) + std::expm1(-t * t) / (rb * std::sqrt(std::numbers::pi));
  }
  double reach() const { return 7.0 / (rb * k); }
};

// Cell averages misplace each cell's mass by at most half a width. The continuum result has first moment M1,
// so the total offset D is split over cells in proportion to mᵢwᵢ and undone by moving mass to a neighbour.
void restore_first_moment(const GridSpec& grid, std::vector<double>& mass, double M0, double M1) {
  const std::size_t nc = mass.size();
  if (nc < 2) return;
  double m0 = 0, m1 = 0, mw = 0;
  for (std::size_t i = 0; i < nc; ++i) {
    m0 += mass[i];
    m1 += mass[i] * 0.5 * (grid.lo(i) + grid.hi(i));
    mw += mass[i] * grid.width(i);
  }
  if (std::abs(m0 - M0) > 1e-12 * M0 || mw <= 0) return;  // truncated by the grid: target unknown
  const double D = M1 - m1;
  if (std::abs(D) > 0.5 * mw) return;
  const std::vector<double> before = mass;
  auto centre = [&](std::size_t i) { return 0.5 * (grid.lo(i) + grid.hi(i)); };
  for (std::size_t i = 0; i < nc; ++i) {
    const double d = D * before[i] * grid.width(i) / mw;
    if (d == 0.0) continue;
    if (d > 0 && i + 1 < nc) {
      const double delta = d / (centre(i + 1) - centre(i));
      mass[i] -= delta;
      mass[i + 1] += delta;
    } else if (d < 0 && i > 0) {
      const double delta = -d / (centre(i) - centre(i - 1));
      mass[i] -= delta;
      mass[i - 1] += delta;
    } else if (d < 0) {
      const double delta = std::min(-d / (centre(1) - centre(0)), mass[1]);
      mass[1] -= delta;
      mass[0] += delta;
    }
  }
  for (double& m : mass) m = std::max(0.0, m);
}

}  // namespace

RadialMeasure mollify(const RadialMeasure& mu, int n, const GridSpec& grid) {
  if (n < 1) throw std::invalid_argument("mollify: n must be >= 1");
  grid.validate();
  const double M0 = moment(mu, 0.0);
  const double M1 = moment(mu, 1.0);
  if (!(M0 > 0) || !(M1 > 0)) throw std::domain_error("mollify: needs positive mass and energy");
  const double b = (M0 / M1) * (M0 / M1) / std::numbers::pi;
  Mollifier J{std::exp(static_cast<double>(n)), -std::expm1(-static_cast<double>(n)), std::sqrt(b)};

  std::vector<double> mass(grid.cells(), 0.0);
  auto spread_point = [&](double y, double w) {
    const double x0 = y * J.s;
    std::size_t i = grid.locate(x0);
    for (; i < grid.cells(); ++i) {
      const double lo = grid.lo(i), hi = grid.hi(i);
      if (hi <= x0) continue;
      mass[i] += w * (J.F(J.k * (hi - x0)) - J.F(J.k * (lo - x0)));
      if (lo > x0 + J.reach()) break;
    }
  };
  if (mu.atom0() > 0) spread_point(0.0, mu.atom0());
  for (const auto& a : mu.atoms()) spread_point(a.x, a.w);
  if (mu.has_density()) {
    const auto& sg = *mu.grid();
    for (std::size_t j = 0; j < sg.cells(); ++j) {
      const double v = mu.density()[j];
      if (v == 0.0) continue;
      const double y0 = sg.lo(j), y1 = sg.hi(j);
      // ∫_{y0}^{y1} F(k(c − ys)) dy = [G(k(c − y0 s)) − G(k(c − y1 s))]/(ks).
      auto window = [&](double c) { return (J.G(J.k * (c - y0 * J.s)) - J.G(J.k * (c - y1 * J.s))) / (J.k * J.s); };
      std::size_t i = grid.locate(y0 * J.s);
      for (; i < grid.cells(); ++i) {
        const double lo = grid.lo(i), hi = grid.hi(i);
        if (hi <= y0 * J.s) continue;
        mass[i] += v * (window(hi) - window(lo));
        if (lo > y1 * J.s + J.reach()) break;
      }
    }
  }
  for (double& m : mass) m = std::max(0.0, m);
  restore_first_moment(grid, mass, M0, M1);
  std::vector<double> dens(grid.cells());
  for (std::size_t i = 0; i < grid.cells(); ++i) dens[i] = mass[i] / grid.width(i);
  return RadialMeasure::density_only(grid, std::move(dens));
}

std::pair<double, RadialMeasure> split_atom(const RadialMeasure& G) {
  if (G.has_density()) return {G.atom0(), RadialMeasure(0.0, G.atoms(), *G.grid(), G.density())};
  return {G.atom0(), RadialMeasure(0.0, G.atoms())};
}

RadialMeasure with_atom0(const RadialMeasure& g, double n0) {
  if (g.has_density()) return RadialMeasure(n0, g.atoms(), *g.grid(), g.density());
  return RadialMeasure(n0, g.atoms());
}

RadialMeasure rescale(const RadialMeasure& mu, double weight, double stretch) {
  if (!(weight > 0) || !(stretch > 0)) throw std::invalid_argument("rescale: factors must be positive");
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({a.x * stretch, a.w * weight});
  if (!mu.has_density()) return RadialMeasure(mu.atom0() * weight, std::move(atoms));
  GridSpec g = *mu.grid();
  for (double& e : g.edges) e *= stretch;
  std::vector<double> d = mu.density();
  for (double& v : d) v *= weight / stretch;
  return RadialMeasure(mu.atom0() * weight, std::move(atoms), std::move(g), std::move(d));
}

RadialMeasure normalize(const RadialMeasure& mu, double N, double E) {
  const double M0 = moment(mu, 0.0), M1 = moment(mu, 1.0);
  if (!(M0 > 0) || !(M1 > 0)) throw std::domain_error("normalize: needs positive mass and energy");
  const double weight = N / M0;
  const double stretch = (E / N) / (M1 / M0);
  return rescale(mu, weight, stretch);
}

nlohmann::json to_json(const RadialMeasure& mu) {
  nlohmann::json j;
  j["version"] = "nck-measure/1";
  j["atom0"] = mu.atom0();
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({a.x, a.w});
  j["atoms"] = atoms;
  if (mu.has_density()) {
    j["grid"] = {{"edges", mu.grid()->edges}};
    j["density"] = mu.density();
  }
  return j;
}

RadialMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("measure: expected a JSON object");
  if (j.contains("version") && j.at("version") != "nck-measure/1")
    throw std::invalid_argument("measure: unsupported version");
  const double atom0 = j.value("atom0", 0.0);
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) throw std::invalid_argument("measure: atoms must be [x, w] pairs");
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
  }
  if (j.contains("grid") || j.contains("density")) {
    if (!j.contains("grid") || !j.contains("density"))
      throw std::invalid_argument("measure: grid and density must appear together");
    GridSpec g = GridSpec::from_edges(j.at("grid").at("edges").get<std::vector<double>>());
    return RadialMeasure(atom0, std::move(atoms), std::move(g), j.at("density").get<std::vector<double>>());
  }
  return RadialMeasure(atom0, std::move(atoms));
}

}  // namespace nck
