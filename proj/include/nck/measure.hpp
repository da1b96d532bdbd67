#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nck {

// Cell edges of a partition of [x_min, x_max].
struct GridSpec {
  std::vector<double> edges;

  static GridSpec uniform(double x_min, double x_max, std::size_t cells);
  // Edges 0, x_first, x_first*ratio, ... with the last edge clamped to x_max.
  static GridSpec geometric(double x_first, double x_max, double ratio);
  static GridSpec from_edges(std::vector<double> edges);

  double x_min() const { return edges.front(); }
  double x_max() const { return edges.back(); }
  std::size_t cells() const { return edges.empty() ? 0 : edges.size() - 1; }
  double lo(std::size_t i) const { return edges[i]; }
  double hi(std::size_t i) const { return edges[i + 1]; }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  // Index of the cell containing x (clamped to the valid range).
  std::size_t locate(double x) const;
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

struct Atom {
  double x;
  double w;
  bool operator==(const Atom&) const = default;
};

// n δ₀ + Σ wᵢ δ_{xᵢ} + piecewise-constant density (cell averages).
class RadialMeasure {
 public:
  RadialMeasure() = default;
  RadialMeasure(double atom0, std::vector<Atom> atoms);
  RadialMeasure(double atom0, std::vector<Atom> atoms, GridSpec grid, std::vector<double> density);

  static RadialMeasure density_only(GridSpec grid, std::vector<double> density);

  double atom0() const { return atom0_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<GridSpec>& grid() const { return grid_; }
  const std::vector<double>& density() const { return density_; }
  bool has_density() const { return grid_.has_value(); }
  bool is_atomic() const { return !grid_.has_value(); }

  bool operator==(const RadialMeasure&) const = default;

 private:
  void canonicalize();

  double atom0_ = 0.0;
  std::vector<Atom> atoms_;
  std::optional<GridSpec> grid_;
  std::vector<double> density_;
};

double moment(const RadialMeasure& mu, double alpha);

// Mass of the measure restricted to [a, b) with the density split exactly at the bounds.
double mass_in(const RadialMeasure& mu, double a, double b);

RadialMeasure bose_einstein(double beta, double mu_chem, double c, const GridSpec& grid,
                            double tail_tol = 1e-10);
// ∫_{x0}^∞ √x/(e^{βx−μ}−1) dx.
double bose_einstein_tail(double beta, double mu_chem, double x0);

RadialMeasure mollify(const RadialMeasure& mu, int n, const GridSpec& grid);

std::pair<double, RadialMeasure> split_atom(const RadialMeasure& G);
RadialMeasure with_atom0(const RadialMeasure& g, double n0);

// Weights multiplied by `weight`, positions by `stretch`.
RadialMeasure rescale(const RadialMeasure& mu, double weight, double stretch);
// Rescale so that M₀ = N and M₁ = E.
RadialMeasure normalize(const RadialMeasure& mu, double N, double E);

nlohmann::json to_json(const RadialMeasure& mu);
RadialMeasure measure_from_json(const nlohmann::json& j);

}  // namespace nck
