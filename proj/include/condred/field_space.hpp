#pragma once

// Discretization of R^n_x x R^d_z: a periodic box in x, a truncated Hermite
// expansion in z. Field data is x-major with the Hermite coefficients of one
// x-point stored contiguously (one column per x-point).

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "condred/transverse_spectral.hpp"

namespace condred {

/// A point of R^n with n <= 2, stored inline.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

struct GridSpec {
  int dim_n = 1;
  int dim_d = 1;
  int nx = 256;
  double half_width = 12.0;
  int num_modes = 32;
  int num_quad = 96;

  void validate() const;

  int num_points() const { return dim_n == 1 ? nx : nx * nx; }
  int mode_count() const { return dim_d == 1 ? num_modes : num_modes * num_modes; }
  double dx() const { return 2.0 * half_width / nx; }
  double coordinate(int i) const { return -half_width + i * dx(); }
  std::array<int, 2> point_index(int p) const { return {p % nx, p / nx}; }
  Point position(int p) const;
  /// Volume element dx^n.
  double cell_volume() const;

  bool operator==(const GridSpec&) const = default;
};

HermiteBasis build_basis(const GridSpec& grid);
void check_basis(const GridSpec& grid, const HermiteBasis& basis);

struct Field {
  GridSpec grid;
  Eigen::MatrixXcd data;  // mode_count x num_points
  double time = 0.0;

  static Field zeros(const GridSpec& grid, double time = 0.0);

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(Complex s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Complex s, Field a);

/// Initial amplitude catalog. The x-profile is a unit-mass Gaussian
/// pi^{-n/4} w^{-n/2} exp(-|x - c|^2 / (2 w^2)).
struct InitialAmplitude {
  enum class Kind { polarized_gaussian, two_mode, custom };

  Kind kind = Kind::polarized_gaussian;
  std::array<double, 2> center{0.0, 0.0};
  double width = 1.0;
  double weight0 = 1.0;  // two_mode weight on mode 0
  double weight2 = 0.0;  // two_mode weight on mode 2 (first transversal axis)
  std::shared_ptr<const Field> data;  // custom

  static InitialAmplitude polarized_gaussian(double center = 0.0, double width = 1.0);
  static InitialAmplitude two_mode(double w0, double w2, double center = 0.0, double width = 1.0);
  static InitialAmplitude custom(Field field);

  double profile(const Point& x) const;
  /// Hermite coefficient of A_0(x, .) for the given mode. Not available for
  /// custom data.
  Complex coefficient(const Point& x, int mode, const HermiteBasis& basis) const;
};

Field sample_initial(const InitialAmplitude& amp, const GridSpec& grid, const HermiteBasis& basis);

/// Max column amplitude on the outermost x-layer divided by the max overall
/// (0 for the zero field).
double boundary_ratio(const Field& field);
/// Fraction of the L^2 mass carried by the top quarter of Hermite modes.
double spectral_tail_fraction(const Field& field, const HermiteBasis& basis);

inline constexpr double kBoundaryDecayTol = 1e-8;
inline constexpr double kSpectralDecayTol = 1e-8;

void check_boundary_decay(const Field& field, const char* context);
void check_spectral_decay(const Field& field, const HermiteBasis& basis, const char* context);

/// Discrete Fourier machinery along x for one grid and one column height.
class SpectralX {
 public:
  SpectralX(const GridSpec& grid, int rows);

  const GridSpec& grid() const { return grid_; }
  int rows() const { return rows_; }
  /// Wavenumbers along one axis in FFT order.
  const std::vector<double>& wavenumbers() const { return xi_; }
  double xi_max() const;

  Eigen::MatrixXcd forward(const Eigen::MatrixXcd& values) const;
  /// Inverse transform, normalized so backward(forward(u)) = u.
  Eigen::MatrixXcd backward(const Eigen::MatrixXcd& spectrum) const;

  /// Fourier multiplier of d^order/dx_axis^order at one FFT index (Nyquist
  /// zeroed for odd orders).
  Complex multiplier(int index, int order) const;

  Eigen::MatrixXcd derivative(const Eigen::MatrixXcd& values, int axis, int order) const;
  /// Gradient components and Laplacian from one forward transform.
  void gradient_laplacian(const Eigen::MatrixXcd& values, std::vector<Eigen::MatrixXcd>& gradient,
                          Eigen::MatrixXcd& laplacian) const;

  struct Plans;

 private:
  GridSpec grid_;
  int rows_;
  std::vector<double> xi_;
  std::shared_ptr<const Plans> plans_;
};

/// Spectral derivative along an x-axis; refuses fields that violate the
/// boundary-decay invariant.
Field derivative_x(const Field& field, int axis, int order);

/// B^m norm: sum over |kappa| <= m of ||d_x^kappa u||^2, plus ||x|^m u||^2,
/// plus ||Lambda_z^m u||^2, square-rooted.
double bm_norm(const Field& field, int m, const HermiteBasis& basis);
double bm_error(const Field& f1, const Field& f2, int m, const HermiteBasis& basis);
/// bm_norm without the decay checks (for differences of checked fields).
double bm_norm_unchecked(const Field& field, int m, const HermiteBasis& basis);

double l2_norm(const Field& field);
double mass_coefficients(const Field& field);
double mass_nodes(const Field& field, const HermiteBasis& basis);

/// Trigonometric interpolation of the field to arbitrary x-points; returns
/// mode_count x points.size().
Eigen::MatrixXcd interpolate_x(const Field& field, const std::vector<Point>& points);

/// CSV (x, mode_index, re, im) plus a JSON sidecar carrying the grid.
void write_snapshot(const Field& field, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path);

}  // namespace condred
