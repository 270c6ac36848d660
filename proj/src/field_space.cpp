#include "condred/field_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "json.hpp"

#include "condred/error.hpp"

namespace condred {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void GridSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::validation_error, msg); };
  if (dim_n != 1 && dim_n != 2) fail("dim_n must be 1 or 2");
  if (dim_d != 1 && dim_d != 2) fail("dim_d must be 1 or 2");
  if (dim_n + dim_d > 3) fail("dim_n + dim_d must not exceed 3");
  if (nx < 16 || !is_power_of_two(nx)) fail("nx must be a power of two >= 16, got " + std::to_string(nx));
  if (!(half_width > 0.0)) fail("half_width must be positive");
  if (num_modes < 1) fail("num_modes must be positive");
  if (num_quad < 2 * num_modes + 1) fail("num_quad must be at least 2*num_modes+1");
}

Point GridSpec::position(int p) const {
  const auto idx = point_index(p);
  Point x(dim_n);
  for (int a = 0; a < dim_n; ++a) x(a) = coordinate(idx[a]);
  return x;
}

double GridSpec::cell_volume() const { return dim_n == 1 ? dx() : dx() * dx(); }

HermiteBasis build_basis(const GridSpec& grid) { return build_basis(grid.dim_d, grid.num_modes, grid.num_quad); }

void check_basis(const GridSpec& grid, const HermiteBasis& basis) {
  if (grid.dim_d != basis.dim_d() || grid.num_modes != basis.num_modes() || grid.num_quad != basis.num_quad()) {
    throw Error(ErrorKind::grid_mismatch, "Hermite basis does not match the grid's transversal truncation");
  }
}

Field Field::zeros(const GridSpec& grid, double time) {
  Field f;
  f.grid = grid;
  f.data = Eigen::MatrixXcd::Zero(grid.mode_count(), grid.num_points());
  f.time = time;
  return f;
}

Field& Field::operator+=(const Field& other) {
  if (!(grid == other.grid)) throw Error(ErrorKind::grid_mismatch, "field addition on different grids");
  data += other.data;
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (!(grid == other.grid)) throw Error(ErrorKind::grid_mismatch, "field subtraction on different grids");
  data -= other.data;
  return *this;
}

Field& Field::operator*=(Complex s) {
  data *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Complex s, Field a) { return a *= s; }

InitialAmplitude InitialAmplitude::polarized_gaussian(double center, double width) {
  InitialAmplitude a;
  a.kind = Kind::polarized_gaussian;
  a.center = {center, 0.0};
  a.width = width;
  return a;
}

InitialAmplitude InitialAmplitude::two_mode(double w0, double w2, double center, double width) {
  InitialAmplitude a;
  a.kind = Kind::two_mode;
  a.center = {center, 0.0};
  a.width = width;
  a.weight0 = w0;
  a.weight2 = w2;
  return a;
}

InitialAmplitude InitialAmplitude::custom(Field field) {
  InitialAmplitude a;
  a.kind = Kind::custom;
  a.data = std::make_shared<const Field>(std::move(field));
  return a;
}

double InitialAmplitude::profile(const Point& x) const {
  const auto n = x.size();
  double r2 = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    const double d = x(a) - center[static_cast<std::size_t>(a)];
    r2 += d * d;
  }
  const double norm = std::pow(std::numbers::pi, -0.25 * n) * std::pow(width, -0.5 * n);
  return norm * std::exp(-0.5 * r2 / (width * width));
}

Complex InitialAmplitude::coefficient(const Point& x, int mode, const HermiteBasis& basis) const {
  switch (kind) {
    case Kind::polarized_gaussian:
      return mode == 0 ? profile(x) : 0.0;
    case Kind::two_mode: {
      const double norm = std::hypot(weight0, weight2);
      if (mode == 0) return profile(x) * weight0 / norm;
      if (mode == basis.mode_of(2, 0)) return profile(x) * weight2 / norm;
      return 0.0;
    }
    case Kind::custom:
      break;
  }
  throw Error(ErrorKind::catalog_mismatch, "custom amplitudes have no closed-form evaluator");
}

Field sample_initial(const InitialAmplitude& amp, const GridSpec& grid, const HermiteBasis& basis) {
  grid.validate();
  check_basis(grid, basis);
  if (amp.kind == InitialAmplitude::Kind::custom) {
    if (!amp.data || !(amp.data->grid == grid)) {
      throw Error(ErrorKind::catalog_mismatch, "custom amplitude grid does not match the requested grid");
    }
    Field f = *amp.data;
    f.time = 0.0;
    return f;
  }
  if (amp.kind == InitialAmplitude::Kind::two_mode && grid.num_modes < 3) {
    throw Error(ErrorKind::catalog_mismatch, "two_mode data needs at least 3 Hermite modes");
  }
  if (!(amp.width > 0.0)) throw Error(ErrorKind::catalog_mismatch, "amplitude width must be positive");
  Field f = Field::zeros(grid);
  for (int p = 0; p < grid.num_points(); ++p) {
    const Point x = grid.position(p);
    f.data(0, p) = amp.coefficient(x, 0, basis);
    if (amp.kind == InitialAmplitude::Kind::two_mode) {
      const int k2 = basis.mode_of(2, 0);
      f.data(k2, p) = amp.coefficient(x, k2, basis);
    }
  }
  return f;
}

double boundary_ratio(const Field& field) {
  const auto& g = field.grid;
  const Eigen::VectorXd amp = field.data.colwise().norm().transpose();
  const double total = amp.size() ? amp.maxCoeff() : 0.0;
  if (total == 0.0) return 0.0;
  double edge = 0.0;
  for (int p = 0; p < g.num_points(); ++p) {
    const auto idx = g.point_index(p);
    bool outer = idx[0] == 0 || idx[0] == g.nx - 1;
    if (g.dim_n == 2) outer = outer || idx[1] == 0 || idx[1] == g.nx - 1;
    if (outer) edge = std::max(edge, amp(p));
  }
  return edge / total;
}

double spectral_tail_fraction(const Field& field, const HermiteBasis& basis) {
  const int cut = (3 * basis.num_modes() + 3) / 4;
  double tail = 0.0;
  double total = 0.0;
  for (int k = 0; k < basis.mode_count(); ++k) {
    const double row = field.data.row(k).squaredNorm();
    total += row;
    const auto idx = basis.multi_index(k);
    if (idx[0] >= cut || idx[1] >= cut) tail += row;
  }
  return total == 0.0 ? 0.0 : tail / total;
}

void check_boundary_decay(const Field& field, const char* context) {
  const double r = boundary_ratio(field);
  if (!(r <= kBoundaryDecayTol)) {
    throw Error(ErrorKind::boundary_decay, std::string(context) + ": boundary amplitude ratio " + fmt17(r) +
                                               " exceeds " + fmt17(kBoundaryDecayTol) + " (box too small)");
  }
}

void check_spectral_decay(const Field& field, const HermiteBasis& basis, const char* context) {
  const double r = spectral_tail_fraction(field, basis);
  if (!(r <= kSpectralDecayTol)) {
    throw Error(ErrorKind::spectral_decay, std::string(context) + ": Hermite tail mass fraction " + fmt17(r) +
                                               " exceeds " + fmt17(kSpectralDecayTol) + " (truncation too small)");
  }
}

Field derivative_x(const Field& field, int axis, int order) {
  if (axis < 0 || axis >= field.grid.dim_n) throw Error(ErrorKind::invalid_argument, "derivative_x: bad axis");
  if (order < 0) throw Error(ErrorKind::negative_order, "derivative_x: negative order");
  if (order == 0) return field;
  check_boundary_decay(field, "derivative_x");
  SpectralX spec(field.grid, static_cast<int>(field.data.rows()));
  Field out = field;
  out.data = spec.derivative(field.data, axis, order);
  return out;
}

double bm_norm_unchecked(const Field& field, int m, const HermiteBasis& basis) {
  if (m < 0) throw Error(ErrorKind::negative_order, "bm_norm: negative order");
  // B^0 is L^2; the three-part sum would count ||u||^2 three times.
  if (m == 0) return l2_norm(field);
  const auto& g = field.grid;
  const double vol = g.cell_volume();
  const int points = g.num_points();

  // x-derivative part through discrete Parseval: sum_x |u|^2 = sum_xi |u^|^2 / P.
  SpectralX spec(g, static_cast<int>(field.data.rows()));
  const Eigen::MatrixXcd hat = spec.forward(field.data);
  const Eigen::VectorXd power = hat.colwise().squaredNorm().transpose();
  double deriv = 0.0;
  for (int p = 0; p < points; ++p) {
    const auto idx = g.point_index(p);
    double weight = 0.0;
    if (g.dim_n == 1) {
      for (int k = 0; k <= m; ++k) weight += std::norm(spec.multiplier(idx[0], k));
    } else {
      for (int k0 = 0; k0 <= m; ++k0)
        for (int k1 = 0; k0 + k1 <= m; ++k1)
          weight += std::norm(spec.multiplier(idx[0], k0)) * std::norm(spec.multiplier(idx[1], k1));
    }
    deriv += weight * power(p);
  }
  deriv *= vol / points;

  double moment = 0.0;
  for (int p = 0; p < points; ++p) {
    const double r2 = g.position(p).squaredNorm();
    moment += std::pow(r2, m) * field.data.col(p).squaredNorm();
  }
  moment *= vol;

  const auto lw = lambda_weights(m, basis);
  double transverse = 0.0;
  for (Eigen::Index k = 0; k < field.data.rows(); ++k) {
    transverse += lw[k] * lw[k] * field.data.row(k).squaredNorm();
  }
  transverse *= vol;

  return std::sqrt(deriv + moment + transverse);
}

double bm_norm(const Field& field, int m, const HermiteBasis& basis) {
  check_basis(field.grid, basis);
  if (m < 0) throw Error(ErrorKind::negative_order, "bm_norm: negative order");
  if (m > 0) check_boundary_decay(field, "bm_norm");
  return bm_norm_unchecked(field, m, basis);
}

double bm_error(const Field& f1, const Field& f2, int m, const HermiteBasis& basis) {
  if (!(f1.grid == f2.grid)) throw Error(ErrorKind::grid_mismatch, "bm_error: fields live on different grids");
  if (std::abs(f1.time - f2.time) > 1e-12 * std::max(1.0, std::abs(f1.time))) {
    throw Error(ErrorKind::time_mismatch, "bm_error: fields at different times " + fmt17(f1.time) + " and " +
                                              fmt17(f2.time));
  }
  check_basis(f1.grid, basis);
  if (m > 0) {
    check_boundary_decay(f1, "bm_error");
    check_boundary_decay(f2, "bm_error");
  }
  return bm_norm_unchecked(f1 - f2, m, basis);
}

double l2_norm(const Field& field) { return std::sqrt(mass_coefficients(field)); }

double mass_coefficients(const Field& field) { return field.grid.cell_volume() * field.data.squaredNorm(); }

double mass_nodes(const Field& field, const HermiteBasis& basis) {
  check_basis(field.grid, basis);
  const Eigen::MatrixXcd nodes = to_node_values_batch(field.data, basis);
  double sum = 0.0;
  for (Eigen::Index p = 0; p < nodes.cols(); ++p) {
    sum += nodes.col(p).cwiseAbs2().dot(basis.node_weights());
  }
  return field.grid.cell_volume() * sum;
}

Eigen::MatrixXcd interpolate_x(const Field& field, const std::vector<Point>& points) {
  const auto& g = field.grid;
  SpectralX spec(g, static_cast<int>(field.data.rows()));
  const Eigen::MatrixXcd hat = spec.forward(field.data) / static_cast<double>(g.num_points());
  const auto& xi = spec.wavenumbers();
  const int nyquist = g.nx / 2;

  // Per-axis phase table with the Nyquist term split evenly between +/-.
  auto axis_phases = [&](double x) {
    Eigen::VectorXcd e(g.nx);
    const double shift = x + g.half_width;
    for (int j = 0; j < g.nx; ++j) {
      e(j) = j == nyquist ? Complex(std::cos(xi[j] * shift), 0.0) : std::polar(1.0, xi[j] * shift);
    }
    return e;
  };

  Eigen::MatrixXcd out(field.data.rows(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& x = points[i];
    if (x.size() != g.dim_n) throw Error(ErrorKind::length_mismatch, "interpolate_x: point dimension");
    const Eigen::VectorXcd e0 = axis_phases(x(0));
    if (g.dim_n == 1) {
      out.col(static_cast<Eigen::Index>(i)) = hat * e0;
    } else {
      const Eigen::VectorXcd e1 = axis_phases(x(1));
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(field.data.rows());
      for (int j1 = 0; j1 < g.nx; ++j1) {
        acc += e1(j1) * (hat.middleCols(static_cast<Eigen::Index>(j1) * g.nx, g.nx) * e0);
      }
      out.col(static_cast<Eigen::Index>(i)) = acc;
    }
  }
  return out;
}

void write_snapshot(const Field& field, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path) {
  const auto& g = field.grid;
  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorKind::io_failure, "cannot write " + csv_path.string());
  csv << (g.dim_n == 1 ? "x,mode_index,re,im\n" : "x,y,mode_index,re,im\n");
  for (int p = 0; p < g.num_points(); ++p) {
    const Point x = g.position(p);
    std::string prefix = fmt17(x(0)) + ",";
    if (g.dim_n == 2) prefix += fmt17(x(1)) + ",";
    for (Eigen::Index k = 0; k < field.data.rows(); ++k) {
      const Complex c = field.data(k, p);
      csv << prefix << k << ',' << fmt17(c.real()) << ',' << fmt17(c.imag()) << '\n';
    }
  }
  if (!csv) throw Error(ErrorKind::io_failure, "write failed for " + csv_path.string());

  nlohmann::ordered_json meta;
  meta["grid"] = {{"dim_n", g.dim_n},         {"dim_d", g.dim_d},         {"nx", g.nx},
                  {"half_width", g.half_width}, {"num_modes", g.num_modes}, {"num_quad", g.num_quad}};
  meta["time"] = field.time;
  meta["csv"] = csv_path.filename().string();
  std::ofstream js(json_path);
  if (!js) throw Error(ErrorKind::io_failure, "cannot write " + json_path.string());
  js << meta.dump(2) << '\n';
}

}  // namespace condred
