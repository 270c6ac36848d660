#include "condred/transverse_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "condred/error.hpp"

namespace condred {

namespace {

void check_length(std::size_t got, int want, const char* what) {
  if (got != static_cast<std::size_t>(want)) {
    throw Error(ErrorKind::length_mismatch, std::string(what) + ": expected length " +
                                                std::to_string(want) + ", got " + std::to_string(got));
  }
}

// Tensor product of per-axis tables: (rows^d) x (cols^d), axis 0 fastest in
// both the row and column multi-indices.
Eigen::MatrixXd tensor_square(const Eigen::MatrixXd& table) {
  const auto rows = table.rows();
  const auto cols = table.cols();
  Eigen::MatrixXd out(rows * rows, cols * cols);
  for (Eigen::Index c2 = 0; c2 < cols; ++c2)
    for (Eigen::Index c1 = 0; c1 < cols; ++c1)
      for (Eigen::Index r2 = 0; r2 < rows; ++r2)
        for (Eigen::Index r1 = 0; r1 < rows; ++r1)
          out(r1 + rows * r2, c1 + cols * c2) = table(r1, c1) * table(r2, c2);
  return out;
}

Eigen::VectorXd tensor_square(const Eigen::VectorXd& v) {
  const auto n = v.size();
  Eigen::VectorXd out(n * n);
  for (Eigen::Index j2 = 0; j2 < n; ++j2)
    for (Eigen::Index j1 = 0; j1 < n; ++j1) out(j1 + n * j2) = v(j1) * v(j2);
  return out;
}

Eigen::MatrixXd values_at(const std::vector<double>& points, int modes) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), modes);
  for (std::size_t j = 0; j < points.size(); ++j) {
    const auto h = hermite_functions(points[j], modes);
    for (int k = 0; k < modes; ++k) out(static_cast<Eigen::Index>(j), k) = h[k];
  }
  return out;
}

std::size_t quartic_index(int n, int p, int q, int r, int m) {
  return ((static_cast<std::size_t>(p) * n + q) * n + r) * n + m;
}

}  // namespace

std::vector<double> hermite_functions(double z, int count) {
  std::vector<double> h(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return h;
  h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * z * z);
  if (count > 1) h[1] = std::sqrt(2.0) * z * h[0];
  for (int k = 1; k + 1 < count; ++k) {
    h[k + 1] = z * std::sqrt(2.0 / (k + 1)) * h[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * h[k - 1];
  }
  return h;
}

void gauss_hermite_scaled(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch for the nodes, Newton polish on h_count, Christoffel weights.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(count, count);
  for (int k = 1; k < count; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  nodes.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + count);
  weights.assign(static_cast<std::size_t>(count), 0.0);
  for (int j = 0; j < count; ++j) {
    double z = nodes[j];
    for (int it = 0; it < 3; ++it) {
      const auto h = hermite_functions(z, count + 1);
      const double deriv = std::sqrt(2.0 * count) * h[count - 1] - z * h[count];
      if (deriv == 0.0) break;
      z -= h[count] / deriv;
    }
    nodes[j] = z;
    const auto h = hermite_functions(z, count);
    double sum = 0.0;
    for (double v : h) sum += v * v;
    weights[j] = 1.0 / sum;
  }
  // symmetrize to remove the last bits of asymmetry from the eigensolver
  for (int j = 0; j < count / 2; ++j) {
    const int k = count - 1 - j;
    const double z = 0.5 * (nodes[k] - nodes[j]);
    const double w = 0.5 * (weights[k] + weights[j]);
    nodes[j] = -z;
    nodes[k] = z;
    weights[j] = weights[k] = w;
  }
  if (count % 2 == 1) nodes[count / 2] = 0.0;
}

HermiteBasis build_basis(int dim_d, int num_modes, int num_quad) {
  if (dim_d != 1 && dim_d != 2) {
    throw Error(ErrorKind::invalid_dimension, "transversal dimension must be 1 or 2, got " + std::to_string(dim_d));
  }
  if (num_modes < 1) {
    throw Error(ErrorKind::invalid_argument, "num_modes must be positive");
  }
  if (num_quad < 2 * num_modes + 1) {
    throw Error(ErrorKind::insufficient_quadrature, "num_quad = " + std::to_string(num_quad) +
                                                        " is below 2*num_modes+1 = " +
                                                        std::to_string(2 * num_modes + 1));
  }

  HermiteBasis basis;
  basis.dim_d_ = dim_d;
  basis.num_modes_ = num_modes;
  basis.num_quad_ = num_quad;
  gauss_hermite_scaled(num_quad, basis.nodes_, basis.weights_);

  const Eigen::MatrixXd values_1d = values_at(basis.nodes_, num_modes);
  const Eigen::VectorXd weights_1d = Eigen::Map<const Eigen::VectorXd>(basis.weights_.data(), num_quad);

  std::vector<double> scaled_nodes(basis.nodes_.size());
  std::transform(basis.nodes_.begin(), basis.nodes_.end(), scaled_nodes.begin(),
                 [](double u) { return u / std::numbers::sqrt2; });
  basis.scaled_values_1d_ = values_at(scaled_nodes, num_modes);
  basis.scaled_weights_1d_ = weights_1d / std::numbers::sqrt2;

  if (dim_d == 1) {
    basis.synthesis_ = values_1d;
    basis.node_weights_ = weights_1d;
    basis.cubic_synthesis_ = basis.scaled_values_1d_;
    basis.cubic_analysis_ = basis.scaled_values_1d_.transpose() * basis.scaled_weights_1d_.asDiagonal();
  } else {
    basis.synthesis_ = tensor_square(values_1d);
    basis.node_weights_ = tensor_square(weights_1d);
    basis.cubic_synthesis_ = tensor_square(basis.scaled_values_1d_);
    const Eigen::VectorXd cubic_weights = tensor_square(Eigen::VectorXd(basis.scaled_weights_1d_));
    basis.cubic_analysis_ = basis.cubic_synthesis_.transpose() * cubic_weights.asDiagonal();
  }
  basis.analysis_ = basis.synthesis_.transpose() * basis.node_weights_.asDiagonal();

  const int modes = dim_d == 1 ? num_modes : num_modes * num_modes;
  basis.eigenvalues_.resize(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    const auto idx = basis.multi_index(k);
    basis.eigenvalues_[k] = idx[0] + idx[1];
  }

  if (dim_d == 1 && num_modes <= kDenseQuarticLimit) {
    const int n = num_modes;
    basis.quartic_.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q)
        for (int r = q; r < n; ++r)
          for (int m = r; m < n; ++m) {
            if ((p + q + r + m) % 2 != 0) continue;
            const double g = basis.quartic_from_nodes(p, q, r, m);
            std::array<int, 4> idx{p, q, r, m};
            do {
              basis.quartic_[quartic_index(n, idx[0], idx[1], idx[2], idx[3])] = g;
            } while (std::next_permutation(idx.begin(), idx.end()));
          }
  }
  return basis;
}

std::array<int, 2> HermiteBasis::multi_index(int mode) const {
  if (dim_d_ == 1) return {mode, 0};
  return {mode % num_modes_, mode / num_modes_};
}

int HermiteBasis::mode_of(int k1, int k2) const { return dim_d_ == 1 ? k1 : k1 + num_modes_ * k2; }

double HermiteBasis::quartic_from_nodes(int p, int q, int r, int m) const {
  const auto& g = scaled_values_1d_;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    sum += scaled_weights_1d_(j) * g(j, p) * g(j, q) * g(j, r) * g(j, m);
  }
  return sum;
}

double HermiteBasis::quartic(int p, int q, int r, int m) const {
  if (dim_d_ != 1) {
    throw Error(ErrorKind::unsupported_dimension, "quartic overlaps are only available for d = 1");
  }
  if ((p + q + r + m) % 2 != 0) return 0.0;
  if (!quartic_.empty()) return quartic_[quartic_index(num_modes_, p, q, r, m)];
  return quartic_from_nodes(p, q, r, m);
}

Eigen::MatrixXcd real_times_complex(const Eigen::MatrixXd& real, const Eigen::MatrixXcd& cplx) {
  const Eigen::MatrixXd re = real * cplx.real();
  const Eigen::MatrixXd im = real * cplx.imag();
  Eigen::MatrixXcd out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

std::vector<Complex> to_coefficients(std::span<const Complex> node_values, const HermiteBasis& basis) {
  check_length(node_values.size(), basis.node_count(), "to_coefficients");
  const Eigen::MatrixXcd in = Eigen::Map<const Eigen::VectorXcd>(node_values.data(), basis.node_count());
  const Eigen::MatrixXcd out = to_coefficients_batch(in, basis);
  return {out.data(), out.data() + out.size()};
}

std::vector<Complex> to_node_values(std::span<const Complex> coeffs, const HermiteBasis& basis) {
  check_length(coeffs.size(), basis.mode_count(), "to_node_values");
  const Eigen::MatrixXcd in = Eigen::Map<const Eigen::VectorXcd>(coeffs.data(), basis.mode_count());
  const Eigen::MatrixXcd out = to_node_values_batch(in, basis);
  return {out.data(), out.data() + out.size()};
}

Eigen::MatrixXcd to_coefficients_batch(const Eigen::MatrixXcd& node_values, const HermiteBasis& basis) {
  check_length(static_cast<std::size_t>(node_values.rows()), basis.node_count(), "to_coefficients");
  return real_times_complex(basis.analysis(), node_values);
}

Eigen::MatrixXcd to_node_values_batch(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis) {
  check_length(static_cast<std::size_t>(coeffs.rows()), basis.mode_count(), "to_node_values");
  return real_times_complex(basis.basis_values(), coeffs);
}

namespace {

std::vector<Complex> eigen_phases(double theta, const HermiteBasis& basis) {
  if (!std::isfinite(theta)) {
    throw Error(ErrorKind::invalid_argument, "propagate: theta must be finite");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Complex> phase(static_cast<std::size_t>(basis.max_eigenvalue() + 1));
  for (std::size_t k = 0; k < phase.size(); ++k) {
    phase[k] = std::polar(1.0, -std::remainder(theta * static_cast<double>(k), two_pi));
  }
  return phase;
}

}  // namespace

std::vector<Complex> propagate(double theta, std::span<const Complex> coeffs, const HermiteBasis& basis) {
  check_length(coeffs.size(), basis.mode_count(), "propagate");
  const auto phase = eigen_phases(theta, basis);
  const auto eig = basis.eigenvalues();
  std::vector<Complex> out(coeffs.size());
  for (std::size_t k = 0; k < coeffs.size(); ++k) out[k] = coeffs[k] * phase[eig[k]];
  return out;
}

void propagate_in_place(double theta, Eigen::MatrixXcd& coeffs, const HermiteBasis& basis) {
  check_length(static_cast<std::size_t>(coeffs.rows()), basis.mode_count(), "propagate");
  const auto phase = eigen_phases(theta, basis);
  const auto eig = basis.eigenvalues();
  Eigen::VectorXcd row_phase(coeffs.rows());
  for (Eigen::Index k = 0; k < coeffs.rows(); ++k) row_phase(k) = phase[eig[k]];
  coeffs = row_phase.asDiagonal() * coeffs;
}

std::vector<double> lambda_weights(int m, const HermiteBasis& basis) {
  if (m < 0) {
    throw Error(ErrorKind::negative_order, "lambda_weights: order must be nonnegative, got " + std::to_string(m));
  }
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(basis.mode_count()));
  for (int k : basis.eigenvalues()) w.push_back(std::pow(1.0 + k, 0.5 * m));
  return w;
}

}  // namespace condred
