#pragma once

// Spectral calculus for the transversal oscillator H_z = -1/2 Lap_z + |z|^2/2 - d/2.
//
// Modes are normalized Hermite functions (tensor products for d = 2); the
// eigenvalue of multi-index k is |k| = k_1 + ... + k_d. Node values live on a
// Gauss-Hermite grid whose weights absorb the e^{z^2} factor, so that
//   sum_j W_j h_p(z_j) h_q(z_j) = delta_pq
// holds exactly for p, q below the truncation.

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace condred {

using Complex = std::complex<double>;

class HermiteBasis {
 public:
  int dim_d() const { return dim_d_; }
  /// Truncation per transversal axis.
  int num_modes() const { return num_modes_; }
  /// Quadrature nodes per transversal axis.
  int num_quad() const { return num_quad_; }
  /// Total number of modes, num_modes^d.
  int mode_count() const { return static_cast<int>(eigenvalues_.size()); }
  /// Total number of nodes, num_quad^d.
  int node_count() const { return static_cast<int>(node_weights_.size()); }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const Eigen::VectorXd& node_weights() const { return node_weights_; }

  /// node_count x mode_count, entry (j, k) = h_k(z_j).
  const Eigen::MatrixXd& basis_values() const { return synthesis_; }
  /// mode_count x node_count, basis_values^T diag(W).
  const Eigen::MatrixXd& analysis() const { return analysis_; }

  /// Synthesis/analysis pair on the sqrt(2)-scaled nodes. Projections of
  /// products of four truncated modes are exact on this pair.
  const Eigen::MatrixXd& cubic_synthesis() const { return cubic_synthesis_; }
  const Eigen::MatrixXd& cubic_analysis() const { return cubic_analysis_; }

  std::span<const int> eigenvalues() const { return eigenvalues_; }
  int max_eigenvalue() const { return dim_d_ * (num_modes_ - 1); }
  std::array<int, 2> multi_index(int mode) const;
  int mode_of(int k1, int k2 = 0) const;

  bool has_quartic_overlap() const { return dim_d_ == 1; }
  bool quartic_is_dense() const { return !quartic_.empty(); }
  /// gamma[p,q,r,m] = int h_p h_q h_r h_m dz (d = 1 only).
  double quartic(int p, int q, int r, int m) const;

 private:
  friend HermiteBasis build_basis(int, int, int);

  double quartic_from_nodes(int p, int q, int r, int m) const;

  int dim_d_ = 0;
  int num_modes_ = 0;
  int num_quad_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  Eigen::VectorXd node_weights_;
  Eigen::MatrixXd synthesis_;
  Eigen::MatrixXd analysis_;
  Eigen::MatrixXd cubic_synthesis_;
  Eigen::MatrixXd cubic_analysis_;
  // 1-D scaled-node data kept for lazy quartic evaluation.
  Eigen::MatrixXd scaled_values_1d_;
  Eigen::VectorXd scaled_weights_1d_;
  std::vector<int> eigenvalues_;
  std::vector<double> quartic_;
};

/// Largest truncation for which the quartic tensor is stored densely.
inline constexpr int kDenseQuarticLimit = 48;

HermiteBasis build_basis(int dim_d, int num_modes, int num_quad);

/// Normalized Hermite functions h_0(z) .. h_{count-1}(z) by the three-term
/// recurrence on normalized functions.
std::vector<double> hermite_functions(double z, int count);

/// Gauss-Hermite rule for the weight e^{-z^2}: nodes ascending, with the
/// weights returned already multiplied by e^{z_j^2}.
void gauss_hermite_scaled(int count, std::vector<double>& nodes, std::vector<double>& weights);

std::vector<Complex> to_coefficients(std::span<const Complex> node_values, const HermiteBasis& basis);
std::vector<Complex> to_node_values(std::span<const Complex> coeffs, const HermiteBasis& basis);

/// Column-wise transforms: each column is one transversal profile.
Eigen::MatrixXcd to_coefficients_batch(const Eigen::MatrixXcd& node_values, const HermiteBasis& basis);
Eigen::MatrixXcd to_node_values_batch(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis);

/// e^{-i theta H_z} in coefficient space.
std::vector<Complex> propagate(double theta, std::span<const Complex> coeffs, const HermiteBasis& basis);
void propagate_in_place(double theta, Eigen::MatrixXcd& coeffs, const HermiteBasis& basis);

/// Diagonal of Lambda_z^m = (1 + H_z)^{m/2}.
std::vector<double> lambda_weights(int m, const HermiteBasis& basis);

/// R * C for real R and complex C, done as two real products.
Eigen::MatrixXcd real_times_complex(const Eigen::MatrixXd& real, const Eigen::MatrixXcd& cplx);

}  // namespace condred
