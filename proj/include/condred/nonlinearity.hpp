#pragma once

// Cubic nonlinearity g(u) = |u|^2 u and its transversally filtered forms
//   F(theta, Phi) = e^{i theta H_z} g(e^{-i theta H_z} Phi)
//   F_av(Phi)     = (1/2pi) int_0^{2pi} F(theta, Phi) dtheta.
// All operations act column by column in x; the cubic is applied in node
// space on the sqrt(2)-scaled Gauss-Hermite nodes, where the projection back
// onto the truncated modes is exact.

#include <span>
#include <vector>

#include "condred/field_space.hpp"

namespace condred {

std::vector<Complex> cubic(std::span<const Complex> values);

/// Projection of g onto the truncated modes, column-wise on coefficients.
Eigen::MatrixXcd cubic_projection(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis);

Eigen::MatrixXcd filtered_cubic(double theta, const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis);
Field F(double theta, const Field& field, const HermiteBasis& basis);

/// Smallest trapezoid size that averages the filtered cubic exactly.
int min_theta_samples(const HermiteBasis& basis);
int default_theta_samples(const HermiteBasis& basis);

Eigen::MatrixXcd averaged_cubic_quadrature(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis, int num_theta,
                                           double offset = 0.0);
Field F_av_quadrature(const Field& field, const HermiteBasis& basis, int num_theta);

/// Resonant sum over p - q + r = m with the quartic overlaps (d = 1).
Eigen::MatrixXcd averaged_cubic_resonance(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis);
Field F_av_resonance(const Field& field, const HermiteBasis& basis);

/// F_av by the fastest exact route for the basis dimension.
Eigen::MatrixXcd averaged_cubic(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis);

}  // namespace condred
