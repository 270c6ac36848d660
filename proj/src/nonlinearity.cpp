#include "condred/nonlinearity.hpp"

#include <numbers>
#include <string>

#include "condred/error.hpp"

namespace condred {

std::vector<Complex> cubic(std::span<const Complex> values) {
  std::vector<Complex> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::norm(values[i]) * values[i];
  return out;
}

Eigen::MatrixXcd cubic_projection(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis) {
  if (coeffs.rows() != basis.mode_count()) {
    throw Error(ErrorKind::length_mismatch, "nonlinearity: coefficient rows do not match the basis");
  }
  Eigen::MatrixXcd nodes = real_times_complex(basis.cubic_synthesis(), coeffs);
  nodes.array() *= nodes.array().abs2();
  return real_times_complex(basis.cubic_analysis(), nodes);
}

Eigen::MatrixXcd filtered_cubic(double theta, const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis) {
  Eigen::MatrixXcd work = coeffs;
  propagate_in_place(theta, work, basis);
  work = cubic_projection(work, basis);
  propagate_in_place(-theta, work, basis);
  return work;
}

Field F(double theta, const Field& field, const HermiteBasis& basis) {
  Field out = field;
  out.data = filtered_cubic(theta, field.data, basis);
  return out;
}

int min_theta_samples(const HermiteBasis& basis) { return 3 * (basis.max_eigenvalue() + 1) + 1; }

int default_theta_samples(const HermiteBasis& basis) { return 3 * (basis.max_eigenvalue() + 1) + 4; }

Eigen::MatrixXcd averaged_cubic_quadrature(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis, int num_theta,
                                           double offset) {
  if (num_theta < min_theta_samples(basis)) {
    throw Error(ErrorKind::insufficient_theta_samples,
                "F_av_quadrature: " + std::to_string(num_theta) + " samples is below the exactness bound " +
                    std::to_string(min_theta_samples(basis)));
  }
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(coeffs.rows(), coeffs.cols());
  const double h = 2.0 * std::numbers::pi / num_theta;
  for (int j = 0; j < num_theta; ++j) sum += filtered_cubic(offset + j * h, coeffs, basis);
  return sum / static_cast<double>(num_theta);
}

Field F_av_quadrature(const Field& field, const HermiteBasis& basis, int num_theta) {
  Field out = field;
  out.data = averaged_cubic_quadrature(field.data, basis, num_theta);
  return out;
}

Eigen::MatrixXcd averaged_cubic_resonance(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis) {
  if (basis.dim_d() != 1) {
    throw Error(ErrorKind::unsupported_dimension, "F_av_resonance is only implemented for d = 1");
  }
  const int n = basis.num_modes();
  if (coeffs.rows() != n) throw Error(ErrorKind::length_mismatch, "F_av_resonance: coefficient rows");

  // gamma is symmetric, so the (p, r) and (r, p) terms coincide: sum over
  // p <= r with weight 2 off the diagonal, reusing the pair products c_p c_r.
  struct Term {
    int pair, q, m;
    double weight;
  };
  std::vector<std::pair<int, int>> pairs;
  std::vector<Term> terms;
  for (int p = 0; p < n; ++p)
    for (int r = p; r < n; ++r) {
      const int pair = static_cast<int>(pairs.size());
      pairs.emplace_back(p, r);
      for (int m = 0; m < n; ++m) {
        const int q = p + r - m;
        if (q < 0 || q >= n) continue;
        const double g = basis.quartic(p, q, r, m);
        if (g != 0.0) terms.push_back({pair, q, m, (p == r ? 1.0 : 2.0) * g});
      }
    }

  // columns run along the contiguous axis so each term is one vector update
  const Eigen::Index cols = coeffs.cols();
  const Eigen::MatrixXcd ct = coeffs.transpose();
  const Eigen::MatrixXcd conj_ct = ct.conjugate();
  Eigen::MatrixXcd products(cols, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    products.col(k).array() = ct.col(pairs[k].first).array() * ct.col(pairs[k].second).array();
  }
  Eigen::MatrixXcd out_t = Eigen::MatrixXcd::Zero(cols, n);
  for (const Term& t : terms) {
    out_t.col(t.m).array() += t.weight * (products.col(t.pair).array() * conj_ct.col(t.q).array());
  }
  return out_t.transpose();
}

Field F_av_resonance(const Field& field, const HermiteBasis& basis) {
  Field out = field;
  out.data = averaged_cubic_resonance(field.data, basis);
  return out;
}

Eigen::MatrixXcd averaged_cubic(const Eigen::MatrixXcd& coeffs, const HermiteBasis& basis) {
  if (basis.dim_d() == 1) return averaged_cubic_resonance(coeffs, basis);
  return averaged_cubic_quadrature(coeffs, basis, default_theta_samples(basis));
}

}  // namespace condred
