#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "condred/error.hpp"
#include "condred/field_space.hpp"

namespace condred {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per (n, nx, rows) and shared.
struct SpectralX::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Plans() = default;
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
  ~Plans() {
    std::lock_guard lock(mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  static std::mutex& mutex() {
    static std::mutex m;
    return m;
  }
};

namespace {

using PlanKey = std::tuple<int, int, int>;

std::shared_ptr<const SpectralX::Plans> make_plans(int dim_n, int nx, int rows);

}  // namespace

SpectralX::SpectralX(const GridSpec& grid, int rows) : grid_(grid), rows_(rows) {
  xi_.resize(static_cast<std::size_t>(grid.nx));
  const double base = std::numbers::pi / grid.half_width;
  for (int j = 0; j < grid.nx; ++j) {
    const int signed_j = j <= grid.nx / 2 ? j : j - grid.nx;
    xi_[j] = base * signed_j;
  }
  Plans::mutex();  // constructed before the cache so it outlives it
  static std::mutex cache_mutex;
  static std::map<PlanKey, std::shared_ptr<const Plans>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{grid.dim_n, grid.nx, rows}];
  if (!slot) slot = make_plans(grid.dim_n, grid.nx, rows);
  plans_ = slot;
}

namespace {

std::shared_ptr<const SpectralX::Plans> make_plans(int dim_n, int nx, int rows) {
  auto plans = std::make_shared<SpectralX::Plans>();
  const int points = dim_n == 1 ? nx : nx * nx;
  std::vector<fftw_iodim> dims;
  if (dim_n == 1) {
    dims.push_back({nx, rows, rows});
  } else {
    dims.push_back({nx, rows * nx, rows * nx});
    dims.push_back({nx, rows, rows});
  }
  fftw_iodim howmany{rows, 1, 1};
  std::vector<fftw_complex> in(static_cast<std::size_t>(rows) * points);
  std::vector<fftw_complex> out(in.size());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(SpectralX::Plans::mutex());
  plans->forward = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(), 1, &howmany, in.data(),
                                      out.data(), FFTW_FORWARD, flags);
  plans->backward = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(), 1, &howmany, in.data(),
                                       out.data(), FFTW_BACKWARD, flags);
  if (!plans->forward || !plans->backward) {
    throw Error(ErrorKind::invalid_argument, "FFTW could not plan the x-transform");
  }
  return plans;
}

}  // namespace

double SpectralX::xi_max() const { return std::numbers::pi / grid_.dx(); }

Eigen::MatrixXcd SpectralX::forward(const Eigen::MatrixXcd& values) const {
  Eigen::MatrixXcd out(values.rows(), values.cols());
  fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(values.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::MatrixXcd SpectralX::backward(const Eigen::MatrixXcd& spectrum) const {
  Eigen::MatrixXcd out(spectrum.rows(), spectrum.cols());
  fftw_execute_dft(plans_->backward, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(spectrum.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  out /= static_cast<double>(grid_.num_points());
  return out;
}

Complex SpectralX::multiplier(int index, int order) const {
  if (order == 0) return 1.0;
  if (order % 2 == 1 && 2 * index == grid_.nx) return 0.0;
  Complex m = 1.0;
  const Complex ik(0.0, xi_[index]);
  for (int k = 0; k < order; ++k) m *= ik;
  return m;
}

Eigen::MatrixXcd SpectralX::derivative(const Eigen::MatrixXcd& values, int axis, int order) const {
  if (order == 0) return values;
  Eigen::MatrixXcd spec = forward(values);
  for (Eigen::Index p = 0; p < spec.cols(); ++p) {
    const auto idx = grid_.point_index(static_cast<int>(p));
    spec.col(p) *= multiplier(idx[axis], order);
  }
  return backward(spec);
}

void SpectralX::gradient_laplacian(const Eigen::MatrixXcd& values, std::vector<Eigen::MatrixXcd>& gradient,
                                   Eigen::MatrixXcd& laplacian) const {
  const Eigen::MatrixXcd spec = forward(values);
  const int n = grid_.dim_n;
  gradient.resize(static_cast<std::size_t>(n));
  Eigen::MatrixXcd work(spec.rows(), spec.cols());
  for (int axis = 0; axis < n; ++axis) {
    for (Eigen::Index p = 0; p < spec.cols(); ++p) {
      const auto idx = grid_.point_index(static_cast<int>(p));
      work.col(p) = spec.col(p) * multiplier(idx[axis], 1);
    }
    gradient[axis] = backward(work);
  }
  for (Eigen::Index p = 0; p < spec.cols(); ++p) {
    const auto idx = grid_.point_index(static_cast<int>(p));
    double k2 = xi_[idx[0]] * xi_[idx[0]];
    if (n == 2) k2 += xi_[idx[1]] * xi_[idx[1]];
    work.col(p) = -k2 * spec.col(p);
  }
  laplacian = backward(work);
}

}  // namespace condred
