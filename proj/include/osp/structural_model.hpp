#pragma once

// Uniform shear-building model, modal decomposition and closed-form forced
// response under sinusoidal ground acceleration with Rayleigh damping.

#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/AutoDiff>

#include "osp/errors.hpp"

namespace osp {

inline constexpr int kNumParams = 5;

// Index of each uncertain system parameter inside gradient vectors.
enum class Param : int { omega0 = 0, alpha = 1, beta = 2, omega = 3, a0 = 4 };

inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "omega0", "alpha", "beta", "omega", "a0"};

struct SystemParameters {
  double omega0 = 2.0 * M_PI;  // nominal natural frequency [rad/s]
  double alpha = 0.1;          // mass-proportional damping [1/s]
  double beta = 1e-4;          // stiffness-proportional damping [s]
  double omega = 2.0 * M_PI;   // forcing frequency [rad/s]
  double a0 = 1.0;             // ground acceleration amplitude [m/s^2]

  double operator[](Param p) const { return as_array()[static_cast<int>(p)]; }

  std::array<double, kNumParams> as_array() const { return {omega0, alpha, beta, omega, a0}; }

  static SystemParameters from_array(const std::array<double, kNumParams>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }

  bool operator==(const SystemParameters&) const = default;
};

struct TimeGrid {
  std::size_t n_steps = 1000;
  double dt = 0.01;

  TimeGrid() = default;
  TimeGrid(std::size_t n, double step) : n_steps(n), dt(step) {
    if (n == 0) throw InvalidArgument("time grid needs at least one step");
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("time step dt must be positive");
  }

  // t_n = n * dt for the 0-based row index (row 0 is t = dt).
  double time(std::size_t row) const { return static_cast<double>(row + 1) * dt; }
};

// Mass/stiffness patterns M*, K* with their generalized eigendata. Immutable
// after construction.
class ShearBuildingModel {
 public:
  ShearBuildingModel(Eigen::MatrixXd mass_pattern, Eigen::MatrixXd stiffness_pattern)
      : mass_(std::move(mass_pattern)), stiffness_(std::move(stiffness_pattern)) {
    const auto n = mass_.rows();
    if (n == 0 || mass_.cols() != n || stiffness_.rows() != n || stiffness_.cols() != n)
      throw InvalidArgument("mass and stiffness patterns must be square and of equal size");
    if (!mass_.isApprox(mass_.transpose(), 1e-14) ||
        !stiffness_.isApprox(stiffness_.transpose(), 1e-14))
      throw InvalidArgument("mass and stiffness patterns must be symmetric");

    // K phi = c^2 M phi, reduced internally through the Cholesky factor of M.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        stiffness_, mass_, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
      throw InvalidArgument("generalized eigenproblem failed (mass pattern not SPD?)");

    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
    if (eigenvalues_(0) <= 0.0) throw InvalidArgument("stiffness pattern must be positive definite");

    for (Eigen::Index j = 0; j < n; ++j) {
      auto col = eigenvectors_.col(j);
      col.normalize();
      // Deterministic sign: largest-magnitude entry positive (first on ties).
      Eigen::Index at = 0;
      col.cwiseAbs().maxCoeff(&at);
      if (col(at) < 0.0) col = -col;
    }
    modal_masses_ = (eigenvectors_.transpose() * mass_ * eigenvectors_).diagonal();
    modal_stiffnesses_ = (eigenvectors_.transpose() * stiffness_ * eigenvectors_).diagonal();
    participation_ = eigenvectors_.colwise().sum().transpose();
  }

  std::size_t n_dof() const { return static_cast<std::size_t>(mass_.rows()); }
  const Eigen::MatrixXd& mass_pattern() const { return mass_; }
  const Eigen::MatrixXd& stiffness_pattern() const { return stiffness_; }
  // c_j^2, ascending.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  // Columns are unit-norm mode shapes.
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  const Eigen::VectorXd& modal_masses() const { return modal_masses_; }
  const Eigen::VectorXd& modal_stiffnesses() const { return modal_stiffnesses_; }
  // Phi_j^T 1 for each mode.
  const Eigen::VectorXd& participation() const { return participation_; }

 private:
  Eigen::MatrixXd mass_;
  Eigen::MatrixXd stiffness_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd modal_masses_;
  Eigen::VectorXd modal_stiffnesses_;
  Eigen::VectorXd participation_;
};

// M* = I, K* tridiagonal (2 on the diagonal, 1 at the roof, -1 off-diagonal).
inline ShearBuildingModel build_uniform_shear_model(std::size_t n_dof) {
  if (n_dof == 0) throw InvalidArgument("n_dof must be at least 1");
  const auto n = static_cast<Eigen::Index>(n_dof);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = (i + 1 == n) ? 1.0 : 2.0;
    if (i + 1 < n) k(i, i + 1) = k(i + 1, i) = -1.0;
  }
  return ShearBuildingModel(Eigen::MatrixXd::Identity(n, n), std::move(k));
}

namespace detail {

inline double scalar_value(double v) { return v; }
template <class D>
double scalar_value(const Eigen::AutoDiffScalar<D>& v) {
  return v.value();
}

// Time-independent pieces of one mode's closed-form response
//   q(t) = amp * [ e^{-decay t} (c_sin_d sin(wd t) + c_cos cos(wd t))
//                  + c_sin_w sin(w t) - c_cos cos(w t) ]
template <class T>
struct ModeTerms {
  T amp;      // a_j / D
  T c_sin_d;  // (w^3 + w_j^2 w (2 zeta^2 - 1)) / w_d
  T c_cos;    // 2 zeta w_j w
  T c_sin_w;  // w_j^2 - w^2
  T decay;    // zeta w_j
  T omega_d;  // w_j sqrt(1 - zeta^2)
  T omega;    // forcing frequency
};

template <class T>
ModeTerms<T> mode_terms(const std::array<T, kNumParams>& theta, double c2, double modal_mass,
                        double participation, int mode) {
  using std::sqrt;
  const T& omega0 = theta[0];
  const T& alpha = theta[1];
  const T& beta = theta[2];
  const T& omega = theta[3];
  const T& a0 = theta[4];

  const T wj2 = c2 * omega0 * omega0;
  const T wj = sqrt(wj2);
  const T decay = 0.5 * (alpha + beta * wj2);
  const double zeta = scalar_value(decay) / scalar_value(wj);
  if (!(zeta < 1.0)) throw UnsupportedDamping(mode, zeta);

  const T wd = sqrt(wj2 - decay * decay);
  const T two_zw_w = 2.0 * decay * omega;
  const T detune = wj2 - omega * omega;
  const T denom = detune * detune + two_zw_w * two_zw_w;
  const T forcing = -a0 * (participation / modal_mass);

  return ModeTerms<T>{forcing / denom,
                      (omega * omega * omega + omega * (2.0 * decay * decay - wj2)) / wd,
                      two_zw_w,
                      detune,
                      decay,
                      wd,
                      omega};
}

using Grad = Eigen::Matrix<double, kNumParams, 1>;
using AD = Eigen::AutoDiffScalar<Grad>;

inline std::array<AD, kNumParams> seeded(const SystemParameters& theta) {
  const auto v = theta.as_array();
  std::array<AD, kNumParams> out;
  for (int p = 0; p < kNumParams; ++p) out[p] = AD(v[p], kNumParams, p);
  return out;
}

}  // namespace detail

// Modal coordinates q[n][j] at t_n for every mode. Throws UnsupportedDamping
// if any mode has zeta >= 1.
inline Eigen::MatrixXd modal_response(const ShearBuildingModel& model, const SystemParameters& theta,
                                      const TimeGrid& grid) {
  const auto nd = static_cast<Eigen::Index>(model.n_dof());
  const auto nt = static_cast<Eigen::Index>(grid.n_steps);
  Eigen::MatrixXd q(nt, nd);
  const auto th = theta.as_array();
  for (Eigen::Index j = 0; j < nd; ++j) {
    const auto m = detail::mode_terms<double>(th, model.eigenvalues()(j), model.modal_masses()(j),
                                              model.participation()(j), static_cast<int>(j));
    for (Eigen::Index n = 0; n < nt; ++n) {
      const double t = grid.time(static_cast<std::size_t>(n));
      const double e = std::exp(-m.decay * t);
      q(n, j) = m.amp * (e * (m.c_sin_d * std::sin(m.omega_d * t) + m.c_cos * std::cos(m.omega_d * t)) +
                         m.c_sin_w * std::sin(m.omega * t) - m.c_cos * std::cos(m.omega * t));
    }
  }
  return q;
}

// Single mode evaluated at an arbitrary time (used for residual checks).
inline double modal_response_at(const ShearBuildingModel& model, const SystemParameters& theta,
                                std::size_t mode, double t) {
  const auto j = static_cast<Eigen::Index>(mode);
  const auto m = detail::mode_terms<double>(theta.as_array(), model.eigenvalues()(j),
                                            model.modal_masses()(j), model.participation()(j),
                                            static_cast<int>(mode));
  const double e = std::exp(-m.decay * t);
  return m.amp * (e * (m.c_sin_d * std::sin(m.omega_d * t) + m.c_cos * std::cos(m.omega_d * t)) +
                  m.c_sin_w * std::sin(m.omega * t) - m.c_cos * std::cos(m.omega * t));
}

// x[n][i] = sum_j Phi[i][j] q[n][j].
inline Eigen::MatrixXd physical_response(const ShearBuildingModel& model, const Eigen::MatrixXd& q) {
  if (q.cols() != static_cast<Eigen::Index>(model.n_dof()))
    throw InvalidArgument("modal matrix has " + std::to_string(q.cols()) + " columns, model has " +
                          std::to_string(model.n_dof()) + " modes");
  return q * model.eigenvectors().transpose();
}

// d x_i(t_n) / d theta_p, stored as one N x N_d matrix per parameter.
struct SensitivityField {
  std::array<Eigen::MatrixXd, kNumParams> by_param;

  std::size_t n_steps() const { return static_cast<std::size_t>(by_param[0].rows()); }
  std::size_t n_dof() const { return static_cast<std::size_t>(by_param[0].cols()); }

  double operator()(std::size_t n, std::size_t i, int p) const {
    return by_param[p](static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i));
  }
  const Eigen::MatrixXd& operator[](Param p) const { return by_param[static_cast<int>(p)]; }
};

// Analytic sensitivities of the physical response. Mode constants are
// differentiated with forward-mode AD; the time-dependent factors are
// differentiated by hand.
inline SensitivityField response_sensitivities(const ShearBuildingModel& model,
                                               const SystemParameters& theta, const TimeGrid& grid) {
  const auto nd = static_cast<Eigen::Index>(model.n_dof());
  const auto nt = static_cast<Eigen::Index>(grid.n_steps);
  std::array<Eigen::MatrixXd, kNumParams> dq;
  for (auto& m : dq) m.resize(nt, nd);

  const auto th = detail::seeded(theta);
  for (Eigen::Index j = 0; j < nd; ++j) {
    const auto m = detail::mode_terms<detail::AD>(th, model.eigenvalues()(j), model.modal_masses()(j),
                                                  model.participation()(j), static_cast<int>(j));
    const double amp = m.amp.value(), c1 = m.c_sin_d.value(), c2 = m.c_cos.value();
    const double c3 = m.c_sin_w.value(), sigma = m.decay.value();
    const double wd = m.omega_d.value(), w = m.omega.value();
    const detail::Grad& d_amp = m.amp.derivatives();
    const detail::Grad& d_c1 = m.c_sin_d.derivatives();
    const detail::Grad& d_c2 = m.c_cos.derivatives();
    const detail::Grad& d_c3 = m.c_sin_w.derivatives();
    const detail::Grad& d_sigma = m.decay.derivatives();
    const detail::Grad& d_wd = m.omega_d.derivatives();
    const detail::Grad& d_w = m.omega.derivatives();

    for (Eigen::Index n = 0; n < nt; ++n) {
      const double t = grid.time(static_cast<std::size_t>(n));
      const double e = std::exp(-sigma * t);
      const double sd = std::sin(wd * t), cd = std::cos(wd * t);
      const double sw = std::sin(w * t), cw = std::cos(w * t);
      const double transient = c1 * sd + c2 * cd;
      const double bracket = e * transient + c3 * sw - c2 * cw;

      const detail::Grad d_bracket = e * (d_c1 * sd + d_c2 * cd) - (e * t * transient) * d_sigma +
                                     (e * t * (c1 * cd - c2 * sd)) * d_wd + d_c3 * sw - d_c2 * cw +
                                     (t * (c3 * cw + c2 * sw)) * d_w;
      const detail::Grad d_q = d_amp * bracket + amp * d_bracket;
      for (int p = 0; p < kNumParams; ++p) dq[p](n, j) = d_q(p);
    }
  }

  SensitivityField field;
  for (int p = 0; p < kNumParams; ++p) field.by_param[p] = physical_response(model, dq[p]);
  return field;
}

}  // namespace osp
