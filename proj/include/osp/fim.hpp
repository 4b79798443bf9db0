#pragma once

// Elementary Fisher-information matrices and the Monte-Carlo estimators of
// the relaxed objective h(z) = -E[log det Q(z)], its gradient and Hessian.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/StdVector>

#include "osp/errors.hpp"
#include "osp/parallel.hpp"
#include "osp/priors.hpp"
#include "osp/structural_model.hpp"

namespace osp {

using InfoMatrix = Eigen::Matrix<double, kNumParams, kNumParams>;

// Q^(i)(theta_k) for every sample k and location i, stored sample-major.
class ElementaryFimSet {
 public:
  ElementaryFimSet(std::size_t n_samples, std::size_t n_dof)
      : n_samples_(n_samples), n_dof_(n_dof), matrices_(n_samples * n_dof, InfoMatrix::Zero()) {}

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_dof() const { return n_dof_; }
  static constexpr int n_params() { return kNumParams; }

  const InfoMatrix& at(std::size_t k, std::size_t i) const { return matrices_[k * n_dof_ + i]; }
  InfoMatrix& at(std::size_t k, std::size_t i) { return matrices_[k * n_dof_ + i]; }

 private:
  std::size_t n_samples_;
  std::size_t n_dof_;
  std::vector<InfoMatrix, Eigen::aligned_allocator<InfoMatrix>> matrices_;
};

// Q^(i) = sum_n g_{n,i} g_{n,i}^T with g_{n,i} = d x_i(t_n) / d theta.
inline std::vector<InfoMatrix, Eigen::aligned_allocator<InfoMatrix>> elementary_matrices(
    const SensitivityField& sens) {
  const auto nt = static_cast<Eigen::Index>(sens.n_steps());
  const std::size_t nd = sens.n_dof();
  std::vector<InfoMatrix, Eigen::aligned_allocator<InfoMatrix>> out(nd);
  Eigen::Matrix<double, Eigen::Dynamic, kNumParams> g(nt, kNumParams);
  for (std::size_t i = 0; i < nd; ++i) {
    for (int p = 0; p < kNumParams; ++p) g.col(p) = sens.by_param[p].col(static_cast<Eigen::Index>(i));
    out[i].noalias() = g.transpose() * g;
    out[i] = 0.5 * (out[i] + out[i].transpose()).eval();
  }
  return out;
}

// Sensitivities and elementary matrices for every prior sample. Samples are
// independent and computed in parallel.
inline ElementaryFimSet build_elementary_set(const ShearBuildingModel& model, const SampleSet& samples,
                                             const TimeGrid& grid) {
  ElementaryFimSet set(samples.size(), model.n_dof());
  parallel_for(samples.size(), [&](std::size_t k) {
    const auto q = elementary_matrices(response_sensitivities(model, samples[k], grid));
    for (std::size_t i = 0; i < q.size(); ++i) set.at(k, i) = q[i];
  });
  return set;
}

// Q(z) = sum_i z_i Q^(i), for a single sample's elementary matrices.
inline InfoMatrix assemble_q(const Eigen::VectorXd& z, const ElementaryFimSet& set, std::size_t sample) {
  if (static_cast<std::size_t>(z.size()) != set.n_dof())
    throw InvalidArgument("sensor vector has length " + std::to_string(z.size()) + ", expected " +
                          std::to_string(set.n_dof()));
  InfoMatrix q = InfoMatrix::Zero();
  for (std::size_t i = 0; i < set.n_dof(); ++i) {
    const double zi = z(static_cast<Eigen::Index>(i));
    if (zi != 0.0) q += zi * set.at(sample, i);
  }
  return q;
}

template <class Elements>
InfoMatrix assemble_q(const Eigen::VectorXd& z, const Elements& elems) {
  if (static_cast<std::size_t>(z.size()) != elems.size())
    throw InvalidArgument("sensor vector has length " + std::to_string(z.size()) + ", expected " +
                          std::to_string(elems.size()));
  InfoMatrix q = InfoMatrix::Zero();
  for (std::size_t i = 0; i < elems.size(); ++i) q += z(static_cast<Eigen::Index>(i)) * elems[i];
  return q;
}

namespace detail {

// Relative pivot floor: pivot^2 <= kPivotFloor * Q_jj marks the matrix as
// numerically singular. Invariant under diagonal rescaling of parameters.
inline constexpr double kPivotFloor = 64.0 * 2.220446049250313e-16;

template <class Matrix>
bool factor_pd(const Matrix& q, Eigen::LLT<Matrix>& llt) {
  llt.compute(q);
  if (llt.info() != Eigen::Success) return false;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index j = 0; j < q.rows(); ++j) {
    const double pivot = l(j, j);
    if (!(pivot > 0.0) || !std::isfinite(pivot) || pivot * pivot <= kPivotFloor * q(j, j)) return false;
  }
  return true;
}

template <class Matrix>
double logdet_from(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace detail

// ln det Q through a Cholesky factorization.
template <class Matrix>
double logdet_pd(const Eigen::MatrixBase<Matrix>& q) {
  using Plain = typename Matrix::PlainObject;
  const Plain m = q;
  if (m.rows() != m.cols()) throw InvalidArgument("logdet_pd needs a square matrix");
  Eigen::LLT<Plain> llt;
  if (!detail::factor_pd(m, llt)) throw SingularInformation("information matrix is not positive definite");
  return detail::logdet_from(llt);
}

// Monte-Carlo estimate h(z) = -(1/N_k) sum_k log det Q(z, theta_k).
struct McEstimate {
  double objective = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

enum McParts : unsigned { kObjective = 1u, kGradient = 2u, kHessian = 4u };

namespace detail {

// Samples are reduced in fixed-size blocks; blocks are summed in order, so
// the result is independent of the number of worker threads.
inline constexpr std::size_t kReductionBlock = 32;

inline SingularInformation singular_at(std::size_t k) {
  return SingularInformation("information matrix Q(z) is not positive definite for prior sample " +
                                 std::to_string(k),
                             static_cast<long>(k));
}

}  // namespace detail

inline McEstimate mc_evaluate(const Eigen::VectorXd& z, const ElementaryFimSet& set,
                              unsigned parts = kObjective | kGradient | kHessian) {
  const std::size_t nd = set.n_dof();
  const std::size_t nk = set.n_samples();
  if (static_cast<std::size_t>(z.size()) != nd)
    throw InvalidArgument("sensor vector has length " + std::to_string(z.size()) + ", expected " +
                          std::to_string(nd));
  if (nk == 0) throw InvalidArgument("elementary set has no samples");

  const auto ndi = static_cast<Eigen::Index>(nd);
  const bool want_grad = parts & kGradient;
  const bool want_hess = parts & kHessian;
  const std::size_t n_blocks = (nk + detail::kReductionBlock - 1) / detail::kReductionBlock;
  std::vector<McEstimate> partial(n_blocks);

  parallel_for(n_blocks, [&](std::size_t b) {
    McEstimate& acc = partial[b];
    if (want_grad) acc.gradient = Eigen::VectorXd::Zero(ndi);
    if (want_hess) acc.hessian = Eigen::MatrixXd::Zero(ndi, ndi);
    // Rows are vec(L^{-1} Q^(i) L^{-T}); tr(Q^-1 Q^(p) Q^-1 Q^(q)) is the
    // Frobenius product of rows p and q.
    Eigen::Matrix<double, Eigen::Dynamic, kNumParams * kNumParams> whitened;
    if (want_hess) whitened.resize(ndi, kNumParams * kNumParams);

    Eigen::LLT<InfoMatrix> llt;
    const std::size_t end = std::min(nk, (b + 1) * detail::kReductionBlock);
    for (std::size_t k = b * detail::kReductionBlock; k < end; ++k) {
      const InfoMatrix q = assemble_q(z, set, k);
      if (!detail::factor_pd(q, llt)) throw detail::singular_at(k);
      acc.objective += detail::logdet_from(llt);
      if (!(want_grad || want_hess)) continue;

      const InfoMatrix q_inv = llt.solve(InfoMatrix::Identity());
      const auto l = llt.matrixL();
      for (std::size_t i = 0; i < nd; ++i) {
        const InfoMatrix& qi = set.at(k, i);
        const auto ii = static_cast<Eigen::Index>(i);
        if (want_grad) acc.gradient(ii) += q_inv.cwiseProduct(qi).sum();
        if (want_hess) {
          InfoMatrix w = l.solve(qi);
          w = l.solve(w.transpose()).eval();
          whitened.row(ii) = Eigen::Map<const Eigen::Matrix<double, 1, kNumParams * kNumParams>>(w.data());
        }
      }
      if (want_hess) acc.hessian.noalias() += whitened * whitened.transpose();
    }
  });

  McEstimate out;
  if (want_grad) out.gradient = Eigen::VectorXd::Zero(ndi);
  if (want_hess) out.hessian = Eigen::MatrixXd::Zero(ndi, ndi);
  for (const auto& acc : partial) {
    out.objective += acc.objective;
    if (want_grad) out.gradient += acc.gradient;
    if (want_hess) out.hessian += acc.hessian;
  }
  const double scale = 1.0 / static_cast<double>(nk);
  out.objective *= -scale;
  if (want_grad) out.gradient *= -scale;
  if (want_hess) {
    out.hessian *= scale;
    out.hessian = (0.5 * (out.hessian + out.hessian.transpose())).eval();
  }
  return out;
}

inline double mc_objective(const Eigen::VectorXd& z, const ElementaryFimSet& set) {
  return mc_evaluate(z, set, kObjective).objective;
}

inline Eigen::VectorXd mc_gradient(const Eigen::VectorXd& z, const ElementaryFimSet& set) {
  return mc_evaluate(z, set, kGradient).gradient;
}

inline Eigen::MatrixXd mc_hessian(const Eigen::VectorXd& z, const ElementaryFimSet& set) {
  return mc_evaluate(z, set, kHessian).hessian;
}

// Rejects sample sets where even the uniformly spread configuration
// sum_i Q^(i) / N_d is not positive definite.
inline void preflight_check(const ElementaryFimSet& set) {
  const auto nd = static_cast<Eigen::Index>(set.n_dof());
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(nd, 1.0 / static_cast<double>(nd));
  Eigen::LLT<InfoMatrix> llt;
  for (std::size_t k = 0; k < set.n_samples(); ++k) {
    if (!detail::factor_pd(assemble_q(uniform, set, k), llt))
      throw SingularInformation("prior sample " + std::to_string(k) +
                                    " is degenerate: its full-support information matrix is singular",
                                static_cast<long>(k));
  }
}

// CSV dump keyed (k, i, p, q), 0-based sample and parameter indices,
// 1-based location index.
inline void write_elementary_csv(const ElementaryFimSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "sample,location,p,q,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < set.n_samples(); ++k)
    for (std::size_t i = 0; i < set.n_dof(); ++i)
      for (int p = 0; p < kNumParams; ++p)
        for (int q = 0; q < kNumParams; ++q)
          out << k << ',' << i + 1 << ',' << kParamNames[p] << ',' << kParamNames[q] << ','
              << set.at(k, i)(p, q) << '\n';
}

}  // namespace osp
