#pragma once

#include <functional>
#include <string>

#include "camg/sparse.hpp"

namespace camg {

/// Matrix-free operator action y = Op x.
struct LinearOperator {
  index_t n = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
};

LinearOperator as_operator(const SparseMatrix& A);
LinearOperator identity_operator(index_t n);

enum class StoppingCriterion { rel_l2_residual, rel_precond_residual };

struct PcgOptions {
  double tol = 1e-10;
  int max_iter = 500;
  StoppingCriterion criterion = StoppingCriterion::rel_precond_residual;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  // chosen criterion value per iteration
  bool converged = false;
  double cond_estimate = 1.0;  // lambda_max/lambda_min of the Lanczos tridiagonal
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double wall_time = 0.0;  // seconds
  std::string error;       // nonempty on breakdown (indefinite operator etc.)
};

/// Preconditioned conjugate gradients with zero initial guess. The Lanczos
/// tridiagonal is accumulated from the CG coefficients; its extremal Ritz
/// values give lower/upper-biased eigenvalue estimates of the preconditioned
/// operator.
std::pair<std::vector<double>, SolveReport> pcg(const LinearOperator& A,
                                                const LinearOperator& B,
                                                std::span<const double> b,
                                                const PcgOptions& options);

/// Extremal Ritz values after n_iters PCG steps (tolerance ignored).
std::pair<double, double> estimate_condition(const LinearOperator& A,
                                             const LinearOperator& B,
                                             std::span<const double> b, int n_iters);

/// Extremal eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.
std::pair<double, double> tridiagonal_extremal_eigs(std::span<const double> diag,
                                                    std::span<const double> offdiag);

void residual_history_to_csv(const SolveReport& report, std::ostream& out);

}  // namespace camg
