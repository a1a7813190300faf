#include "camg/krylov.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

namespace camg {

LinearOperator as_operator(const SparseMatrix& A) {
  return {A.nrows, [&A](std::span<const double> x, std::span<double> y) {
            spmv(A, x, y);
          }};
}

LinearOperator identity_operator(index_t n) {
  return {n, [](std::span<const double> x, std::span<double> y) {
            std::copy(x.begin(), x.end(), y.begin());
          }};
}

std::pair<double, double> tridiagonal_extremal_eigs(std::span<const double> diag,
                                                    std::span<const double> offdiag) {
  const index_t n = static_cast<index_t>(diag.size());
  if (n == 0) return {0.0, 0.0};
  if (n == 1) return {diag[0], diag[0]};
  // Gershgorin bounds.
  double lo = diag[0], hi = diag[0];
  for (index_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(offdiag[i - 1]);
    if (i + 1 < n) r += std::abs(offdiag[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  // Sturm count: number of eigenvalues below x.
  auto count_below = [&](double x) {
    index_t count = 0;
    double q = diag[0] - x;
    if (q < 0.0) ++count;
    for (index_t i = 1; i < n; ++i) {
      double denom = q;
      if (denom == 0.0) denom = 1e-300;
      q = diag[i] - x - offdiag[i - 1] * offdiag[i - 1] / denom;
      if (q < 0.0) ++count;
    }
    return count;
  };
  auto bisect = [&](index_t k) {  // k-th smallest (0-based)
    double a = lo, b = hi;
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (a + b);
      if (count_below(mid) > k)
        b = mid;
      else
        a = mid;
    }
    return 0.5 * (a + b);
  };
  return {bisect(0), bisect(n - 1)};
}

std::pair<std::vector<double>, SolveReport> pcg(const LinearOperator& A,
                                                const LinearOperator& B,
                                                std::span<const double> b,
                                                const PcgOptions& opt) {
  const index_t n = A.n;
  auto t0 = std::chrono::steady_clock::now();
  SolveReport report;
  std::vector<double> x(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n), Ap(n);
  B.apply(r, z);
  std::copy(z.begin(), z.end(), p.begin());

  double rz = dot(r, z);
  const double b_norm = norm2(b);
  const double rz0 = rz;
  if (rz < 0.0) {
    report.error = "indefinite preconditioner at iteration 0";
    return {x, report};
  }

  std::vector<double> alphas, betas;
  auto criterion_value = [&](double rz_cur, double r_norm) {
    if (opt.criterion == StoppingCriterion::rel_l2_residual)
      return b_norm > 0.0 ? r_norm / b_norm : r_norm;
    return rz0 > 0.0 ? std::sqrt(std::max(rz_cur, 0.0) / rz0) : 0.0;
  };

  double crit = criterion_value(rz, norm2(r));
  if (crit <= opt.tol || b_norm == 0.0) {
    report.converged = true;
    report.wall_time = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    return {x, report};
  }

  for (int it = 0; it < opt.max_iter; ++it) {
    A.apply(p, Ap);
    double pAp = dot(p, Ap);
    if (pAp <= 0.0) {
      report.error = "indefinite operator (p^T A p <= 0) at iteration " +
                     std::to_string(it + 1);
      break;
    }
    double alpha = rz / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    B.apply(r, z);
    double rz_new = dot(r, z);
    if (rz_new < 0.0) {
      report.error = "indefinite preconditioner at iteration " + std::to_string(it + 1);
      break;
    }
    double beta = rz_new / rz;
    alphas.push_back(alpha);
    betas.push_back(beta);
    rz = rz_new;
    report.iterations = it + 1;
    crit = criterion_value(rz, norm2(r));
    report.residual_history.push_back(crit);
    for (index_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    if (crit <= opt.tol) {
      report.converged = true;
      break;
    }
  }

  // Lanczos tridiagonal from the CG coefficients.
  const std::size_t m = alphas.size();
  if (m >= 1) {
    std::vector<double> tdiag(m), toff(m > 1 ? m - 1 : 0);
    for (std::size_t k = 0; k < m; ++k) {
      tdiag[k] = 1.0 / alphas[k];
      if (k > 0) tdiag[k] += betas[k - 1] / alphas[k - 1];
      if (k + 1 < m) toff[k] = std::sqrt(std::max(betas[k], 0.0)) / alphas[k];
    }
    auto [lmin, lmax] = tridiagonal_extremal_eigs(tdiag, toff);
    report.lambda_min = lmin;
    report.lambda_max = lmax;
    report.cond_estimate = lmin > 0.0 ? lmax / lmin : 1.0;
    if (report.cond_estimate < 1.0) report.cond_estimate = 1.0;
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {x, report};
}

std::pair<double, double> estimate_condition(const LinearOperator& A,
                                             const LinearOperator& B,
                                             std::span<const double> b, int n_iters) {
  PcgOptions opt;
  opt.tol = 0.0;
  opt.max_iter = n_iters;
  auto [x, report] = pcg(A, B, b, opt);
  (void)x;
  return {report.lambda_min, report.lambda_max};
}

void residual_history_to_csv(const SolveReport& report, std::ostream& out) {
  out << "iteration,residual\n";
  for (std::size_t i = 0; i < report.residual_history.size(); ++i)
    out << (i + 1) << "," << report.residual_history[i] << "\n";
}

}  // namespace camg
