#pragma once

#include <optional>

#include "camg/mesh.hpp"
#include "camg/sparse.hpp"

namespace camg {

enum class ModelKind { bidomain, emi, reduced_emi };
enum class CouplingKind { average, trace };

/// Problem parameters for the three model builders. Conductivities are in
/// mS cm^-1, gamma carries the membrane/time-step factor, rho is the coupling
/// radius in micrometers (reduced model only).
struct ProblemSpec {
  ModelKind model = ModelKind::bidomain;
  int dim = 2;
  index_t n = 8;  // cells per axis
  double alpha_e = 1.0;
  double alpha_i = 1.0;
  double gamma = 1.0;
  double rho = 1.0;
  CouplingKind coupling = CouplingKind::average;
  CurveKind curve = CurveKind::straight;
  bool lumped_mass = true;
  int quadrature_points = 8;
  std::array<double, 3> extents = {1.0, 1.0, 1.0};

  void validate() const;
};

struct BuildReport {
  index_t clamped_quadrature_points = 0;
};

/// The assembled metric-perturbed system gamma*A0 + A1 with its coupling map.
/// A0 equals R^T * M_gamma * R on the stored pattern; rows of R correspond to
/// interface DOFs listed in gamma_dof_of_row.
struct CoupledSystem {
  SparseMatrix A1;       // elliptic part, block diagonal over fields
  SparseMatrix A0;       // metric term R^T M_gamma R
  double gamma = 1.0;
  SparseMatrix R;        // n_gamma x n_total coupling map
  SparseMatrix M_gamma;  // interface mass (lumped by default)
  DofPartition partition;
  std::vector<index_t> gamma_dof_of_row;
  std::vector<std::array<double, 3>> dof_coords;

  std::vector<index_t> bc_indices;
  std::vector<double> bc_values;
  std::vector<double> bc_rhs_correction;  // eliminated-column action
  std::vector<double> bc_diag;            // preserved diagonals at bc rows

  /// All-ones kernel direction of the pure-Neumann builders; nullopt once the
  /// system is grounded by Dirichlet data.
  std::optional<std::vector<double>> neumann_kernel;
  BuildReport report;

  index_t n_total() const { return partition.n_total; }
  SparseMatrix system_matrix() const;  // gamma*A0 + A1
  /// Apply the recorded Dirichlet data to a right-hand side.
  void constrain_rhs(std::span<double> f) const;
};

/// P1 stiffness with cellwise coefficient kappa; zero row sums before any
/// boundary conditions. Throws on degenerate cells.
SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> kappa);
SparseMatrix assemble_stiffness(const Mesh& mesh, double kappa = 1.0);

/// P1 mass, consistent or row-sum lumped.
SparseMatrix assemble_mass(const Mesh& mesh, bool lumped);

/// P1 mass over the facets carrying the given tag. The matrix is indexed by
/// position in vertex_order (ascending facet-vertex ids of that tag).
SparseMatrix assemble_facet_mass(const Mesh& mesh, int facet_tag, bool lumped,
                                 std::vector<index_t>& vertex_order);

/// Arc-length P1 operators on an embedded curve. The stiffness coefficient is
/// cross-section-scaled per segment (kappa * pi * rho^2); the lumped mass is
/// perimeter-scaled per vertex (2 * pi * rho).
SparseMatrix curve_stiffness(const Curve1D& curve, double kappa);
SparseMatrix curve_mass(const Curve1D& curve, bool lumped);

/// Circle-average coupling operator (n_curve x n_mesh_vertices): midpoint
/// quadrature on the circle of radius rho normal to the curve, values by P1
/// interpolation. Points leaving the box are clamped to its boundary and
/// counted in the report.
SparseMatrix averaging_operator(const Mesh& mesh3d, const Curve1D& curve,
                                int quadrature_points, BuildReport* report = nullptr);

/// Element-local trace coupling: equal-weight average over the vertices of
/// one cell containing each (fitted) curve vertex.
SparseMatrix trace_operator(const Mesh& mesh3d, const Curve1D& curve);

CoupledSystem build_bidomain(const ProblemSpec& spec);
CoupledSystem build_emi(const ProblemSpec& spec);
CoupledSystem build_reduced_emi(const ProblemSpec& spec);
CoupledSystem build_system(const ProblemSpec& spec);

/// Symmetric Dirichlet elimination on a bare matrix: rows/columns zeroed,
/// diagonal kept at its pre-elimination value, eliminated column action
/// accumulated into rhs_correction.
void eliminate_dirichlet(SparseMatrix& A, std::span<const index_t> indices,
                         std::span<const double> values,
                         std::vector<double>& rhs_correction,
                         std::vector<double>& preserved_diag);

/// Dirichlet elimination on a coupled system (A1 rows/cols, R columns);
/// recomputes A0 and records the data needed by constrain_rhs.
CoupledSystem apply_dirichlet(CoupledSystem system, std::span<const index_t> indices,
                              std::span<const double> values);

ProblemSpec problem_spec_from_json(const std::string& text);
std::string problem_spec_to_json(const ProblemSpec& spec);

/// Write A, A0, A1, R as Matrix Market files <prefix>{A,A0,A1,R}.mtx.
void export_system(const CoupledSystem& system, const std::string& prefix);

}  // namespace camg
