#include "camg/decomposition.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "camg/dense.hpp"

namespace camg {

std::vector<double> SubspaceDecomposition::pou_sum(std::span<const double> v) const {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    // sum_j chi_j = (count/count) = 1 per DOF, evaluated in integer arithmetic.
    index_t c = overlap_count[i];
    out[i] = c > 0 ? v[i] * (static_cast<double>(c) / static_cast<double>(c)) : 0.0;
  }
  return out;
}

std::vector<std::vector<index_t>> Aggregation::members() const {
  std::vector<std::vector<index_t>> out(n_agg);
  for (index_t i = 0; i < static_cast<index_t>(aggregate_of.size()); ++i)
    out[aggregate_of[i]].push_back(i);
  return out;
}

std::vector<double> Aggregation::coarse_average(std::span<const double> v) const {
  std::vector<double> sums(n_agg, 0.0);
  std::vector<index_t> counts(n_agg, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    sums[aggregate_of[i]] += v[i];
    counts[aggregate_of[i]]++;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = sums[aggregate_of[i]] / counts[aggregate_of[i]];
  return out;
}

Neighborhoods build_neighborhoods(const SparseMatrix& R, const DofPartition& partition,
                                  std::span<const index_t> gamma_dof_of_row) {
  if (static_cast<index_t>(gamma_dof_of_row.size()) != R.nrows)
    throw std::invalid_argument("build_neighborhoods: row map size mismatch");
  Neighborhoods nb;
  nb.owner_dofs.reserve(partition.omega.size() + partition.upsilon_minus_gamma.size());
  nb.owner_dofs.insert(nb.owner_dofs.end(), partition.omega.begin(),
                       partition.omega.end());
  nb.owner_dofs.insert(nb.owner_dofs.end(), partition.upsilon_minus_gamma.begin(),
                       partition.upsilon_minus_gamma.end());
  std::sort(nb.owner_dofs.begin(), nb.owner_dofs.end());

  std::vector<index_t> pos(partition.n_total, -1);
  for (index_t p = 0; p < nb.n_owners(); ++p) pos[nb.owner_dofs[p]] = p;

  std::vector<std::vector<index_t>> lists(nb.owner_dofs.size());
  for (index_t k = 0; k < R.nrows; ++k) {
    for (index_t e = R.row_offsets[k]; e < R.row_offsets[k + 1]; ++e) {
      index_t col = R.col_indices[e];
      if (pos[col] < 0) continue;  // interface column
      if (R.values[e] == 0.0) continue;
      lists[pos[col]].push_back(gamma_dof_of_row[k]);
    }
  }
  nb.offsets.assign(nb.owner_dofs.size() + 1, 0);
  for (index_t p = 0; p < nb.n_owners(); ++p) {
    auto& l = lists[p];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    nb.gamma_dofs.insert(nb.gamma_dofs.end(), l.begin(), l.end());
    nb.offsets[p + 1] = static_cast<index_t>(nb.gamma_dofs.size());
  }
  return nb;
}

namespace {

// Kernel frame of a patch: coefficient 1 at the owner, and for each coupled
// interface DOF the ratio -R[k, owner] / R[k, gamma(k)], so that R applied to
// the embedded vector vanishes row by row.
std::vector<double> patch_kernel_frame(const CoupledSystem& system, index_t owner,
                                       const std::vector<index_t>& patch,
                                       std::span<const index_t> nbhd_list,
                                       const std::vector<index_t>& row_of_gamma) {
  std::vector<double> frame(patch.size(), 0.0);
  auto at = [&](index_t dof) {
    return std::lower_bound(patch.begin(), patch.end(), dof) - patch.begin();
  };
  frame[at(owner)] = 1.0;
  for (index_t g : nbhd_list) {
    index_t row = row_of_gamma[g];
    double r_owner = system.R.entry(row, owner);
    double r_gamma = system.R.entry(row, g);
    if (r_gamma == 0.0)
      throw std::runtime_error("build_patches: interface row without diagonal entry");
    frame[at(g)] = -r_owner / r_gamma;
  }
  return frame;
}

// ||A0 * embedded frame||_inf via symmetric row access.
double frame_residual(const SparseMatrix& A0, const std::vector<index_t>& patch,
                      const std::vector<double>& frame) {
  std::map<index_t, double> image;
  for (std::size_t p = 0; p < patch.size(); ++p) {
    index_t col = patch[p];
    double coef = frame[p];
    if (coef == 0.0) continue;
    for (index_t k = A0.row_offsets[col]; k < A0.row_offsets[col + 1]; ++k)
      image[A0.col_indices[k]] += A0.values[k] * coef;
  }
  double r = 0.0;
  for (const auto& [i, v] : image) r = std::max(r, std::abs(v));
  return r;
}

double matrix_scale(const SparseMatrix& A) {
  double s = 0.0;
  for (double v : A.values) s = std::max(s, std::abs(v));
  return std::max(s, 1e-300);
}

}  // namespace

SubspaceDecomposition build_patches(const Neighborhoods& nbhd,
                                    const CoupledSystem& system) {
  if (nbhd.n_owners() == 0)
    throw std::invalid_argument("build_patches: empty decomposition");
  SubspaceDecomposition dec;
  dec.n_total = system.n_total();

  std::vector<index_t> row_of_gamma(system.n_total(), -1);
  for (index_t k = 0; k < static_cast<index_t>(system.gamma_dof_of_row.size()); ++k)
    row_of_gamma[system.gamma_dof_of_row[k]] = k;

  const double frame_tol = 1e-12 * matrix_scale(system.A0);
  dec.overlap_count.assign(system.n_total(), 0);
  for (index_t p = 0; p < nbhd.n_owners(); ++p) {
    index_t owner = nbhd.owner_dofs[p];
    auto list = nbhd.of(p);
    std::vector<index_t> patch;
    patch.reserve(list.size() + 1);
    patch.push_back(owner);
    patch.insert(patch.end(), list.begin(), list.end());
    std::sort(patch.begin(), patch.end());
    auto frame = patch_kernel_frame(system, owner, patch, list, row_of_gamma);
    if (frame_residual(system.A0, patch, frame) > frame_tol) frame.clear();
    for (index_t dof : patch) dec.overlap_count[dof]++;
    dec.patches.push_back(std::move(patch));
    dec.owners.push_back(owner);
    dec.kernel_frame.push_back(std::move(frame));
  }
  // Interface DOFs not reached by any neighborhood still need a smoothing
  // region; they get frameless singletons.
  for (index_t g : system.partition.gamma) {
    if (dec.overlap_count[g] > 0) continue;
    dec.patches.push_back({g});
    dec.owners.push_back(g);
    dec.kernel_frame.push_back({});
    dec.overlap_count[g] = 1;
  }
  return dec;
}

SubspaceDecomposition singleton_decomposition(const CoupledSystem& system) {
  SubspaceDecomposition dec;
  dec.n_total = system.n_total();
  dec.overlap_count.assign(system.n_total(), 1);
  SparseMatrix Rt = transpose(system.R);
  for (index_t i = 0; i < system.n_total(); ++i) {
    dec.patches.push_back({i});
    dec.owners.push_back(i);
    bool coupled = false;
    for (index_t k = Rt.row_offsets[i]; k < Rt.row_offsets[i + 1]; ++k)
      if (Rt.values[k] != 0.0) coupled = true;
    dec.kernel_frame.push_back(coupled ? std::vector<double>{}
                                       : std::vector<double>{1.0});
  }
  return dec;
}

std::vector<index_t> metric_map(const CoupledSystem& system) {
  const auto& gamma_rows = system.gamma_dof_of_row;
  std::vector<index_t> omega;
  omega.insert(omega.end(), system.partition.omega.begin(),
               system.partition.omega.end());
  omega.insert(omega.end(), system.partition.upsilon_minus_gamma.begin(),
               system.partition.upsilon_minus_gamma.end());
  std::sort(omega.begin(), omega.end());
  if (omega.empty()) throw std::invalid_argument("metric_map: no omega DOFs");

  std::vector<index_t> L(gamma_rows.size());
  if (!system.dof_coords.empty()) {
    // Spatial bins over the omega coordinates; expand the search ring until a
    // nearest candidate is certain.
    std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (index_t d : omega) {
      for (int c = 0; c < 3; ++c) {
        lo[c] = std::min(lo[c], system.dof_coords[d][c]);
        hi[c] = std::max(hi[c], system.dof_coords[d][c]);
      }
    }
    index_t nb = std::max<index_t>(
        1, static_cast<index_t>(std::cbrt(static_cast<double>(omega.size()) / 4.0)));
    std::array<index_t, 3> nbins{nb, nb, nb};
    std::array<double, 3> width;
    for (int c = 0; c < 3; ++c) width[c] = std::max(hi[c] - lo[c], 1e-300);
    auto bin_coord = [&](double x, int c) {
      return std::clamp(static_cast<index_t>((x - lo[c]) / width[c] * nbins[c]),
                        index_t{0}, nbins[c] - 1);
    };
    std::vector<std::vector<index_t>> bins(nbins[0] * nbins[1] * nbins[2]);
    for (index_t d : omega) {
      auto p = system.dof_coords[d];
      bins[bin_coord(p[0], 0) + nbins[0] * (bin_coord(p[1], 1) + nbins[1] * bin_coord(p[2], 2))]
          .push_back(d);
    }
    double min_bin_width =
        std::min({width[0] / nbins[0], width[1] / nbins[1], width[2] / nbins[2]});
    for (std::size_t k = 0; k < gamma_rows.size(); ++k) {
      auto p = system.dof_coords[gamma_rows[k]];
      index_t bx = bin_coord(p[0], 0), by = bin_coord(p[1], 1), bz = bin_coord(p[2], 2);
      index_t best = -1;
      double best_d2 = 1e300;
      const index_t max_ring = std::max({nbins[0], nbins[1], nbins[2]});
      for (index_t ring = 0; ring <= max_ring; ++ring) {
        for (index_t z = std::max<index_t>(0, bz - ring);
             z <= std::min(nbins[2] - 1, bz + ring); ++z)
          for (index_t y = std::max<index_t>(0, by - ring);
               y <= std::min(nbins[1] - 1, by + ring); ++y)
            for (index_t x = std::max<index_t>(0, bx - ring);
                 x <= std::min(nbins[0] - 1, bx + ring); ++x) {
              if (ring > 0 && x > bx - ring && x < bx + ring && y > by - ring &&
                  y < by + ring && z > bz - ring && z < bz + ring)
                continue;  // interior already scanned
              for (index_t d : bins[x + nbins[0] * (y + nbins[1] * z)]) {
                auto q = system.dof_coords[d];
                double d2 = 0.0;
                for (int c = 0; c < 3; ++c) d2 += (p[c] - q[c]) * (p[c] - q[c]);
                if (d2 < best_d2 || (d2 == best_d2 && d < best)) {
                  best_d2 = d2;
                  best = d;
                }
              }
            }
        // Points in unscanned bins are at least (ring-1) bin widths away.
        if (best >= 0 && ring >= 1 &&
            std::sqrt(best_d2) <= static_cast<double>(ring - 1) * min_bin_width)
          break;
      }
      L[k] = best;
    }
    return L;
  }

  // Hop-distance fallback on the graph of A = gamma*A0 + A1.
  SparseMatrix A = system.system_matrix();
  std::vector<char> is_omega(system.n_total(), 0);
  for (index_t d : omega) is_omega[d] = 1;
  for (std::size_t k = 0; k < gamma_rows.size(); ++k) {
    std::queue<index_t> q;
    std::vector<char> seen(system.n_total(), 0);
    q.push(gamma_rows[k]);
    seen[gamma_rows[k]] = 1;
    index_t found = -1;
    while (!q.empty() && found < 0) {
      index_t v = q.front();
      q.pop();
      // Lowest-index tie break within a BFS level: scan sorted neighbors.
      for (index_t e = A.row_offsets[v]; e < A.row_offsets[v + 1]; ++e) {
        index_t w = A.col_indices[e];
        if (seen[w]) continue;
        if (is_omega[w]) {
          found = found < 0 ? w : std::min(found, w);
          continue;
        }
        seen[w] = 1;
        q.push(w);
      }
    }
    if (found < 0) throw std::runtime_error("metric_map: interface DOF disconnected");
    L[k] = found;
  }
  return L;
}

AggregationConstraint make_constraint(const CoupledSystem& system) {
  AggregationConstraint c;
  c.gamma_dofs = system.gamma_dof_of_row;
  c.nearest_omega = metric_map(system);
  return c;
}

WeightedGraph strength_graph(const SparseMatrix& A) {
  auto d = diagonal(A);
  return graph_of(A, [&](index_t i, index_t j, double v) {
    double denom = std::sqrt(std::abs(d[i]) * std::abs(d[j]));
    return denom > 0.0 ? std::abs(v) / denom : 0.0;
  });
}

namespace {

struct UnionFind {
  std::vector<index_t> parent;
  explicit UnionFind(index_t n) : parent(n) {
    for (index_t i = 0; i < n; ++i) parent[i] = i;
  }
  index_t find(index_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  void unite(index_t a, index_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller root id wins: keeps labels deterministic.
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

Aggregation aggregate(const WeightedGraph& g, const AggregationConstraint* constraint,
                      index_t c_agg) {
  if (c_agg < 1) throw std::invalid_argument("aggregate: c_agg must be >= 1");
  const index_t n = g.nvertices;
  UnionFind uf(n);
  if (constraint) {
    for (std::size_t k = 0; k < constraint->gamma_dofs.size(); ++k) {
      index_t gdof = constraint->gamma_dofs[k];
      index_t odof = constraint->nearest_omega[k];
      if (gdof < 0 || gdof >= n || odof < 0 || odof >= n)
        throw std::invalid_argument("aggregate: constraint index out of range");
      uf.unite(gdof, odof);
    }
  }

  auto sizes_of = [&]() {
    std::vector<index_t> s(n, 0);
    for (index_t v = 0; v < n; ++v) s[uf.find(v)]++;
    return s;
  };

  int passes = 0;
  for (index_t cap = 1; cap < c_agg; cap *= 2) ++passes;
  passes = std::max(passes, 1);

  struct CrossEdge {
    index_t a, b;
    double w;
  };
  std::vector<CrossEdge> cross;
  for (int pass = 0; pass < passes; ++pass) {
    auto sizes = sizes_of();
    // Strongest cross edge between each aggregate pair.
    cross.clear();
    cross.reserve(g.n_edges());
    for (index_t e = 0; e < g.n_edges(); ++e) {
      index_t a = uf.find(g.edges[e][0]);
      index_t b = uf.find(g.edges[e][1]);
      if (a == b) continue;
      if (b < a) std::swap(a, b);
      cross.push_back({a, b, g.weights[e]});
    }
    std::sort(cross.begin(), cross.end(), [](const CrossEdge& x, const CrossEdge& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    std::vector<std::vector<std::pair<index_t, double>>> adj(n);
    for (std::size_t e = 0; e < cross.size();) {
      std::size_t e2 = e;
      double w = 0.0;
      while (e2 < cross.size() && cross[e2].a == cross[e].a && cross[e2].b == cross[e].b)
        w = std::max(w, cross[e2++].w);
      adj[cross[e].a].emplace_back(cross[e].b, w);
      adj[cross[e].b].emplace_back(cross[e].a, w);
      e = e2;
    }
    std::vector<char> matched(n, 0);
    bool merged_any = false;
    for (index_t a = 0; a < n; ++a) {
      if (uf.find(a) != a || matched[a]) continue;
      index_t best = -1;
      double best_w = 0.0;
      for (const auto& [b, w] : adj[a]) {
        if (matched[b] || sizes[a] + sizes[b] > c_agg) continue;
        if (w > best_w || (w == best_w && (best < 0 || b < best))) {
          best = b;
          best_w = w;
        }
      }
      if (best >= 0) {
        matched[a] = matched[best] = 1;
        uf.unite(a, best);
        merged_any = true;
      }
    }
    if (!merged_any) break;
  }

  // Absorb leftover singletons into their strongest neighbor aggregate.
  {
    auto sizes = sizes_of();
    std::vector<std::pair<index_t, double>> best(n, {-1, 0.0});
    for (index_t e = 0; e < g.n_edges(); ++e) {
      index_t u = g.edges[e][0], v = g.edges[e][1];
      index_t a = uf.find(u), b = uf.find(v);
      if (a == b) continue;
      double w = g.weights[e];
      auto consider = [&](index_t vert, index_t other_root) {
        index_t root = uf.find(vert);
        if (sizes[root] != 1) return;
        if (sizes[other_root] + 1 > c_agg) return;
        auto& [cur, cw] = best[root];
        if (w > cw || (w == cw && (cur < 0 || other_root < cur))) {
          cur = other_root;
          cw = w;
        }
      };
      consider(u, b);
      consider(v, a);
    }
    for (index_t v = 0; v < n; ++v)
      if (uf.find(v) == v && best[v].first >= 0) uf.unite(v, best[v].first);
  }

  // Compact labels ordered by smallest member.
  Aggregation agg;
  agg.c_agg = c_agg;
  agg.aggregate_of.assign(n, -1);
  std::vector<index_t> label(n, -1);
  index_t next = 0;
  for (index_t v = 0; v < n; ++v) {
    index_t root = uf.find(v);
    if (label[root] < 0) label[root] = next++;
    agg.aggregate_of[v] = label[root];
  }
  agg.n_agg = next;
  return agg;
}

SparseMatrix redefine_a0(const CoupledSystem& system, std::span<const index_t> L) {
  if (L.size() != system.gamma_dof_of_row.size())
    throw std::invalid_argument("redefine_a0: metric map size mismatch");
  // m_i: interface mass row sums in R row order.
  std::vector<double> m(system.M_gamma.nrows, 0.0);
  for (index_t i = 0; i < system.M_gamma.nrows; ++i)
    for (index_t k = system.M_gamma.row_offsets[i]; k < system.M_gamma.row_offsets[i + 1];
         ++k)
      m[i] += system.M_gamma.values[k];
  CooBuilder coo(system.n_total(), system.n_total());
  for (std::size_t k = 0; k < L.size(); ++k) {
    index_t gi = system.gamma_dof_of_row[k];
    index_t oj = L[k];
    coo.add(gi, gi, m[k]);
    coo.add(oj, oj, m[k]);
    coo.add(gi, oj, -m[k]);
    coo.add(oj, gi, -m[k]);
  }
  return coo.finalize(true);
}

KernelConditionReport verify_kernel_condition(const SubspaceDecomposition& dec,
                                              const Aggregation& agg,
                                              const SparseMatrix& A0) {
  if (A0.nrows > 5000)
    throw std::invalid_argument("verify_kernel_condition: matrix above desk-scale cap");
  const index_t n = A0.nrows;
  DenseMatrix N = dense_nullspace(to_dense(A0), 1e-10);
  KernelConditionReport report;
  report.kernel_dim = N.ncols;

  const double a0_scale = matrix_scale(A0);
  // Owner position of each patch: the unique entry with frame coefficient 1
  // (the first nonzero for singletons).
  for (index_t col = 0; col < N.ncols; ++col) {
    std::vector<double> z(n);
    for (index_t i = 0; i < n; ++i) z[i] = N(i, col);

    // Coarse component, kept only when it is itself in the kernel.
    std::vector<double> zc = agg.coarse_average(z);
    std::vector<double> a0zc = spmv(A0, zc);
    double zc_norm = norm2(zc);
    bool keep_coarse = true;
    for (double v : a0zc)
      if (std::abs(v) > 1e-10 * a0_scale * std::max(1.0, zc_norm)) keep_coarse = false;
    std::vector<double> r(n);
    for (index_t i = 0; i < n; ++i) r[i] = z[i] - (keep_coarse ? zc[i] : 0.0);

    std::vector<double> t(n, 0.0);
    for (index_t p = 0; p < dec.n_patches(); ++p) {
      const auto& frame = dec.kernel_frame[p];
      if (frame.empty()) continue;
      const auto& patch = dec.patches[p];
      double coef = r[dec.owners[p]];
      if (coef == 0.0) continue;
      for (std::size_t q = 0; q < patch.size(); ++q) t[patch[q]] += coef * frame[q];
    }
    double err = 0.0;
    for (index_t i = 0; i < n; ++i) {
      double d = z[i] - (keep_coarse ? zc[i] : 0.0) - t[i];
      err += d * d;
    }
    double rel = std::sqrt(err) / std::max(norm2(z), 1e-300);
    report.max_residual = std::max(report.max_residual, rel);
  }
  report.pass = report.max_residual <= 1e-8;
  return report;
}

std::string decomposition_to_json(const SubspaceDecomposition& dec) {
  nlohmann::json j;
  j["n_total"] = dec.n_total;
  j["patches"] = dec.patches;
  j["owners"] = dec.owners;
  j["overlap_count"] = dec.overlap_count;
  j["kernel_frame"] = dec.kernel_frame;
  return j.dump();
}

std::string aggregation_to_json(const Aggregation& agg) {
  nlohmann::json j;
  j["n_agg"] = agg.n_agg;
  j["c_agg"] = agg.c_agg;
  j["aggregate_of"] = agg.aggregate_of;
  return j.dump();
}

}  // namespace camg
