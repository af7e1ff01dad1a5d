#include "thermoporo/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "thermoporo/simd/kernels.hpp"

namespace thermoporo {

namespace {

// Physical quadrature data on one element.
struct ElementQuad {
  Tabulation tab;
  std::vector<double> w;
  std::vector<Point> x;
};

ElementQuad MakeElementQuad(const DGSpace& space, std::size_t k, const TriangleRule& rule) {
  ElementQuad q;
  q.tab = space.tabulate(k, rule.points);
  const ElementMap& map = space.element_map(k);
  const double scale = std::abs(map.det);
  q.w.resize(rule.size());
  q.x.resize(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    q.w[i] = rule.weights[i] * scale;
    q.x[i] = map.to_physical(rule.points[i]);
  }
  return q;
}

std::vector<double> Repeat(const std::vector<double>& w, std::size_t times) {
  std::vector<double> out;
  out.reserve(w.size() * times);
  for (std::size_t t = 0; t < times; ++t) out.insert(out.end(), w.begin(), w.end());
  return out;
}

// Arrays below are "row per local basis function", flattened over
// (component block, quadrature point).

// Values: row (c, i), block d holds delta_cd psi_i.
std::vector<double> ValueRows(const Tabulation& t, int comps) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  const auto nc = static_cast<std::size_t>(comps);
  std::vector<double> out(nc * nb * nc * nq, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < nb; ++i) {
      double* row = out.data() + (c * nb + i) * nc * nq + c * nq;
      std::copy_n(t.value_row(i), nq, row);
    }
  }
  return out;
}

// Scalar gradients: row i = [dx psi_i | dy psi_i].
std::vector<double> GradRows(const Tabulation& t) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  std::vector<double> out(nb * 2 * nq);
  for (std::size_t i = 0; i < nb; ++i) {
    std::copy_n(t.dx_row(i), nq, out.data() + i * 2 * nq);
    std::copy_n(t.dy_row(i), nq, out.data() + i * 2 * nq + nq);
  }
  return out;
}

// phi grad psi_i.
std::vector<double> FluxRows(const Tabulation& t, const Mat2& phi) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  std::vector<double> out(nb * 2 * nq);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t q = 0; q < nq; ++q) {
      const Vec2 f = phi * Vec2{t.dx_row(i)[q], t.dy_row(i)[q]};
      out[i * 2 * nq + q] = f.x;
      out[i * 2 * nq + nq + q] = f.y;
    }
  }
  return out;
}

// (phi grad psi_i) . n
std::vector<double> NormalFluxRows(const Tabulation& t, const Mat2& phi, Vec2 n) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  std::vector<double> out(nb * nq);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t q = 0; q < nq; ++q) {
      out[i * nq + q] = dot(phi * Vec2{t.dx_row(i)[q], t.dy_row(i)[q]}, n);
    }
  }
  return out;
}

// Strain and stress of e_c psi_i, blocks (xx, xy, yx, yy).
void StrainStressRows(const Tabulation& t, double lambda, double mu, std::vector<double>& strain,
                      std::vector<double>& stress) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  const std::size_t len = 4 * nq;
  strain.assign(2 * nb * len, 0.0);
  stress.assign(2 * nb * len, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < nb; ++i) {
      double* e = strain.data() + (c * nb + i) * len;
      double* s = stress.data() + (c * nb + i) * len;
      for (std::size_t q = 0; q < nq; ++q) {
        const double gx = t.dx_row(i)[q];
        const double gy = t.dy_row(i)[q];
        // grad(e_c psi) has row c equal to grad psi.
        Mat2 g{};
        if (c == 0) {
          g.xx = gx;
          g.xy = gy;
        } else {
          g.yx = gx;
          g.yy = gy;
        }
        const double exy = 0.5 * (g.xy + g.yx);
        const double div = g.xx + g.yy;
        e[q] = g.xx;
        e[nq + q] = exy;
        e[2 * nq + q] = exy;
        e[3 * nq + q] = g.yy;
        s[q] = 2.0 * mu * g.xx + lambda * div;
        s[nq + q] = 2.0 * mu * exy;
        s[2 * nq + q] = 2.0 * mu * exy;
        s[3 * nq + q] = 2.0 * mu * g.yy + lambda * div;
      }
    }
  }
}

Mat2 Stress(const Mat2& g, double lambda, double mu) {
  const double exy = 0.5 * (g.xy + g.yx);
  const double div = g.xx + g.yy;
  return {2.0 * mu * g.xx + lambda * div, 2.0 * mu * exy, 2.0 * mu * exy,
          2.0 * mu * g.yy + lambda * div};
}

// sigma(e_c psi_i) n, blocks per output component.
std::vector<double> TractionRows(const Tabulation& t, Vec2 n, double lambda, double mu) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  std::vector<double> out(2 * nb * 2 * nq, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < nb; ++i) {
      double* row = out.data() + (c * nb + i) * 2 * nq;
      for (std::size_t q = 0; q < nq; ++q) {
        Mat2 g{};
        if (c == 0) {
          g.xx = t.dx_row(i)[q];
          g.xy = t.dy_row(i)[q];
        } else {
          g.yx = t.dx_row(i)[q];
          g.yy = t.dy_row(i)[q];
        }
        const Vec2 tr = Stress(g, lambda, mu) * n;
        row[q] = tr.x;
        row[nq + q] = tr.y;
      }
    }
  }
  return out;
}

// (e_c psi_i) . n
std::vector<double> NormalValueRows(const Tabulation& t, Vec2 n) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  std::vector<double> out(2 * nb * nq);
  for (std::size_t c = 0; c < 2; ++c) {
    const double nc = c == 0 ? n.x : n.y;
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t q = 0; q < nq; ++q) out[(c * nb + i) * nq + q] = nc * t.value_row(i)[q];
    }
  }
  return out;
}

// div(e_c psi_i) = d_c psi_i
std::vector<double> DivRows(const Tabulation& t) {
  const std::size_t nb = t.num_basis;
  const std::size_t nq = t.num_points;
  std::vector<double> out(2 * nb * nq);
  for (std::size_t i = 0; i < nb; ++i) {
    std::copy_n(t.dx_row(i), nq, out.data() + i * nq);
    std::copy_n(t.dy_row(i), nq, out.data() + (nb + i) * nq);
  }
  return out;
}

void Scatter(std::vector<Triplet>& trip, std::size_t row_base, std::size_t col_base,
             const std::vector<double>& block, std::size_t na, std::size_t nb) {
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      trip.push_back({static_cast<int>(row_base + i), static_cast<int>(col_base + j),
                      block[i * nb + j]});
    }
  }
}

struct FaceSide {
  int element;
  double jump;     // +1 plus side, -1 minus side
  double average;  // 1/2 interior, 1 boundary
  Tabulation tab;
};

std::vector<FaceSide> MakeFaceSides(const DGSpace& space, std::size_t e, const EdgePoints& pts) {
  const Edge& edge = space.mesh().edge(e);
  std::vector<FaceSide> sides;
  const double avg = edge.is_boundary() ? 1.0 : 0.5;
  sides.push_back({edge.plus, 1.0, avg, space.tabulate(static_cast<std::size_t>(edge.plus), pts.ref_plus)});
  if (!edge.is_boundary()) {
    sides.push_back(
        {edge.minus, -1.0, avg, space.tabulate(static_cast<std::size_t>(edge.minus), pts.ref_minus)});
  }
  return sides;
}

// SIPG face block for sides (test sb, trial sa):
//   -avg(sa) jmp(sb) <F_trial, V_test> - avg(sb) jmp(sa) <F_test, V_trial>
//   + pen jmp(sa) jmp(sb) <V_test, V_trial>
void AssembleSipgFaces(const DGSpace& space, const std::vector<std::vector<double>>& values,
                       const std::vector<std::vector<double>>& fluxes,
                       const std::vector<FaceSide>& sides, const std::vector<double>& w_rep,
                       double penalty, std::vector<Triplet>& trip) {
  const auto& k = simd::kernels();
  const std::size_t n = space.local_dim();
  const std::size_t len = w_rep.size();
  std::vector<double> block(n * n);
  for (std::size_t b = 0; b < sides.size(); ++b) {
    for (std::size_t a = 0; a < sides.size(); ++a) {
      std::fill(block.begin(), block.end(), 0.0);
      const FaceSide& test = sides[b];
      const FaceSide& trial = sides[a];
      k.weighted_gram(w_rep.data(), values[b].data(), n, fluxes[a].data(), n, len,
                      -trial.average * test.jump, block.data());
      k.weighted_gram(w_rep.data(), fluxes[b].data(), n, values[a].data(), n, len,
                      -test.average * trial.jump, block.data());
      k.weighted_gram(w_rep.data(), values[b].data(), n, values[a].data(), n, len,
                      penalty * test.jump * trial.jump, block.data());
      Scatter(trip, space.dof(static_cast<std::size_t>(test.element), 0),
              space.dof(static_cast<std::size_t>(trial.element), 0), block, n, n);
    }
  }
}

void RequireSameMesh(const DGSpace& a, const DGSpace& b) {
  if (!a.same_mesh(b)) throw std::invalid_argument("spaces must share one mesh");
}

}  // namespace

int form_quadrature_degree(const DGSpace& a, const DGSpace& b) {
  return 2 * std::max(a.degree(), b.degree()) + 2;
}

int load_quadrature_degree(const DGSpace& space) { return std::max(2 * space.degree() + 2, 6); }

SparseMatrix assemble_elasticity(const DGSpace& space, const MaterialParams& params) {
  if (space.components() != 2) throw std::invalid_argument("elasticity needs a vector space");
  if (!(params.sigma1 > 0.0)) throw std::invalid_argument("sigma1 must be > 0");
  const Mesh& mesh = space.mesh();
  const int degree = form_quadrature_degree(space, space);
  const TriangleRule vol = triangle_quadrature(degree);
  const EdgeRule er = edge_quadrature(degree);
  const auto& k = simd::kernels();
  const std::size_t n = space.local_dim();
  std::vector<Triplet> trip;
  trip.reserve(space.num_elements() * n * n * 4);

  std::vector<double> strain;
  std::vector<double> stress;
  std::vector<double> block(n * n);
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementQuad q = MakeElementQuad(space, e, vol);
    StrainStressRows(q.tab, params.lambda, params.mu, strain, stress);
    const std::vector<double> w4 = Repeat(q.w, 4);
    std::fill(block.begin(), block.end(), 0.0);
    k.weighted_gram(w4.data(), strain.data(), n, stress.data(), n, w4.size(), 1.0, block.data());
    Scatter(trip, space.dof(e, 0), space.dof(e, 0), block, n, n);
  }

  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const EdgePoints pts = edge_points(mesh, e, er);
    const auto sides = MakeFaceSides(space, e, pts);
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> fluxes;
    for (const FaceSide& s : sides) {
      values.push_back(ValueRows(s.tab, 2));
      fluxes.push_back(TractionRows(s.tab, edge.normal, params.lambda, params.mu));
    }
    AssembleSipgFaces(space, values, fluxes, sides, Repeat(pts.weights, 2),
                      params.sigma1 / edge.length, trip);
  }
  return SparseMatrix::from_triplets(space.global_dim(), space.global_dim(), std::move(trip));
}

SparseMatrix assemble_coupling(const DGSpace& space_u, const DGSpace& space_s, CouplingForm form) {
  if (space_u.components() != 2 || space_s.components() != 1) {
    throw std::invalid_argument("coupling needs a vector and a scalar space");
  }
  RequireSameMesh(space_u, space_s);
  const Mesh& mesh = space_u.mesh();
  const int degree = form_quadrature_degree(space_u, space_s);
  const TriangleRule vol = triangle_quadrature(degree);
  const EdgeRule er = edge_quadrature(degree);
  const auto& k = simd::kernels();
  const std::size_t ns = space_s.local_dim();
  const std::size_t nv = space_u.local_dim();
  std::vector<Triplet> trip;
  std::vector<double> block(ns * nv);

  for (std::size_t e = 0; e < space_u.num_elements(); ++e) {
    const ElementQuad qu = MakeElementQuad(space_u, e, vol);
    const ElementQuad qs = MakeElementQuad(space_s, e, vol);
    std::fill(block.begin(), block.end(), 0.0);
    if (form == CouplingForm::kGradient) {
      const std::vector<double> w2 = Repeat(qs.w, 2);
      const auto grads = GradRows(qs.tab);
      const auto vals = ValueRows(qu.tab, 2);
      k.weighted_gram(w2.data(), grads.data(), ns, vals.data(), nv, w2.size(), -1.0, block.data());
    } else {
      const auto& vals = qs.tab.values;
      const auto divs = DivRows(qu.tab);
      k.weighted_gram(qs.w.data(), vals.data(), ns, divs.data(), nv, qs.w.size(), 1.0,
                      block.data());
    }
    Scatter(trip, space_s.dof(e, 0), space_u.dof(e, 0), block, ns, nv);
  }

  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (edge.is_boundary()) continue;
    const EdgePoints pts = edge_points(mesh, e, er);
    const auto su = MakeFaceSides(space_u, e, pts);
    const auto ss = MakeFaceSides(space_s, e, pts);
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t a = 0; a < 2; ++a) {
        std::fill(block.begin(), block.end(), 0.0);
        const auto normal_vals = NormalValueRows(su[a].tab, edge.normal);
        // gradient form: + {v}.n [p];  divergence form: - {p} [v].n
        const double scale = form == CouplingForm::kGradient ? su[a].average * ss[b].jump
                                                             : -ss[b].average * su[a].jump;
        k.weighted_gram(pts.weights.data(), ss[b].tab.values.data(), ns, normal_vals.data(), nv,
                        pts.weights.size(), scale, block.data());
        Scatter(trip, space_s.dof(static_cast<std::size_t>(ss[b].element), 0),
                space_u.dof(static_cast<std::size_t>(su[a].element), 0), block, ns, nv);
      }
    }
  }
  return SparseMatrix::from_triplets(space_s.global_dim(), space_u.global_dim(), std::move(trip));
}

SparseMatrix assemble_diffusion(const DGSpace& space, const Mat2& phi, double sigma) {
  if (space.components() != 1) throw std::invalid_argument("diffusion needs a scalar space");
  if (!is_spd(phi)) throw std::invalid_argument("diffusion tensor is not symmetric positive definite");
  if (!(sigma > 0.0)) throw std::invalid_argument("penalty parameter must be > 0");
  const Mesh& mesh = space.mesh();
  const int degree = form_quadrature_degree(space, space);
  const TriangleRule vol = triangle_quadrature(degree);
  const EdgeRule er = edge_quadrature(degree);
  const auto& k = simd::kernels();
  const std::size_t n = space.local_dim();
  std::vector<Triplet> trip;
  trip.reserve(space.num_elements() * n * n * 4);
  std::vector<double> block(n * n);

  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementQuad q = MakeElementQuad(space, e, vol);
    const auto grads = GradRows(q.tab);
    const auto fluxes = FluxRows(q.tab, phi);
    const auto w2 = Repeat(q.w, 2);
    std::fill(block.begin(), block.end(), 0.0);
    k.weighted_gram(w2.data(), grads.data(), n, fluxes.data(), n, w2.size(), 1.0, block.data());
    Scatter(trip, space.dof(e, 0), space.dof(e, 0), block, n, n);
  }

  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const EdgePoints pts = edge_points(mesh, e, er);
    const auto sides = MakeFaceSides(space, e, pts);
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> fluxes;
    for (const FaceSide& s : sides) {
      values.push_back(s.tab.values);
      fluxes.push_back(NormalFluxRows(s.tab, phi, edge.normal));
    }
    AssembleSipgFaces(space, values, fluxes, sides, pts.weights, sigma / edge.length, trip);
  }
  return SparseMatrix::from_triplets(space.global_dim(), space.global_dim(), std::move(trip));
}

Vec2 cutoff(Vec2 z, double m_cut) {
  const double mag = norm(z);
  if (mag <= m_cut) return z;
  return (m_cut / mag) * z;
}

namespace {

// Shared volume loop for (transport . grad t, s) once transport values at the
// element's quadrature points are known.
template <typename TransportAt>
SparseMatrix AssembleTransport(const DGSpace& space, TransportAt&& transport_at) {
  if (space.components() != 1) throw std::invalid_argument("convection needs a scalar space");
  const int degree = form_quadrature_degree(space, space);
  const TriangleRule vol = triangle_quadrature(degree);
  const auto& k = simd::kernels();
  const std::size_t n = space.local_dim();
  std::vector<Triplet> trip;
  trip.reserve(space.num_elements() * n * n);
  std::vector<double> block(n * n);
  std::vector<double> directional(n * vol.size());
  std::vector<Vec2> b(vol.size());
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementQuad q = MakeElementQuad(space, e, vol);
    transport_at(e, vol, q.x, b);
    const std::size_t nq = vol.size();
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t p = 0; p < nq; ++p) {
        directional[j * nq + p] = b[p].x * q.tab.dx_row(j)[p] + b[p].y * q.tab.dy_row(j)[p];
      }
    }
    std::fill(block.begin(), block.end(), 0.0);
    k.weighted_gram(q.w.data(), q.tab.values.data(), n, directional.data(), n, nq, 1.0,
                    block.data());
    Scatter(trip, space.dof(e, 0), space.dof(e, 0), block, n, n);
  }
  return SparseMatrix::from_triplets(space.global_dim(), space.global_dim(), std::move(trip));
}

}  // namespace

SparseMatrix assemble_convection(const DGSpace& space_T, const FieldVec& pressure,
                                 const MaterialParams& params, CutoffMode mode,
                                 CutoffStats* stats) {
  const DGSpace& space_p = pressure.space();
  if (space_p.components() != 1) throw std::invalid_argument("pressure must be scalar");
  RequireSameMesh(space_T, space_p);
  if (mode == CutoffMode::kApply && !(params.M_cut > 0.0)) {
    throw std::invalid_argument("M_cut must be > 0");
  }
  CutoffStats local;
  SparseMatrix out = AssembleTransport(
      space_T, [&](std::size_t e, const TriangleRule& rule, const std::vector<Point>&,
                   std::vector<Vec2>& b) {
        const PointValues pv = eval_on_element(pressure, e, rule.points);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Vec2 flux = params.K * pv.grad(0, q);
          if (mode == CutoffMode::kApply) {
            b[q] = cutoff(flux, params.M_cut);
            ++local.evaluated;
            if (norm(flux) > params.M_cut) ++local.clamped;
          } else {
            b[q] = flux;
          }
        }
      });
  if (stats) {
    stats->evaluated += local.evaluated;
    stats->clamped += local.clamped;
  }
  return out;
}

SparseMatrix assemble_advection(const DGSpace& space_T,
                                const std::function<Vec2(Point)>& transport) {
  return AssembleTransport(space_T, [&](std::size_t, const TriangleRule&,
                                        const std::vector<Point>& x, std::vector<Vec2>& b) {
    for (std::size_t q = 0; q < x.size(); ++q) b[q] = transport(x[q]);
  });
}

SparseMatrix assemble_mass(const DGSpace& test, const DGSpace& trial) {
  RequireSameMesh(test, trial);
  if (test.components() != trial.components()) {
    throw std::invalid_argument("mass matrix needs matching component counts");
  }
  const int comps = test.components();
  const TriangleRule vol = triangle_quadrature(form_quadrature_degree(test, trial));
  const auto& k = simd::kernels();
  const std::size_t na = test.local_dim();
  const std::size_t nb = trial.local_dim();
  std::vector<Triplet> trip;
  trip.reserve(test.num_elements() * na * nb);
  std::vector<double> block(na * nb);
  for (std::size_t e = 0; e < test.num_elements(); ++e) {
    const ElementQuad qa = MakeElementQuad(test, e, vol);
    const Tabulation tb = trial.tabulate(e, vol.points);
    const auto va = ValueRows(qa.tab, comps);
    const auto vb = ValueRows(tb, comps);
    const auto w = Repeat(qa.w, static_cast<std::size_t>(comps));
    std::fill(block.begin(), block.end(), 0.0);
    k.weighted_gram(w.data(), va.data(), na, vb.data(), nb, w.size(), 1.0, block.data());
    Scatter(trip, test.dof(e, 0), trial.dof(e, 0), block, na, nb);
  }
  return SparseMatrix::from_triplets(test.global_dim(), trial.global_dim(), std::move(trip));
}

SparseMatrix assemble_derivative(const DGSpace& space, int direction) {
  if (direction != 0 && direction != 1) throw std::invalid_argument("direction must be 0 or 1");
  const Vec2 unit = direction == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  return assemble_advection(space, [unit](Point) { return unit; });
}

std::vector<double> assemble_load(const DGSpace& space, const std::function<double(Point)>& func,
                                  int degree) {
  if (space.components() != 1) throw std::invalid_argument("scalar load on a vector space");
  const TriangleRule vol = triangle_quadrature(degree < 0 ? load_quadrature_degree(space) : degree);
  const auto& k = simd::kernels();
  const std::size_t n = space.local_dim();
  std::vector<double> out(space.global_dim(), 0.0);
  std::vector<double> fw(vol.size());
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementQuad q = MakeElementQuad(space, e, vol);
    for (std::size_t p = 0; p < vol.size(); ++p) fw[p] = func(q.x[p]);
    for (std::size_t i = 0; i < n; ++i) {
      out[space.dof(e, i)] = k.weighted_dot(q.w.data(), fw.data(), q.tab.value_row(i), vol.size());
    }
  }
  return out;
}

std::vector<double> assemble_load(const DGSpace& space, const std::function<Vec2(Point)>& func,
                                  int degree) {
  if (space.components() != 2) throw std::invalid_argument("vector load on a scalar space");
  const TriangleRule vol = triangle_quadrature(degree < 0 ? load_quadrature_degree(space) : degree);
  const auto& k = simd::kernels();
  const std::size_t nb = space.basis_size();
  std::vector<double> out(space.global_dim(), 0.0);
  std::vector<double> fx(vol.size());
  std::vector<double> fy(vol.size());
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementQuad q = MakeElementQuad(space, e, vol);
    for (std::size_t p = 0; p < vol.size(); ++p) {
      const Vec2 f = func(q.x[p]);
      fx[p] = f.x;
      fy[p] = f.y;
    }
    for (std::size_t i = 0; i < nb; ++i) {
      out[space.dof(e, i)] = k.weighted_dot(q.w.data(), fx.data(), q.tab.value_row(i), vol.size());
      out[space.dof(e, nb + i)] =
          k.weighted_dot(q.w.data(), fy.data(), q.tab.value_row(i), vol.size());
    }
  }
  return out;
}

std::vector<double> apply_elasticity(const DGSpace& space, const MaterialParams& params,
                                     const VectorField& u, int degree) {
  if (space.components() != 2) throw std::invalid_argument("elasticity needs a vector space");
  const Mesh& mesh = space.mesh();
  const int deg = degree < 0 ? load_quadrature_degree(space) : degree;
  const TriangleRule vol = triangle_quadrature(deg);
  const EdgeRule er = edge_quadrature(deg);
  const auto& k = simd::kernels();
  const std::size_t n = space.local_dim();
  std::vector<double> out(space.global_dim(), 0.0);

  std::vector<double> strain;
  std::vector<double> stress;
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementQuad q = MakeElementQuad(space, e, vol);
    const std::size_t nq = vol.size();
    StrainStressRows(q.tab, params.lambda, params.mu, strain, stress);
    std::vector<double> su(4 * nq);
    for (std::size_t p = 0; p < nq; ++p) {
      const Mat2 s = Stress(u.grad(q.x[p]), params.lambda, params.mu);
      su[p] = s.xx;
      su[nq + p] = s.xy;
      su[2 * nq + p] = s.yx;
      su[3 * nq + p] = s.yy;
    }
    const auto w4 = Repeat(q.w, 4);
    for (std::size_t i = 0; i < n; ++i) {
      out[space.dof(e, i)] += k.weighted_dot(w4.data(), su.data(), strain.data() + i * 4 * nq, 4 * nq);
    }
  }

  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const EdgePoints pts = edge_points(mesh, e, er);
    const auto sides = MakeFaceSides(space, e, pts);
    const std::size_t nq = pts.physical.size();
    std::vector<double> traction(2 * nq);
    std::vector<double> trace(2 * nq);
    for (std::size_t p = 0; p < nq; ++p) {
      const Vec2 t = Stress(u.grad(pts.physical[p]), params.lambda, params.mu) * edge.normal;
      traction[p] = t.x;
      traction[nq + p] = t.y;
      const Vec2 v = u.value(pts.physical[p]);
      trace[p] = v.x;
      trace[nq + p] = v.y;
    }
    const auto w2 = Repeat(pts.weights, 2);
    const double pen = params.sigma1 / edge.length;
    for (const FaceSide& s : sides) {
      const auto vals = ValueRows(s.tab, 2);
      const auto tracs = TractionRows(s.tab, edge.normal, params.lambda, params.mu);
      for (std::size_t i = 0; i < n; ++i) {
        double v = -s.jump * k.weighted_dot(w2.data(), traction.data(), vals.data() + i * 2 * nq, 2 * nq);
        if (edge.is_boundary()) {
          v -= k.weighted_dot(w2.data(), tracs.data() + i * 2 * nq, trace.data(), 2 * nq);
          v += pen * k.weighted_dot(w2.data(), vals.data() + i * 2 * nq, trace.data(), 2 * nq);
        }
        out[space.dof(static_cast<std::size_t>(s.element), i)] += v;
      }
    }
  }
  return out;
}

std::vector<double> apply_diffusion(const DGSpace& space, const Mat2& phi, double sigma,
                                    const ScalarField& p, int degree) {
  if (space.components() != 1) throw std::invalid_argument("diffusion needs a scalar space");
  const Mesh& mesh = space.mesh();
  const int deg = degree < 0 ? load_quadrature_degree(space) : degree;
  const TriangleRule vol = triangle_quadrature(deg);
  const EdgeRule er = edge_quadrature(deg);
  const auto& k = simd::kernels();
  const std::size_t n = space.local_dim();
  std::vector<double> out(space.global_dim(), 0.0);

  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementQuad q = MakeElementQuad(space, e, vol);
    const std::size_t nq = vol.size();
    std::vector<double> flux(2 * nq);
    for (std::size_t j = 0; j < nq; ++j) {
      const Vec2 f = phi * p.grad(q.x[j]);
      flux[j] = f.x;
      flux[nq + j] = f.y;
    }
    const auto grads = GradRows(q.tab);
    const auto w2 = Repeat(q.w, 2);
    for (std::size_t i = 0; i < n; ++i) {
      out[space.dof(e, i)] += k.weighted_dot(w2.data(), flux.data(), grads.data() + i * 2 * nq, 2 * nq);
    }
  }

  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const EdgePoints pts = edge_points(mesh, e, er);
    const auto sides = MakeFaceSides(space, e, pts);
    const std::size_t nq = pts.physical.size();
    std::vector<double> normal_flux(nq);
    std::vector<double> trace(nq);
    for (std::size_t j = 0; j < nq; ++j) {
      normal_flux[j] = dot(phi * p.grad(pts.physical[j]), edge.normal);
      trace[j] = p.value(pts.physical[j]);
    }
    const double pen = sigma / edge.length;
    for (const FaceSide& s : sides) {
      const auto nf = NormalFluxRows(s.tab, phi, edge.normal);
      for (std::size_t i = 0; i < n; ++i) {
        double v = -s.jump * k.weighted_dot(pts.weights.data(), normal_flux.data(), s.tab.value_row(i), nq);
        if (edge.is_boundary()) {
          v -= k.weighted_dot(pts.weights.data(), nf.data() + i * nq, trace.data(), nq);
          v += pen * k.weighted_dot(pts.weights.data(), s.tab.value_row(i), trace.data(), nq);
        }
        out[space.dof(static_cast<std::size_t>(s.element), i)] += v;
      }
    }
  }
  return out;
}

std::vector<double> apply_advection(const DGSpace& space, const std::function<Vec2(Point)>& transport,
                                    const ScalarField& temperature, int degree) {
  if (space.components() != 1) throw std::invalid_argument("advection needs a scalar space");
  const TriangleRule vol = triangle_quadrature(degree < 0 ? load_quadrature_degree(space) : degree);
  return assemble_load(
      space, [&](Point x) { return dot(transport(x), temperature.grad(x)); }, vol.degree);
}

FormMatrices assemble_forms(const DGSpace& space_u, const DGSpace& space_p, const DGSpace& space_T,
                            const MaterialParams& params) {
  RequireSameMesh(space_u, space_p);
  RequireSameMesh(space_u, space_T);
  FormMatrices f;
  f.A_elast = assemble_elasticity(space_u, params);
  f.B_p = assemble_coupling(space_u, space_p);
  f.B_T = assemble_coupling(space_u, space_T);
  f.C_pressure = assemble_diffusion(space_p, params.K, params.sigma2);
  f.C_temp = assemble_diffusion(space_T, params.Theta, params.sigma2);
  f.M_u = assemble_mass(space_u);
  f.M_p = assemble_mass(space_p);
  f.M_T = assemble_mass(space_T);
  f.M_pT = assemble_mass(space_p, space_T);
  f.M_Tp = assemble_mass(space_T, space_p);
  return f;
}

}  // namespace thermoporo
