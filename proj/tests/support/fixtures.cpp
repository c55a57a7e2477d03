#include "fixtures.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace fixtures {

using namespace proxyshift;

namespace {

Matrix dirichlet_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) m.col(c) = sample_flat_dirichlet(rows, rng);
  return m;
}

CategorySpec dims_of(std::size_t k_E, std::size_t k_U, std::size_t k_W, std::size_t k_X, std::size_t k_Y) {
  CategorySpec d;
  d.k_E = k_E;
  d.k_U = k_U;
  d.k_W = k_W;
  d.k_X = k_X;
  d.k_Y = k_Y;
  return d;
}

}  // namespace

ScmSpec counterexample_spec(int variant) {
  ScmSpec s;
  s.dims = dims_of(3, 3, 3, 2, 2);
  Matrix pue(3, 3);
  pue << 0.5, 0.2, 0.3,  //
      0.3, 0.5, 0.2,     //
      0.2, 0.3, 0.5;
  s.p_u_given_e = StochasticMatrix(pue);
  Vector q(3);
  if (variant == 1) {
    q << 0.6, 0.3, 0.1;
  } else if (variant == 2) {
    q << 0.5, 0.33, 0.17;
  } else {
    throw std::invalid_argument("variant must be 1 or 2");
  }
  s.q_u = ProbVector(q);
  Matrix pwu(3, 3);
  pwu << 0.23, 0.3, 0.2,  //
      0.46, 0.6, 0.4,     //
      0.31, 0.1, 0.4;
  s.p_w_given_u = StochasticMatrix(pwu);
  Matrix pxu(2, 3);
  pxu << 0.6, 0.3, 0.5,  //
      0.4, 0.7, 0.5;
  s.p_x_given_u = StochasticMatrix(pxu);
  const double y_at_x0[3] = {0.5, 0.2, 0.3};
  const double y_at_x1[3] = {0.4, 0.6, 0.7};
  s.p_y_given_uwx = make_outcome_tensor(s.dims, [&](std::size_t y, std::size_t u, std::size_t, std::size_t x) {
    const double p = x == 0 ? y_at_x0[u] : y_at_x1[u];
    return y == 0 ? p : 1.0 - p;
  });
  s.domain_prior = ProbVector::uniform(4);
  s.validate();
  return s;
}

ScmSpec well_conditioned_spec() {
  ScmSpec s;
  s.dims = dims_of(2, 2, 2, 2, 2);
  Matrix pue(2, 2);
  pue << 0.8, 0.2,  //
      0.2, 0.8;
  s.p_u_given_e = StochasticMatrix(pue);
  Vector q(2);
  q << 0.4, 0.6;
  s.q_u = ProbVector(q);
  Matrix pwu(2, 2);
  pwu << 0.85, 0.15,  //
      0.15, 0.85;
  s.p_w_given_u = StochasticMatrix(pwu);
  Matrix pxu(2, 2);
  pxu << 0.7, 0.3,  //
      0.3, 0.7;
  s.p_x_given_u = StochasticMatrix(pxu);
  // p(y = 0 | u, w, x), indexed [x][w][u].
  const double p0[2][2][2] = {{{0.2, 0.7}, {0.3, 0.8}}, {{0.4, 0.6}, {0.5, 0.9}}};
  s.p_y_given_uwx = make_outcome_tensor(s.dims, [&](std::size_t y, std::size_t u, std::size_t w, std::size_t x) {
    return y == 0 ? p0[x][w][u] : 1.0 - p0[x][w][u];
  });
  s.domain_prior = ProbVector::uniform(3);
  s.validate();
  return s;
}

ScmSpec random_spec(std::size_t k_E, std::size_t k_U, std::size_t k_W, std::size_t k_X, std::size_t k_Y, Rng& rng) {
  return sample_scm_spec(dims_of(k_E, k_U, k_W, k_X, k_Y), rng);
}

namespace {

// Target-domain joint q(u, w, x, y) in a flat array.
std::vector<double> target_joint(const ScmSpec& s) {
  const auto& d = s.dims;
  std::vector<double> j(d.k_U * d.k_W * d.k_X * d.k_Y);
  for (std::size_t u = 0; u < d.k_U; ++u)
    for (std::size_t w = 0; w < d.k_W; ++w)
      for (std::size_t x = 0; x < d.k_X; ++x)
        for (std::size_t y = 0; y < d.k_Y; ++y)
          j[((u * d.k_W + w) * d.k_X + x) * d.k_Y + y] =
              s.q_u[u] * s.p_w_given_u(w, u) * s.p_x_given_u(x, u) * s.p_y(y, u, w, x);
  return j;
}

}  // namespace

double brute_force_effect(const ScmSpec& s, std::size_t x, std::size_t y) {
  const auto& d = s.dims;
  const auto j = target_joint(s);
  double effect = 0.0;
  for (std::size_t u = 0; u < d.k_U; ++u) {
    double q_u = 0.0, q_ux = 0.0, q_uxy = 0.0;
    for (std::size_t w = 0; w < d.k_W; ++w)
      for (std::size_t xx = 0; xx < d.k_X; ++xx)
        for (std::size_t yy = 0; yy < d.k_Y; ++yy) {
          const double p = j[((u * d.k_W + w) * d.k_X + xx) * d.k_Y + yy];
          q_u += p;
          if (xx == x) {
            q_ux += p;
            if (yy == y) q_uxy += p;
          }
        }
    effect += q_uxy / q_ux * q_u;
  }
  return effect;
}

double brute_force_target_conditional(const ScmSpec& s, std::size_t x, std::size_t y) {
  const auto& d = s.dims;
  const auto j = target_joint(s);
  double num = 0.0, den = 0.0;
  for (std::size_t u = 0; u < d.k_U; ++u)
    for (std::size_t w = 0; w < d.k_W; ++w)
      for (std::size_t yy = 0; yy < d.k_Y; ++yy) {
        const double p = j[((u * d.k_W + w) * d.k_X + x) * d.k_Y + yy];
        den += p;
        if (yy == y) num += p;
      }
  return num / den;
}

double ExtendedScm::joint(std::size_t e, std::size_t u, std::size_t z, std::size_t w, std::size_t x,
                          std::size_t y) const {
  return p_u_e(u, e) * p_z_ue[e](z, u) * p_w_uz[z](w, u) * p_x_uze[e][z](x, u) * p_y_uwxz[x][z][w](y, u);
}

ExtendedScm random_extended(std::size_t k_E, std::size_t k_U, std::size_t k_W, std::size_t k_Z, Rng& rng) {
  ExtendedScm m{k_E, k_U, k_W, 2, 2, k_Z, {}, {}, {}, {}, {}};
  m.p_u_e = dirichlet_matrix(k_U, k_E + 1, rng);
  for (std::size_t e = 0; e <= k_E; ++e) m.p_z_ue.push_back(dirichlet_matrix(k_Z, k_U, rng));
  for (std::size_t z = 0; z < k_Z; ++z) m.p_w_uz.push_back(dirichlet_matrix(k_W, k_U, rng));
  m.p_x_uze.resize(k_E + 1);
  for (std::size_t e = 0; e <= k_E; ++e)
    for (std::size_t z = 0; z < k_Z; ++z) m.p_x_uze[e].push_back(dirichlet_matrix(m.k_X, k_U, rng));
  m.p_y_uwxz.assign(m.k_X, std::vector<std::vector<Matrix>>(k_Z));
  for (std::size_t x = 0; x < m.k_X; ++x)
    for (std::size_t z = 0; z < k_Z; ++z)
      for (std::size_t w = 0; w < k_W; ++w) m.p_y_uwxz[x][z].push_back(dirichlet_matrix(m.k_Y, k_U, rng));
  return m;
}

std::vector<CovariateStratum> extended_strata(const ExtendedScm& m, std::size_t x, std::size_t y, Vector& q_z) {
  const std::size_t T = m.k_E;
  std::vector<CovariateStratum> out;
  q_z = Vector::Zero(m.k_Z);
  for (std::size_t z = 0; z < m.k_Z; ++z) {
    CovariateStratum s;
    s.p_y_exz = RowVector::Zero(m.k_E);
    s.p_w_exz = Matrix::Zero(m.k_W, m.k_E);
    s.q_w_z = Vector::Zero(m.k_W);
    for (std::size_t e = 0; e < m.k_E; ++e) {
      double p_xz = 0.0;
      for (std::size_t u = 0; u < m.k_U; ++u)
        for (std::size_t w = 0; w < m.k_W; ++w)
          for (std::size_t yy = 0; yy < m.k_Y; ++yy) {
            const double p = m.joint(e, u, z, w, x, yy);
            p_xz += p;
            s.p_w_exz(w, e) += p;
            if (yy == y) s.p_y_exz(e) += p;
          }
      s.p_y_exz(e) /= p_xz;
      s.p_w_exz.col(e) /= p_xz;
    }
    double qz = 0.0;
    for (std::size_t u = 0; u < m.k_U; ++u)
      for (std::size_t w = 0; w < m.k_W; ++w)
        for (std::size_t xx = 0; xx < m.k_X; ++xx)
          for (std::size_t yy = 0; yy < m.k_Y; ++yy) {
            const double p = m.joint(T, u, z, w, xx, yy);
            qz += p;
            s.q_w_z(w) += p;
          }
    s.q_w_z /= qz;
    q_z(z) = qz;
    out.push_back(std::move(s));
  }
  return out;
}

double extended_brute_force(const ExtendedScm& m, std::size_t x, std::size_t y) {
  const std::size_t T = m.k_E;
  double total = 0.0;
  for (std::size_t z = 0; z < m.k_Z; ++z)
    for (std::size_t u = 0; u < m.k_U; ++u) {
      double p_y_uxz = 0.0;
      for (std::size_t w = 0; w < m.k_W; ++w) p_y_uxz += m.p_y_uwxz[x][z][w](y, u) * m.p_w_uz[z](w, u);
      total += p_y_uxz * m.p_u_e(u, T) * m.p_z_ue[T](z, u);
    }
  return total;
}

Matrix random_rank_deficient(std::size_t k_W, std::size_t k_E, std::size_t rank, Rng& rng) {
  if (rank == 0 || rank >= k_W || rank > k_E) throw std::invalid_argument("need 0 < rank < k_W, rank <= k_E");
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, rank - 1);
  Matrix m(k_W, k_E);
  for (std::size_t r = 0; r < rank; ++r)
    for (std::size_t c = 0; c < k_E; ++c) m(r, c) = unif(rng);
  for (std::size_t r = rank; r < k_W; ++r) {
    if (unif(rng) < 0.3) {
      m.row(r) = m.row(pick(rng));  // duplicate
    } else {
      m.row(r).setZero();
      for (std::size_t b = 0; b < rank; ++b) m.row(r) += unif(rng) * m.row(b);  // mixture
    }
  }
  // Scaling columns keeps every row relation and makes columns pmfs.
  for (std::size_t c = 0; c < k_E; ++c) m.col(c) /= m.col(c).sum();
  // Shuffle rows so dependent rows are not always last.
  std::vector<std::size_t> perm(k_W);
  for (std::size_t i = 0; i < k_W; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix out(k_W, k_E);
  for (std::size_t i = 0; i < k_W; ++i) out.row(i) = m.row(perm[i]);
  return out;
}

}  // namespace fixtures
