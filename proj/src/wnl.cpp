#include "labcap/wnl.hpp"

#include <cmath>
#include <stdexcept>

namespace labcap::wnl {

namespace {

Eigen::Matrix2d critical_operator(const model::ScaledModelParams& p,
                                  const model::Equilibrium& eq, double b_c,
                                  double k_c) {
  const stability::LinearizedMatrices m = stability::build_matrices(p, eq, b_c);
  return p.gamma * m.R - k_c * k_c * m.Q;
}

double round_half_up(double x) { return std::floor(x + 0.5); }

}  // namespace

WnlVectors null_vectors(const model::ScaledModelParams& p,
                        const model::Equilibrium& eq, double b_c, double k_c,
                        double b) {
  const stability::LinearizedMatrices m = stability::build_matrices(p, eq, b_c);
  const double kc2 = k_c * k_c;
  const Eigen::Matrix2d A = p.gamma * m.R - kc2 * m.Q;

  const double denom = p.gamma * m.R(1, 0) - kc2 * m.Q(1, 0);  // gamma K* > 0
  WnlVectors v;
  v.M = (-p.gamma * m.R(1, 1) + kc2 * m.Q(1, 1)) / denom;
  v.M_star = (-p.gamma * m.R(0, 0) + kc2 * m.Q(0, 0)) / denom;
  v.rho = {v.M, 1.0};
  v.eta = {1.0, v.M_star};

  const double scale = A.norm();
  const double res = std::max((A * v.rho).norm(), (v.eta.transpose() * A).norm());
  if (res > 1e-8 * scale)
    throw std::runtime_error("null_vectors: (b_c, k_c) is not at criticality");

  v.k_bar_c = round_half_up(2.0 * k_c) / 2.0;
  v.epsilon_ctrl = b > b_c ? std::sqrt((b - b_c) / b_c) : 0.0;
  return v;
}

Eigen::Vector2d quad_form_reaction(const model::ScaledModelParams& p,
                                   const Eigen::Vector2d& x,
                                   const Eigen::Vector2d& y) {
  const double cross = x[0] * y[1] + x[1] * y[0];
  return {p.gamma * (-2.0 * p.beta1 * x[0] * y[0] + cross),
          p.gamma * (-2.0 * p.beta2 * x[1] * y[1] + cross)};
}

Eigen::Vector2d quad_form_diffusion(const model::ScaledModelParams& p,
                                    const model::Equilibrium& eq,
                                    const Eigen::Vector2d& x,
                                    const Eigen::Vector2d& y) {
  const double gp = model::saturation_g_prime(eq.K_star, p.K_s);
  return {p.a1 * x[0] * y[0], -p.a2 * gp * x[1] * y[1]};
}

Eigen::Vector2d m_form(const model::ScaledModelParams& p,
                       const model::Equilibrium& eq, int j, double k_c,
                       const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
  return quad_form_reaction(p, x, y) -
         static_cast<double>(j * j) * k_c * k_c * quad_form_diffusion(p, eq, x, y);
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> second_order_corrections(
    const WnlVectors& v, const model::ScaledModelParams& p,
    const model::Equilibrium& eq, double b_c, double k_c) {
  const stability::LinearizedMatrices m = stability::build_matrices(p, eq, b_c);
  const double kc2 = k_c * k_c;
  const Eigen::Matrix2d L0 = p.gamma * m.R;
  const Eigen::Matrix2d L2 = p.gamma * m.R - 4.0 * kc2 * m.Q;
  if (std::abs(L2.determinant()) <=
      1e-14 * L2.cwiseAbs().maxCoeff() * L2.cwiseAbs().maxCoeff())
    throw std::runtime_error(
        "second_order_corrections: resonant second harmonic (L2 singular)");

  const Eigen::Vector2d rhs0 = -0.25 * m_form(p, eq, 0, k_c, v.rho, v.rho);
  const Eigen::Vector2d rhs2 =
      -0.25 * m_form(p, eq, 2, k_c, v.rho, v.rho) -
      b_c * kc2 * v.rho[0] * v.rho[1] * Eigen::Vector2d{1.0, 0.0};

  Eigen::Vector2d w20 = L0.partialPivLu().solve(rhs0);
  Eigen::Vector2d w22 = L2.partialPivLu().solve(rhs2);
  return {w20, w22};
}

StuartLandau stuart_landau(const WnlVectors& v, const Eigen::Vector2d& w20,
                           const Eigen::Vector2d& w22,
                           const model::ScaledModelParams& p,
                           const model::Equilibrium& eq, double b_c,
                           double k_c, double b2_norm) {
  const double kc2 = k_c * k_c;
  const double inner = v.rho.dot(v.eta);
  if (inner == 0.0)
    throw std::runtime_error("stuart_landau: <rho, eta> vanished");

  // G1 = k_c^2 B2 rho with (B2)_{12} = -b2 L*.
  const Eigen::Vector2d G1{-kc2 * b2_norm * eq.L_star * v.rho[1], 0.0};

  const double gpp = model::saturation_g_second(eq.K_star, p.K_s);
  const Eigen::Vector2d e1{1.0, 0.0};
  const Eigen::Vector2d e2{0.0, 1.0};
  const Eigen::Vector2d G3 =
      -(m_form(p, eq, 1, k_c, v.rho, w20) +
        0.5 * m_form(p, eq, 1, k_c, v.rho, w22)) -
      kc2 * b_c * v.rho[0] * w22[1] * e1 -
      0.5 * kc2 * b_c * v.rho[1] * (2.0 * w20[0] - w22[0]) * e1 -
      0.125 * p.a2 * gpp * kc2 * v.rho[1] * v.rho[1] * v.rho[1] * e2;

  StuartLandau sl;
  sl.sigma = -G1.dot(v.eta) / inner;
  sl.ell = G3.dot(v.eta) / inner;
  sl.regime = sl.ell > 0.0 ? Regime::supercritical : Regime::subcritical;
  return sl;
}

WnlResult analyze(const model::ScaledModelParams& p,
                  const model::Equilibrium& eq, double b) {
  const stability::StabilityReport rep = stability::critical_threshold(p, eq);
  WnlResult res;
  res.b = b;
  res.b_c = rep.b_c;
  res.k_c = rep.k_c;
  res.vectors = null_vectors(p, eq, rep.b_c, rep.k_c, b);
  std::tie(res.w20, res.w22) =
      second_order_corrections(res.vectors, p, eq, rep.b_c, rep.k_c);
  const StuartLandau sl =
      stuart_landau(res.vectors, res.w20, res.w22, p, eq, rep.b_c, rep.k_c);
  res.sigma = sl.sigma;
  res.ell = sl.ell;
  res.regime = sl.regime;
  if (res.regime == Regime::supercritical)
    res.A_inf = std::sqrt(res.sigma / res.ell);
  return res;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> assemble_pattern(
    const WnlResult& result, const model::Equilibrium& eq,
    const Eigen::VectorXd& x) {
  if (result.regime != Regime::supercritical)
    throw std::domain_error(
        "assemble_pattern: the cubic amplitude equation carries no amplitude "
        "information in the subcritical regime");

  const double eps = result.vectors.epsilon_ctrl;
  const double amp1 = eps * std::sqrt(result.sigma / result.ell);
  const double amp2 = eps * eps * (result.sigma / result.ell);
  const double kb = result.vectors.k_bar_c;

  Eigen::VectorXd L(x.size()), K(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double c1 = std::cos(kb * x[i]);
    const double c2 = std::cos(2.0 * kb * x[i]);
    L[i] = eq.L_star + amp1 * result.vectors.rho[0] * c1 +
           amp2 * (result.w20[0] + result.w22[0] * c2);
    K[i] = eq.K_star + amp1 * result.vectors.rho[1] * c1 +
           amp2 * (result.w20[1] + result.w22[1] * c2);
  }
  return {L, K};
}

}  // namespace labcap::wnl
