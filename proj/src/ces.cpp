#include "labcap/ces.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace labcap::ces {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_point(double K, double L) {
  if (!(K > 0.0) || !(L > 0.0))
    throw std::domain_error("CES evaluation requires K > 0 and L > 0");
}

}  // namespace

void CesParams::validate() const {
  require(A > 0.0, "CesParams: A must be > 0");
  require(alpha > 0.0 && alpha < 1.0, "CesParams: alpha must be in (0,1)");
  require(beta > 0.0 && beta < 1.0, "CesParams: beta must be in (0,1)");
  require(epsilon > 0.0 && epsilon < 1.0, "CesParams: epsilon must be in (0,1)");
  require(eta < 1.0 && eta != 0.0, "CesParams: eta must be < 1 and != 0");
  require(epsilon >= eta, "CesParams: epsilon >= eta required");
}

void FactorPrices::validate() const {
  require(w_star > 0.0, "FactorPrices: w_star must be > 0");
  require(r_star > 0.0, "FactorPrices: r_star must be > 0");
}

double ces_output(const CesParams& p, double K, double L) {
  check_point(K, L);
  const double Q = p.alpha * std::pow(K, p.eta) + p.beta * std::pow(L, p.eta);
  return p.A * std::pow(Q, p.epsilon / p.eta);
}

Eigen::Vector2d marginal_products(const CesParams& p, double K, double L) {
  check_point(K, L);
  const double Q = p.alpha * std::pow(K, p.eta) + p.beta * std::pow(L, p.eta);
  const double common = p.A * p.epsilon * std::pow(Q, p.epsilon / p.eta - 1.0);
  const double dL = common * p.beta * std::pow(L, p.eta - 1.0);
  const double dK = common * p.alpha * std::pow(K, p.eta - 1.0);
  return {dL, dK};
}

double profits(const CesParams& p, const FactorPrices& f, double K, double L) {
  return ces_output(p, K, L) - f.w_star * L - f.r_star * K;
}

FactorPoint profits_optimum(const CesParams& p, const FactorPrices& f,
                            OptimumRule rule) {
  p.validate();
  f.validate();
  if (!(p.epsilon < 1.0))
    throw std::invalid_argument("profits_optimum: epsilon < 1 required");

  const double inv1me = 1.0 / (1.0 - p.epsilon);
  const double rho =
      p.A * p.epsilon *
      std::pow(1.0 + std::pow(f.w_star / f.r_star, p.eta / (1.0 - p.eta)) *
                         std::pow(p.alpha / p.beta, 1.0 / (1.0 - p.eta)),
               (p.epsilon - p.eta) / p.eta);
  const double L_e = std::pow(
      rho / f.w_star * std::pow(p.beta, p.epsilon / p.eta), inv1me);

  double K_e = 0.0;
  switch (rule) {
    case OptimumRule::closed_form:
      K_e = std::pow(rho / f.r_star * std::pow(p.alpha, p.epsilon / p.eta),
                     inv1me);
      break;
    case OptimumRule::first_order:
      // K/L from the ratio of the two first-order conditions.
      K_e = std::pow(f.r_star * p.beta / (f.w_star * p.alpha),
                     1.0 / (p.eta - 1.0)) *
            L_e;
      break;
  }
  return {L_e, K_e};
}

Eigen::Matrix2d profits_hessian(const CesParams& p, const FactorPrices& f,
                                double K, double L) {
  check_point(K, L);
  const double w = f.w_star, r = f.r_star;
  const double Q = p.alpha * std::pow(K, p.eta) + p.beta * std::pow(L, p.eta);
  const double d = p.epsilon - p.eta;
  Eigen::Matrix2d H;
  H(0, 0) = (p.beta * d / Q * w * std::pow(L, p.eta) - (1.0 - p.eta) * w) / L;
  H(0, 1) = p.alpha * d / Q * w * std::pow(K, p.eta - 1.0);
  H(1, 0) = p.beta * d / Q * r * std::pow(L, p.eta - 1.0);
  H(1, 1) = (p.alpha * d / Q * r * std::pow(K, p.eta) - (1.0 - p.eta) * r) / K;
  return H;
}

Eigen::Matrix2d output_hessian(const CesParams& p, double K, double L) {
  // Same compressed entries with the local marginal products in place of the
  // fixed prices; this is algebraically the exact Hessian of Y everywhere.
  check_point(K, L);
  const Eigen::Vector2d mp = marginal_products(p, K, L);
  const double w = mp[0], r = mp[1];
  const double Q = p.alpha * std::pow(K, p.eta) + p.beta * std::pow(L, p.eta);
  const double d = p.epsilon - p.eta;
  Eigen::Matrix2d H;
  H(0, 0) = (p.beta * d / Q * w * std::pow(L, p.eta) - (1.0 - p.eta) * w) / L;
  H(0, 1) = p.alpha * d / Q * w * std::pow(K, p.eta - 1.0);
  H(1, 0) = p.beta * d / Q * r * std::pow(L, p.eta - 1.0);
  H(1, 1) = (p.alpha * d / Q * r * std::pow(K, p.eta) - (1.0 - p.eta) * r) / K;
  return H;
}

LotkaVolterraCoeffs derive_lv(const CesParams& p, const FactorPrices& f,
                              OptimumRule rule) {
  const FactorPoint opt = profits_optimum(p, f, rule);
  const Eigen::Matrix2d H = profits_hessian(p, f, opt.capital, opt.labor);

  LotkaVolterraCoeffs lv;
  lv.L_e = opt.labor;
  lv.K_e = opt.capital;
  lv.b11_t = H(0, 0);
  lv.b22_t = H(1, 1);
  // The mutualistic coefficient is the (L,K) entry; at a first-order optimum
  // the (K,L) entry coincides with it, and the closed-form pipeline adopts the
  // same value for both.
  const double b12 = (rule == OptimumRule::first_order)
                         ? 0.5 * (H(0, 1) + H(1, 0))
                         : H(0, 1);
  lv.b12_t = b12;
  lv.b21_t = b12;
  lv.alpha1_t = f.w_star * (1.0 - p.epsilon);
  lv.alpha2_t = f.r_star * (1.0 - p.epsilon);

  // Sign structure guaranteed by the admissible parameter range; a violation
  // here means an internal inconsistency, not a user error.
  const double det_printed = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
  const double det_identity = (1.0 - p.epsilon) * (1.0 - p.eta) * f.w_star *
                              f.r_star / (lv.L_e * lv.K_e);
  const bool ok = lv.alpha1_t > 0.0 && lv.alpha2_t > 0.0 && lv.b11_t < 0.0 &&
                  lv.b22_t < 0.0 && lv.b12_t >= 0.0 && det_printed > 0.0 &&
                  std::abs(det_printed - det_identity) <=
                      1e-8 * std::abs(det_identity);
  if (!ok)
    throw std::runtime_error(
        "derive_lv: internal consistency violation in the sign structure");
  return lv;
}

}  // namespace labcap::ces
