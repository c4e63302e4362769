#pragma once

#include <Eigen/Dense>

namespace labcap::ces {

/// Parameters of the CES production function Y(K,L) = A (alpha K^eta + beta L^eta)^(eps/eta).
/// The output price is normalized to 1 throughout.
struct CesParams {
  double A;        // total factor productivity, > 0
  double alpha;    // capital income share, in (0,1)
  double beta;     // labor income share, in (0,1)
  double epsilon;  // returns parameter, in (0,1)
  double eta;      // substitution parameter, < 1, != 0, <= epsilon

  // Throws std::invalid_argument if outside the admissible range.
  void validate() const;
};

struct FactorPrices {
  double w_star;  // wage per labor unit, > 0
  double r_star;  // rental rate per capital unit, > 0

  void validate() const;
};

/// A point in factor space, ordered (labor, capital).
struct FactorPoint {
  double labor;
  double capital;
};

/// Rule used to locate the profits optimum.
///
/// `closed_form` evaluates the published closed-form expressions, in which the
/// capital equation reuses the labor-side prefactor rho. That point does not
/// satisfy the capital first-order condition unless alpha*w^eta == beta*r^eta,
/// but it is the point the reference experiment table was generated from, so it
/// is the default for the experiment pipeline.
///
/// `first_order` solves both first-order conditions exactly (labor from the
/// closed form, capital from the price-ratio relation) and yields the true
/// profit maximizer.
enum class OptimumRule { closed_form, first_order };

/// Lotka-Volterra reaction coefficients induced by the profits gradient flow:
///   dL/dt = L (alpha1_t + b11_t L + b12_t K)
///   dK/dt = K (alpha2_t + b21_t L + b22_t K)
struct LotkaVolterraCoeffs {
  double alpha1_t, alpha2_t;          // intrinsic growth rates, > 0
  double b11_t, b12_t, b21_t, b22_t;  // interaction matrix; b12_t == b21_t
  double L_e, K_e;                    // factor levels at the optimum used
};

double ces_output(const CesParams& p, double K, double L);

/// (dY/dL, dY/dK) evaluated at (K, L).
Eigen::Vector2d marginal_products(const CesParams& p, double K, double L);

/// Profits P(K,L) = Y(K,L) - w* L - r* K.
double profits(const CesParams& p, const FactorPrices& f, double K, double L);

FactorPoint profits_optimum(const CesParams& p, const FactorPrices& f,
                            OptimumRule rule = OptimumRule::closed_form);

/// Hessian of profits in (L, K) ordering, in the compressed form that uses the
/// factor prices (w*, r*) in place of the marginal products. The two coincide
/// exactly at points satisfying the first-order conditions; elsewhere this
/// matrix is an off-optimum extrapolation and is not symmetric.
Eigen::Matrix2d profits_hessian(const CesParams& p, const FactorPrices& f,
                                double K, double L);

/// Exact Hessian of Y (equivalently of profits) in (L, K) ordering, valid and
/// symmetric at every admissible point.
Eigen::Matrix2d output_hessian(const CesParams& p, double K, double L);

/// Builds the mutualistic Lotka-Volterra coefficients: the interaction matrix
/// is profits_hessian at the optimum selected by `rule`, with both
/// off-diagonal entries set to the (L,K) entry, and the growth rates are the
/// closed-form values w*(1-eps), r*(1-eps).
LotkaVolterraCoeffs derive_lv(const CesParams& p, const FactorPrices& f,
                              OptimumRule rule = OptimumRule::closed_form);

}  // namespace labcap::ces
