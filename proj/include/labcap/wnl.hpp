#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>

#include "labcap/model.hpp"
#include "labcap/stability.hpp"

namespace labcap::wnl {

/// Null-space data of the critical operator A_c = gamma R - k_c^2 Q(b_c).
struct WnlVectors {
  Eigen::Vector2d rho;   // right null vector, normalized to (M, 1)
  Eigen::Vector2d eta;   // left null vector, normalized to (1, M*)
  double M, M_star;
  double k_bar_c;        // admissible critical wavenumber (integer or half-integer)
  double epsilon_ctrl;   // sqrt((b - b_c)/b_c)
};

enum class Regime { supercritical, subcritical };

struct WnlResult {
  double sigma;                // growth-rate coefficient, > 0
  double ell;                  // Landau constant
  Regime regime;               // supercritical iff ell > 0
  std::optional<double> A_inf; // sqrt(sigma/ell), defined iff ell > 0
  Eigen::Vector2d w20, w22;    // second-order correction vectors
  WnlVectors vectors;
  double b, b_c, k_c;
};

/// Null vectors of the critical operator. Throws std::runtime_error if the
/// supplied (b_c, k_c) is not at criticality (null residual above
/// 1e-8 * ||A_c||).
WnlVectors null_vectors(const model::ScaledModelParams& p,
                        const model::Equilibrium& eq, double b_c, double k_c,
                        double b);

/// Bilinear symmetric form of the quadratic reaction terms.
Eigen::Vector2d quad_form_reaction(const model::ScaledModelParams& p,
                                   const Eigen::Vector2d& x,
                                   const Eigen::Vector2d& y);

/// Bilinear symmetric form of the quadratic diffusion terms. The capital
/// component carries -a2 g'(K*): it is the second Taylor coefficient of the
/// flux potential c2 K - a2 \int g.
Eigen::Vector2d quad_form_diffusion(const model::ScaledModelParams& p,
                                    const model::Equilibrium& eq,
                                    const Eigen::Vector2d& x,
                                    const Eigen::Vector2d& y);

/// M_j = Q_R - j^2 k_c^2 Q_Q, the quadratic form felt by the j-th harmonic.
Eigen::Vector2d m_form(const model::ScaledModelParams& p,
                       const model::Equilibrium& eq, int j, double k_c,
                       const Eigen::Vector2d& x, const Eigen::Vector2d& y);

/// Solves L0 w20 = -M_0(rho,rho)/4 and
/// L2 w22 = -M_2(rho,rho)/4 - b_c k_c^2 rho1 rho2 e1,
/// with L_j = gamma R - j^2 k_c^2 Q(b_c). Throws std::runtime_error when L2
/// is singular (resonance of the second harmonic).
std::pair<Eigen::Vector2d, Eigen::Vector2d> second_order_corrections(
    const WnlVectors& v, const model::ScaledModelParams& p,
    const model::Equilibrium& eq, double b_c, double k_c);

/// Growth-rate and Landau coefficients of the cubic amplitude equation
/// dA/dT = sigma A - ell A^3. `b2_norm` is the second-order coefficient of
/// the bifurcation-parameter expansion; the published convention b2 = 1 is
/// the default.
struct StuartLandau {
  double sigma, ell;
  Regime regime;
};
StuartLandau stuart_landau(const WnlVectors& v, const Eigen::Vector2d& w20,
                           const Eigen::Vector2d& w22,
                           const model::ScaledModelParams& p,
                           const model::Equilibrium& eq, double b_c,
                           double k_c, double b2_norm = 1.0);

/// Full weakly nonlinear analysis at bifurcation parameter b.
WnlResult analyze(const model::ScaledModelParams& p,
                  const model::Equilibrium& eq, double b);

/// Second-order pattern approximation sampled at the given nodes:
/// (L*,K*) + eps sqrt(sigma/ell) rho cos(kbar x)
///        + eps^2 (sigma/ell) (w20 + w22 cos(2 kbar x)).
/// Throws std::domain_error in the subcritical regime.
std::pair<Eigen::VectorXd, Eigen::VectorXd> assemble_pattern(
    const WnlResult& result, const model::Equilibrium& eq,
    const Eigen::VectorXd& x);

}  // namespace labcap::wnl
