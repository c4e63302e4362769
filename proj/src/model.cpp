#include "labcap/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace labcap::model {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double saturation_g(double K, double K_s) {
  return K / (K_s * K_s + K * K);
}

double saturation_g_prime(double K, double K_s) {
  const double s = K_s * K_s + K * K;
  return (K_s * K_s - K * K) / (s * s);
}

double saturation_g_second(double K, double K_s) {
  const double s = K_s * K_s + K * K;
  return 2.0 * K * (K * K - 3.0 * K_s * K_s) / (s * s * s);
}

void ScaledModelParams::validate() const {
  require(alpha1 >= 0.0 && alpha2 >= 0.0, "model: growth rates must be >= 0");
  require(beta1 >= 0.0 && beta2 >= 0.0, "model: competition coefficients must be >= 0");
  require(c1 >= 0.0 && c2 >= 0.0 && a1 >= 0.0 && a2 >= 0.0 && b >= 0.0,
          "model: diffusion coefficients must be >= 0");
  require(K_s > 0.0, "model: K_s must be > 0");
  require(gamma > 0.0, "model: gamma must be > 0");
  require(c1 + a1 > 0.0, "model: ellipticity requires c1 + a1 > 0");
  require(c2 > a2 * saturation_g(K_s, K_s),
          "model: ellipticity requires c2 > a2 g(K_s)");
  require(beta1 * beta2 > 1.0,
          "model: dominance of competitiveness requires beta1*beta2 > 1");
}

ScaledModelParams rescale(const ces::LotkaVolterraCoeffs& lv,
                          const RawDiffusion& diffusion, double gamma) {
  require(lv.b12_t == lv.b21_t, "rescale: b12_t == b21_t required");
  require(lv.b12_t > 0.0, "rescale: strict mutualism (b12_t > 0) required");
  require(diffusion.c1 >= 0.0 && diffusion.c2 >= 0.0 && diffusion.a11 >= 0.0 &&
              diffusion.a12 >= 0.0 && diffusion.a22 >= 0.0,
          "rescale: raw diffusion coefficients must be >= 0");
  require(diffusion.K_s > 0.0, "rescale: K_s must be > 0");

  const double b21 = lv.b21_t;
  const double b12 = lv.b12_t;
  ScaledModelParams p;
  p.alpha1 = lv.alpha1_t;
  p.alpha2 = lv.alpha2_t;
  // The scaled system carries the minus signs explicitly, so beta1/beta2 are
  // the magnitudes of the self-interaction entries.
  p.beta1 = std::abs(lv.b11_t) / b21;
  p.beta2 = std::abs(lv.b22_t) / b12;
  p.c1 = diffusion.c1;
  p.c2 = diffusion.c2;
  p.a1 = diffusion.a11 / b21;
  p.a2 = diffusion.a22 * b12;
  p.b = diffusion.a12 / b12;
  p.K_s = b12 * diffusion.K_s;
  p.gamma = gamma;
  p.validate();
  return p;
}

Equilibrium equilibrium(const ScaledModelParams& p) {
  const double det = p.beta1 * p.beta2 - 1.0;
  if (!(det > 0.0))
    throw std::invalid_argument(
        "equilibrium: no admissible coexistence equilibrium (beta1*beta2 <= 1)");
  return {(p.alpha2 + p.alpha1 * p.beta2) / det,
          (p.alpha1 + p.alpha2 * p.beta1) / det};
}

Eigen::Vector2d reaction(const ScaledModelParams& p, double L, double K) {
  return {p.gamma * L * (p.alpha1 - p.beta1 * L + K),
          p.gamma * K * (p.alpha2 + L - p.beta2 * K)};
}

}  // namespace labcap::model
