#include "yamabe/constants.hpp"

#include <cmath>
#include <numbers>

#include "yamabe/errors.hpp"

namespace yamabe {

double vol_sphere(int n) {
  if (n < 1) throw InputError("sphere dimension must be at least 1");
  double half = (n + 1) / 2.0;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

YamabeValue yamabe_sphere(int n) {
  if (n < 2) throw InputError("the sphere formula needs dimension at least 2");
  YamabeValue out;
  out.formula_id = "sphere";
  out.inputs = {{"n", static_cast<double>(n)}};
  out.value = static_cast<double>(n) * (n - 1) * std::pow(vol_sphere(n), 2.0 / n);
  return out;
}

YamabeValue yamabe_surface(int chi) {
  YamabeValue out;
  out.formula_id = "surface";
  out.inputs = {{"chi", static_cast<double>(chi)}};
  out.value = 4.0 * std::numbers::pi * chi;
  return out;
}

YamabeValue yamabe_kahler(int chi, int tau, bool is_cp2) {
  long radicand = 2L * chi + 3L * tau;
  if (radicand < 0) {
    throw InputError("the Kahler formula needs 2*chi + 3*tau >= 0");
  }
  YamabeValue out;
  out.formula_id = "kahler";
  out.inputs = {{"chi", static_cast<double>(chi)},
                {"tau", static_cast<double>(tau)},
                {"is_cp2", is_cp2 ? 1.0 : 0.0}};
  double magnitude =
      4.0 * std::sqrt(2.0) * std::numbers::pi * std::sqrt(static_cast<double>(radicand));
  out.value = is_cp2 ? magnitude : -magnitude;
  return out;
}

}  // namespace yamabe
