#pragma once

#include <map>
#include <string>

namespace yamabe {

struct YamabeValue {
  double value = 0;
  std::string formula_id;
  std::map<std::string, double> inputs;
};

/// Volume of the unit n-sphere: 2 pi^((n+1)/2) / Gamma((n+1)/2).
double vol_sphere(int n);

/// n(n-1) vol(S^n(1))^(2/n), n >= 2.
YamabeValue yamabe_sphere(int n);

/// 4 pi chi for closed surfaces.
YamabeValue yamabe_surface(int chi);

/// -+ 4 sqrt(2) pi sqrt(2 chi + 3 tau) from the minimal-model numbers;
/// the positive branch is reserved for the projective plane.
YamabeValue yamabe_kahler(int chi, int tau, bool is_cp2);

}  // namespace yamabe
