#include "treemem/tree.hpp"

#include "treemem/kernels.hpp"

namespace treemem {

double field_max_abs(const LevelField& f) {
  double m = 0.0;
  for (const auto& lv : f.levels)
    for (double v : lv) {
      double a = v < 0 ? -v : v;
      if (a > m) m = a;
    }
  return m;
}

double field_max_abs_diff(const LevelField& a, const LevelField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.levels.size(); ++k) {
    double d = kern::ops().sup_abs_diff(a.levels[k].data(), b.levels[k].data(),
                                        a.levels[k].size());
    if (d > m) m = d;
  }
  return m;
}

double field_max_signed_diff(const LevelField& a, const LevelField& b) {
  double m = -1e300;
  for (std::size_t k = 0; k < a.levels.size(); ++k)
    for (std::size_t i = 0; i < a.levels[k].size(); ++i) {
      double d = a.levels[k][i] - b.levels[k][i];
      if (d > m) m = d;
    }
  return m;
}

double field_min(const LevelField& f) {
  double m = 1e300;
  for (const auto& lv : f.levels)
    for (double v : lv)
      if (v < m) m = v;
  return m;
}

double field_max(const LevelField& f) {
  double m = -1e300;
  for (const auto& lv : f.levels)
    for (double v : lv)
      if (v > m) m = v;
  return m;
}

}  // namespace treemem
