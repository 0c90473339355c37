// Sweeps the generalized GHZ family and compares the two-setting condition
// with the multisetting one.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "bellineq/bellineq.hpp"

using namespace bellineq;

int main() {
  OptimizerOptions opt;
  opt.restarts = 10;
  MultisettingOptions mopt;
  mopt.restarts = 10;
  for (int n : {3, 4, 5}) {
    std::printf("N=%d  two-setting threshold sin2a = %.4f\n", n, scarani_gisin_threshold(n));
    std::printf("  %-8s %-8s %-12s %-12s %-12s\n", "alpha", "sin2a", "two-setting", "C_N", "lower bound");
    for (int i = 1; i <= 8; ++i) {
      const double a = std::numbers::pi / 4 * i / 8;
      const auto t = ghz_tensor_analytic({n, a});
      const double two = condition_two_setting_N(t, opt).value;
      const double cn = condition_multisetting_CN(t, mopt).value;
      const double s2 = std::pow(std::sin(2 * a), 2);
      std::printf("  %-8.4f %-8.4f %-12.6f %-12.6f %-12.6f\n", a, std::sin(2 * a), two, cn,
                  std::ldexp(s2, n - 2) + 1 - s2);
    }
  }
}
