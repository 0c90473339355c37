// Builds an explicit hidden-variable model for a local 2x2 table, then shows
// the certificate returned for the Tsirelson table.

#include <cmath>
#include <cstdio>

#include "bellineq/bellineq.hpp"

using namespace bellineq;

int main() {
  const ExperimentLayout layout({2, 2});
  const CorrelationTable local(layout, {0.5, 0.5, 0.5, -0.5});
  std::printf("table E = [0.5 0.5; 0.5 -0.5]  lhs = %.4f (bound 4)\n", general_bell_lhs(local));

  const auto model = construct_lhv_model(local);
  std::printf("model: %zu weighted strategies, tail %.4f\n", model.weights.size(), model.tail);
  for (const auto& [s, w] : model.explicit_weights())
    if (w > 1e-15)
      std::printf("  A1=(%+d,%+d) A2=(%+d,%+d)  p=%.4f\n", s.outcome(0, 0), s.outcome(0, 1), s.outcome(1, 0),
                  s.outcome(1, 1), w);
  const auto back = evaluate_model(model);
  std::printf("reconstructed E = [%.4f %.4f; %.4f %.4f]\n", back[0], back[1], back[2], back[3]);

  const double r = 1 / std::sqrt(2.0);
  const CorrelationTable tsirelson(layout, {r, r, r, -r});
  const auto s = most_violated_sign_function(tsirelson);
  const auto cert = sign_inequality(s);
  std::printf("\nTsirelson table: lhs = %.6f > 4\n", general_bell_lhs(tsirelson));
  std::printf("certificate S = %s  coefficients [%lld %lld; %lld %lld] <= %lld, value %.6f\n",
              s.to_bitstring().c_str(), static_cast<long long>(cert.coefficients[0]),
              static_cast<long long>(cert.coefficients[1]), static_cast<long long>(cert.coefficients[2]),
              static_cast<long long>(cert.coefficients[3]), static_cast<long long>(cert.bound),
              evaluate_inequality(cert, tsirelson));
}
