// Generates members of the 4x4x2 family, checks that they are facets and
// maximizes their quantum value on the three-qubit GHZ state.

#include <cstdio>
#include <numbers>

#include "bellineq/bellineq.hpp"

using namespace bellineq;

int main() {
  const auto ghz = ghz_tensor_analytic({3, std::numbers::pi / 4});
  for (const char* outer : {"0001", "0111", "0110"}) {
    const auto s = SignFunction::from_bitstring(outer);
    const auto ineq = build_442(s, SignFunction::chsh(), SignFunction::chsh());
    const auto rep = check_tightness(ineq);
    const auto best = maximize_bell_value(ghz, ineq);
    std::printf("S=%s S1=S2=0001: %zu/%zu vertices saturate, rank %zu of %zu -> %s; GHZ max %.4f vs bound %lld\n",
                outer, rep.saturating_count, rep.vertex_count, rep.affine_rank, rep.dimension,
                rep.is_tight ? "facet" : "not a facet", best.value, static_cast<long long>(ineq.bound));
  }

  const auto chsh = SignFunction::chsh();
  const auto big = build_recursive(tree_8842(chsh, {chsh, chsh, chsh}, {chsh, chsh, chsh}));
  const auto rep = check_tightness(big);
  std::printf("8x8x4x2 generating inequality: %zu vertices, %zu saturate, rank %zu of %zu -> %s\n", rep.vertex_count,
              rep.saturating_count, rep.affine_rank, rep.dimension, rep.is_tight ? "facet" : "not a facet");
}
