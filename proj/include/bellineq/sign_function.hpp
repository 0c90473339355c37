#pragma once

// Sign functions S: {-1,+1}^n -> {-1,+1} and the Walsh-Hadamard algebra
// that turns them into correlation-function coefficients.
//
// Argument encoding: s = (s_1, ..., s_n) maps to the index whose bit for
// party j (party 1 most significant) is 1 exactly when s_j = -1. A value
// bit of 1 encodes S(s) = -1, so "0001" is the CHSH choice
// S(+,+) = S(+,-) = S(-,+) = 1, S(-,-) = -1.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bellineq/errors.hpp"
#include "bellineq/layout.hpp"

namespace bellineq {

inline constexpr int kMaxEnumerableArity = 4;
inline constexpr int kMaxSignArity = 20;

/// In-place unnormalized Walsh-Hadamard transform; size must be a power of 2.
template <typename T>
void walsh_hadamard(std::span<T> v) {
  for (std::size_t h = 1; h < v.size(); h <<= 1)
    for (std::size_t i = 0; i < v.size(); i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        const T a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
}

class SignFunction {
 public:
  SignFunction(int arity, std::vector<std::uint8_t> bits) : arity_(arity), bits_(std::move(bits)) {
    require(arity_ >= 1 && arity_ <= kMaxSignArity, "sign function arity out of range");
    require(bits_.size() == (std::size_t{1} << arity_), "sign function needs 2^arity values");
    for (auto b : bits_) require(b <= 1, "sign function bits must be 0 or 1");
  }

  static SignFunction from_bitstring(const std::string& s) {
    require(!s.empty(), "empty sign-function bitstring");
    int arity = 0;
    while ((std::size_t{1} << arity) < s.size()) ++arity;
    require((std::size_t{1} << arity) == s.size() && arity >= 1,
            "sign-function bitstring length must be 2^arity with arity >= 1, got " +
                std::to_string(s.size()));
    std::vector<std::uint8_t> bits;
    for (char c : s) {
      require(c == '0' || c == '1', "sign-function bitstring must contain only 0/1");
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return SignFunction(arity, std::move(bits));
  }

  /// Function number `code` in enumeration order: value bit i = bit i of code.
  static SignFunction from_index(int arity, std::uint64_t code) {
    require(arity >= 1 && arity <= kMaxEnumerableArity, "arity too large for indexed functions");
    std::vector<std::uint8_t> bits(std::size_t{1} << arity);
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<std::uint8_t>((code >> i) & 1u);
    return SignFunction(arity, std::move(bits));
  }

  static SignFunction constant(int arity) {
    return SignFunction(arity, std::vector<std::uint8_t>(std::size_t{1} << arity, 0));
  }

  /// The CHSH choice sqrt(2) sin(3pi/4 + (s1+s2-2) pi/4).
  static SignFunction chsh() { return from_bitstring("0001"); }

  int arity() const { return arity_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  int value(std::size_t arg_index) const { return bits_[arg_index] ? -1 : 1; }

  std::string to_bitstring() const {
    std::string s;
    for (auto b : bits_) s += static_cast<char>('0' + b);
    return s;
  }

  /// Walsh coefficients w(k) = sum_s S(s) prod_{j in k} s_j, where bit j of k
  /// selects the second setting of party j.
  std::vector<std::int64_t> walsh() const {
    std::vector<std::int64_t> w(bits_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = value(i);
    walsh_hadamard(std::span<std::int64_t>(w));
    return w;
  }

  friend bool operator==(const SignFunction&, const SignFunction&) = default;

 private:
  int arity_;
  std::vector<std::uint8_t> bits_;
};

inline std::uint64_t sign_function_count(int n) {
  require(n >= 1, "arity must be positive");
  if (n > kMaxEnumerableArity)
    throw ResourceLimit("enumeration of 2^(2^" + std::to_string(n) + ") sign functions exceeds cap");
  return std::uint64_t{1} << (std::uint64_t{1} << n);
}

/// Visits every sign function of arity n exactly once, in index order.
/// Any index range [begin, end) can be visited independently.
inline void for_each_sign_function(int n, const std::function<void(const SignFunction&)>& visit,
                                   std::uint64_t begin = 0, std::uint64_t end = ~std::uint64_t{0}) {
  const auto total = sign_function_count(n);
  for (std::uint64_t code = begin; code < std::min(end, total); ++code)
    visit(SignFunction::from_index(n, code));
}

inline std::vector<SignFunction> enumerate_sign_functions(int n) {
  std::vector<SignFunction> out;
  out.reserve(sign_function_count(n));
  for_each_sign_function(n, [&](const SignFunction& s) { out.push_back(s); });
  return out;
}

/// The member of the complete two-setting family selected by S, as an
/// explicit inequality with bound 2^N.
inline BellInequality sign_inequality(const SignFunction& s) {
  ExperimentLayout layout(std::vector<int>(static_cast<std::size_t>(s.arity()), 2));
  return BellInequality(std::move(layout), s.walsh(), std::int64_t{1} << s.arity());
}

}  // namespace bellineq
