#pragma once

// JSON encodings of the library types. Readers check structure and types
// before building objects and throw InputError on any mismatch.
//
//   state       {"n_qubits": N, "amplitudes": [[re, im], ...]}          (2^N entries)
//   tensor      {"n_qubits": N, "full_components": nested 4 x ... x 4}
//   table       {"layout": [m_1, ...], "values": nested m_1 x ... x m_N}
//   inequality  {"layout": [m_1, ...], "coefficients": nested ints, "bound": int}
//   model       [{"strategy": [bits per party], "weight": w}, ...]
//   report      {"kind", "value", "violated", "certified", "converged", "seed", "frames"}

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "bellineq/errors.hpp"
#include "bellineq/layout.hpp"
#include "bellineq/lhvcore.hpp"
#include "bellineq/multiset.hpp"
#include "bellineq/qcond.hpp"
#include "bellineq/qstate.hpp"

namespace bellineq::json_io {

using nlohmann::json;

namespace detail {

template <class T>
json nest(std::span<const T> flat, std::span<const std::size_t> dims, std::size_t depth = 0,
          std::size_t offset = 0) {
  json arr = json::array();
  if (dims.empty()) return json(flat[0]);
  std::size_t stride = 1;
  for (std::size_t m = depth + 1; m < dims.size(); ++m) stride *= dims[m];
  for (std::size_t i = 0; i < dims[depth]; ++i) {
    if (depth + 1 == dims.size())
      arr.push_back(flat[offset + i]);
    else
      arr.push_back(nest(flat, dims, depth + 1, offset + i * stride));
  }
  return arr;
}

template <class T>
void flatten(const json& j, std::span<const std::size_t> dims, std::size_t depth, std::vector<T>& out,
             const std::string& what) {
  require(j.is_array() && j.size() == dims[depth],
          what + ": expected an array of length " + std::to_string(dims[depth]) + " at depth " +
              std::to_string(depth));
  for (const auto& e : j) {
    if (depth + 1 < dims.size()) {
      flatten(e, dims, depth + 1, out, what);
    } else if constexpr (std::is_integral_v<T>) {
      require(e.is_number_integer(), what + ": entries must be integers");
      out.push_back(e.get<T>());
    } else {
      require(e.is_number(), what + ": entries must be numbers");
      out.push_back(e.get<T>());
    }
  }
}

inline const json& field(const json& j, const char* key) {
  require(j.is_object(), std::string("expected a JSON object with key '") + key + "'");
  const auto it = j.find(key);
  require(it != j.end(), std::string("missing key '") + key + "'");
  return *it;
}

inline int small_int(const json& j, const char* what) {
  require(j.is_number_integer(), std::string(what) + " must be an integer");
  const auto v = j.get<std::int64_t>();
  require(v >= 0 && v <= 1'000'000, std::string(what) + " out of range");
  return static_cast<int>(v);
}

inline json vec3(const Eigen::Vector3d& v) { return json::array({v(0), v(1), v(2)}); }

}  // namespace detail

inline json layout_to_json(const ExperimentLayout& l) {
  json a = json::array();
  for (std::size_t j = 0; j < l.parties(); ++j) a.push_back(l.settings(j));
  return a;
}

inline ExperimentLayout layout_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "layout must be a nonempty array of setting counts");
  std::vector<int> m;
  for (const auto& e : j) m.push_back(detail::small_int(e, "layout entry"));
  return ExperimentLayout(std::move(m));
}

inline std::vector<std::size_t> layout_dims(const ExperimentLayout& l) {
  std::vector<std::size_t> d;
  for (std::size_t j = 0; j < l.parties(); ++j) d.push_back(static_cast<std::size_t>(l.settings(j)));
  return d;
}

inline json state_to_json(const PureState& s) {
  json amps = json::array();
  for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i)
    amps.push_back(json::array({s.amplitudes()(i).real(), s.amplitudes()(i).imag()}));
  return {{"n_qubits", s.n_qubits()}, {"amplitudes", amps}};
}

inline PureState state_from_json(const json& j) {
  const int n = detail::small_int(detail::field(j, "n_qubits"), "n_qubits");
  check_qubit_count(n);
  const auto& amps = detail::field(j, "amplitudes");
  require(amps.is_array() && amps.size() == pow_size(2, n), "amplitudes must have 2^n_qubits entries");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const auto& a = amps[i];
    require(a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number(),
            "each amplitude must be [re, im]");
    v(static_cast<Eigen::Index>(i)) = {a[0].get<double>(), a[1].get<double>()};
  }
  return PureState(n, std::move(v));
}

inline json tensor_to_json(const CorrelationTensor& t) {
  const auto& full = t.full_components();
  return {{"n_qubits", t.n_qubits()},
          {"full_components", detail::nest<double>(full.data(), full.dims())}};
}

inline CorrelationTensor tensor_from_json(const json& j) {
  const int n = detail::small_int(detail::field(j, "n_qubits"), "n_qubits");
  check_qubit_count(n);
  const std::vector<std::size_t> dims(static_cast<std::size_t>(n), 4);
  std::vector<double> flat;
  detail::flatten(detail::field(j, "full_components"), dims, 0, flat, "full_components");
  return CorrelationTensor(n, DenseTensor(dims, std::move(flat)));
}

inline json table_to_json(const CorrelationTable& t) {
  const auto dims = layout_dims(t.layout());
  return {{"layout", layout_to_json(t.layout())}, {"values", detail::nest<double>(t.values(), dims)}};
}

inline CorrelationTable table_from_json(const json& j) {
  auto layout = layout_from_json(detail::field(j, "layout"));
  const auto dims = layout_dims(layout);
  std::vector<double> flat;
  detail::flatten(detail::field(j, "values"), dims, 0, flat, "values");
  return CorrelationTable(std::move(layout), std::move(flat));
}

inline json inequality_to_json(const BellInequality& ineq) {
  const auto dims = layout_dims(ineq.layout);
  return {{"layout", layout_to_json(ineq.layout)},
          {"coefficients", detail::nest<std::int64_t>(ineq.coefficients, dims)},
          {"bound", ineq.bound}};
}

inline BellInequality inequality_from_json(const json& j) {
  auto layout = layout_from_json(detail::field(j, "layout"));
  const auto dims = layout_dims(layout);
  std::vector<std::int64_t> c;
  detail::flatten(detail::field(j, "coefficients"), dims, 0, c, "coefficients");
  const auto& b = detail::field(j, "bound");
  require(b.is_number_integer(), "bound must be an integer");
  return BellInequality(std::move(layout), std::move(c), b.get<std::int64_t>());
}

inline json strategy_to_json(const DeterministicStrategy& s) { return s.outcomes; }

/// Every strategy with positive weight, the uniform tail expanded.
inline json model_to_json(const LhvModel& m) {
  json arr = json::array();
  for (const auto& [s, w] : m.explicit_weights())
    if (w > 0.0) arr.push_back({{"strategy", strategy_to_json(s)}, {"weight", w}});
  return arr;
}

inline LhvModel model_from_json(const json& j, const ExperimentLayout& layout) {
  require(j.is_array(), "model must be an array of {strategy, weight}");
  LhvModel m{layout, {}, 0.0};
  for (const auto& e : j) {
    const auto& st = detail::field(e, "strategy");
    require(st.is_array() && st.size() == layout.parties(), "strategy needs one entry per party");
    DeterministicStrategy s;
    for (const auto& o : st) {
      require(o.is_number_unsigned(), "strategy entries must be nonnegative integers");
      s.outcomes.push_back(o.get<std::uint32_t>());
    }
    const auto& w = detail::field(e, "weight");
    require(w.is_number(), "weight must be a number");
    m.weights[s] += w.get<double>();
  }
  m.validate();
  return m;
}

inline json frames_to_json(const FrameAssignment& fa) {
  json arr = json::array();
  for (const auto& f : fa) arr.push_back(json::array({detail::vec3(f.axis(0)), detail::vec3(f.axis(1))}));
  return arr;
}

inline json report_to_json(const ConditionReport& r) {
  json frames = json::array();
  for (const auto& fa : r.frames) frames.push_back(frames_to_json(fa));
  return {{"kind", to_string(r.kind)},
          {"value", r.value},
          {"violated", r.violated},
          {"certified", r.exact ? "exact" : "lower_bound"},
          {"converged", r.converged},
          {"seed", r.seed},
          {"frames", frames}};
}

inline json tightness_to_json(const TightnessReport& t) {
  return {{"tight", t.is_tight},
          {"vertices", t.vertex_count},
          {"saturating", t.saturating_count},
          {"affine_rank", t.affine_rank},
          {"dimension", t.dimension},
          {"max_abs_value", t.max_abs_value}};
}

inline json settings_to_json(const std::vector<std::vector<SettingVector>>& settings) {
  json arr = json::array();
  for (const auto& party : settings) {
    json p = json::array();
    for (const auto& s : party) p.push_back(detail::vec3(s.components()));
    arr.push_back(p);
  }
  return arr;
}

}  // namespace bellineq::json_io
