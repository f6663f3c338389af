#pragma once

// Self-describing JSON dumps of generated instances. A dump records the
// generator parameters and seed (enough to regenerate the instance) together
// with the generated data, so a run can be audited without rerunning it.

#include "superpolyak/problems/compressed_sensing.hpp"
#include "superpolyak/problems/matrix_sensing.hpp"
#include "superpolyak/problems/max_linear.hpp"
#include "superpolyak/problems/phase_retrieval.hpp"

#include <json.hpp>

#include <vector>

namespace superpolyak::problems {

using Json = nlohmann::json;

/// Column-major matrix as {"rows", "cols", "data"}.
inline Json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

inline Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Matrix matrix_from_json(const Json& j) {
  const auto data = j.at("data").get<std::vector<double>>();
  return Eigen::Map<const Matrix>(data.data(), j.at("rows").get<Index>(), j.at("cols").get<Index>());
}

inline Vector vector_from_json(const Json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
}

inline Json complex_matrix_json(const CMatrix& m) {
  return {{"real", matrix_json(m.real())}, {"imag", matrix_json(m.imag())}};
}

inline Json to_json(const MatrixSensingInstance& in) {
  return {{"problem", "matrix_sensing"},
          {"params",
           {{"d", in.d}, {"r", in.r}, {"m", in.m}, {"kappa", in.kappa_tilde},
            {"ensemble", std::string(to_string(in.ensemble))}}},
          {"seed", in.seed},
          {"data",
           {{"left", matrix_json(in.left.dense())},
            {"right", matrix_json(in.right.dense())},
            {"targets", vector_json(in.targets)},
            {"u_bar", matrix_json(in.u_bar)},
            {"v_bar", matrix_json(in.v_bar)}}}};
}

inline Json to_json(const MaxLinearInstance& in) {
  return {{"problem", "max_linear"},
          {"params", {{"d", in.d}, {"r", in.r}, {"m", in.m}}},
          {"seed", in.seed},
          {"data",
           {{"a", matrix_json(in.a)}, {"betas", matrix_json(in.betas)}, {"targets", vector_json(in.targets)}}}};
}

inline Json to_json(const PhaseRetrievalInstance& in) {
  CMatrix x(in.x_bar.size(), 1);
  x.col(0) = in.x_bar;
  return {{"problem", "phase_retrieval"},
          {"params", {{"d", in.d}, {"m", in.m}}},
          {"seed", in.seed},
          {"data",
           {{"a", complex_matrix_json(in.a)},
            {"x_bar", complex_matrix_json(x)},
            {"magnitudes", vector_json(in.magnitudes)}}}};
}

inline Json to_json(const CompressedSensingInstance& in) {
  return {{"problem", "compressed_sensing"},
          {"params",
           {{"d", in.d}, {"m", in.m}, {"s", in.s}, {"lambda", in.lambda}, {"literal_prox", in.literal_prox}}},
          {"seed", in.seed},
          {"data",
           {{"a", matrix_json(in.a)},
            {"x_bar", vector_json(in.x_bar)},
            {"y", vector_json(in.y)},
            {"step", in.step},
            {"threshold", in.threshold},
            {"fixed_point", vector_json(in.fixed_point)}}}};
}

}  // namespace superpolyak::problems
