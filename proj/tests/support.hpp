#pragma once

#include <string>

#include "miqp/decompose.hpp"
#include "miqp/instance.hpp"

namespace miqp::testing {

inline std::string fixture(const std::string& name) {
  return std::string(MIQP_FIXTURE_DIR) + "/" + name;
}

/// n = 2, Q = 2I, g = (-2, -2), h = 0, no rows.
inline MiqpInstance worked_instance(std::optional<int> k = 2) {
  MiqpInstance inst;
  inst.n = 2;
  inst.Q = 2.0 * Matrix::Identity(2, 2);
  inst.g = Vector::Constant(2, -2.0);
  inst.h = Vector::Zero(2);
  inst.A = SparseMatrix(0, 2);
  inst.b = Vector(0);
  inst.C = SparseMatrix(0, 2);
  inst.D = SparseMatrix(0, 2);
  inst.k = k;
  inst.name = "worked_n2";
  return inst;
}

/// delta = (1, 1), R = I with rank-one and low-rank factors.
inline Decomposition worked_decomposition(const MiqpInstance& inst) {
  return low_rank_factor(rank_one_factors(with_delta(inst.Q, Vector::Ones(2))), inst.g);
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double x : row) out(r, c++) = x;
    ++r;
  }
  return out;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace miqp::testing
