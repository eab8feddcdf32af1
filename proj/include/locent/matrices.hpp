// matrices.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// \file
// Dense matrix view of a PFSA: the transition matrix M, per-symbol
// matrices M(y), the emission matrix E, and the Kleene closure
// K = (I - M)^-1 obtained by an LU solve.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locent/error.hpp"
#include "locent/pfsa.hpp"

namespace locent {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;

// Largest tolerated entry of (I - M) K - I.
inline constexpr double kClosureResidualLimit = 1e-6;

struct SymbolArc {
  std::size_t source;
  std::size_t target;
  double weight;
};

class TransitionMatrices {
 public:
  std::size_t num_states() const { return static_cast<std::size_t>(transition.rows()); }
  std::size_t alphabet_size() const { return per_symbol.size(); }

  // Row-vector update v <- v M(y) using the sparse arc list of y.
  RowVector step(const RowVector& v, Symbol y) const {
    RowVector out = RowVector::Zero(v.size());
    for (const SymbolArc& a : arcs_by_symbol[y]) out[a.target] += v[a.source] * a.weight;
    return out;
  }

  void check_symbols(std::span<const Symbol> y) const {
    for (Symbol s : y) {
      if (s >= alphabet_size()) {
        throw Error(errc::symbol_out_of_range,
                    "symbol " + std::to_string(s) + " not below " + std::to_string(alphabet_size()));
      }
    }
  }

  Matrix transition;               // M
  std::vector<Matrix> per_symbol;  // M(y), one per symbol
  Matrix emission;                 // E, states x symbols
  Matrix star;                     // K = (I - M)^-1
  RowVector initial;               // lambda
  Vector final;                    // rho
  Vector star_final;               // K rho; all ones for a normalized automaton
  RowVector prefix_row;            // lambda^T K, the expected-visit vector
  bool deterministic = true;
  std::vector<std::vector<SymbolArc>> arcs_by_symbol;
};

inline TransitionMatrices build_matrices(const Pfsa& pfsa) {
  const auto n = static_cast<Eigen::Index>(pfsa.num_states());
  const std::size_t k = pfsa.alphabet_size();

  TransitionMatrices m;
  m.transition = Matrix::Zero(n, n);
  m.per_symbol.assign(k, Matrix::Zero(n, n));
  m.emission = Matrix::Zero(n, static_cast<Eigen::Index>(k));
  m.arcs_by_symbol.assign(k, {});
  m.deterministic = pfsa.deterministic();
  for (const Arc& a : pfsa.arcs()) {
    const auto s = static_cast<Eigen::Index>(a.source);
    const auto t = static_cast<Eigen::Index>(a.target);
    m.per_symbol[a.symbol](s, t) += a.weight;
    m.transition(s, t) += a.weight;
    m.emission(s, static_cast<Eigen::Index>(a.symbol)) += a.weight;
    m.arcs_by_symbol[a.symbol].push_back({a.source, a.target, a.weight});
  }
  m.initial = Eigen::Map<const RowVector>(pfsa.initial().data(), n);
  m.final = Eigen::Map<const Vector>(pfsa.final_weights().data(), n);

  const Matrix system = Matrix::Identity(n, n) - m.transition;
  const Eigen::PartialPivLU<Matrix> lu(system);
  m.star = lu.solve(Matrix::Identity(n, n));
  const double residual = (system * m.star - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(residual <= kClosureResidualLimit) || !m.star.allFinite()) {
    throw Error(errc::singular_system,
                "I - M is not invertible (residual " + std::to_string(residual) +
                    "); expected string length is infinite");
  }
  m.star_final = m.star * m.final;
  m.prefix_row = m.initial * m.star;
  return m;
}

}  // namespace locent
