/*
 * Copyright 2026 The shapeopt authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <functional>
#include <ostream>

#include "shapeopt/common.hpp"

namespace shapeopt {

/// Symmetric sparse matrix; only the lower triangle (row >= col) is stored.
class SymSparse {
 public:
  SymSparse() = default;
  explicit SymSparse(int dim) : dim_(dim) {}

  int dim() const { return dim_; }

  /// Accumulates a into entry (i, j) and, by symmetry, (j, i).
  void add(int i, int j, double a);

  /// Merges duplicate triplets; call once after assembly.
  void compress();

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

  double sum_entries() const;       // over the full symmetric matrix
  Eigen::VectorXd row_sums() const;

  struct Triplet {
    int row, col;
    double value;
  };
  const std::vector<Triplet>& triplets() const { return entries_; }

 private:
  int dim_ = 0;
  std::vector<Triplet> entries_;  // lower triangle only
};

/// Writes a header line "n n nnz" followed by one "i j value" triplet per row.
void dump_matrix(std::ostream& os, const SymSparse& a, const std::string& name);
void dump_matrix(std::ostream& os, const Eigen::MatrixXd& a, const std::string& name);

/// Factorization of a dense symmetric matrix: LDL^T with Bunch-Kaufman
/// pivoting (1x1 and 2x2 pivot blocks), valid for SPD and saddle systems.
class SymFactor {
 public:
  explicit SymFactor(const Eigen::MatrixXd& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  Eigen::MatrixXd lu_;           // packed L and D
  std::vector<int> perm_;
  std::vector<int> pivot_type_;  // 1 or 2 (second slot of a 2x2 block = 0)
  int n_ = 0;
};

/// Solves a x = b for symmetric a. Throws errc::singular_matrix naming the
/// pivot index when the matrix is singular to working precision.
Eigen::VectorXd sym_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);
Eigen::VectorXd sym_solve(const SymSparse& a, const Eigen::VectorXd& b);

/// True iff a has a successful Cholesky factorization (SPD test).
bool is_spd(const Eigen::MatrixXd& a);

struct PowerIterationResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Dominant eigenvalue estimate of a symmetric operator given as a matvec.
PowerIterationResult power_iteration(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                                     int dim, double tol, int max_iter);
PowerIterationResult power_iteration(const Eigen::MatrixXd& a, double tol, int max_iter);

struct GeneralizedEigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // B-orthonormal columns
};

/// Dense generalized symmetric eigensolve A v = lambda B v with B SPD.
/// Test oracle only; dimension is guarded at 256.
GeneralizedEigenResult generalized_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace shapeopt
