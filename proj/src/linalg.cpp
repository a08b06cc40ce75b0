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
#include "shapeopt/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

namespace shapeopt {

void SymSparse::add(int i, int j, double a) {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_)
    throw Error(errc::dimension_mismatch, "SymSparse index out of range");
  if (i < j) std::swap(i, j);
  entries_.push_back({i, j, a});
}

void SymSparse::compress() {
  std::map<std::pair<int, int>, double> acc;
  for (const auto& t : entries_) acc[{t.row, t.col}] += t.value;
  entries_.clear();
  entries_.reserve(acc.size());
  for (const auto& [ij, v] : acc) entries_.push_back({ij.first, ij.second, v});
}

Eigen::VectorXd SymSparse::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != dim_)
    throw Error(errc::dimension_mismatch, "SymSparse matvec dimension mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim_);
  for (const auto& t : entries_) {
    y[t.row] += t.value * x[t.col];
    if (t.row != t.col) y[t.col] += t.value * x[t.row];
  }
  return y;
}

Eigen::MatrixXd SymSparse::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim_, dim_);
  for (const auto& t : entries_) {
    a(t.row, t.col) += t.value;
    if (t.row != t.col) a(t.col, t.row) += t.value;
  }
  return a;
}

double SymSparse::sum_entries() const {
  double s = 0.0;
  for (const auto& t : entries_) s += (t.row == t.col) ? t.value : 2.0 * t.value;
  return s;
}

Eigen::VectorXd SymSparse::row_sums() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  for (const auto& t : entries_) {
    s[t.row] += t.value;
    if (t.row != t.col) s[t.col] += t.value;
  }
  return s;
}

void dump_matrix(std::ostream& os, const SymSparse& a, const std::string& name) {
  os << "# symmetric " << name << "\n";
  os << a.dim() << " " << a.dim() << " " << a.triplets().size() << "\n";
  char buf[96];
  for (const auto& t : a.triplets()) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", t.row, t.col, t.value);
    os << buf;
  }
}

void dump_matrix(std::ostream& os, const Eigen::MatrixXd& a, const std::string& name) {
  os << "# dense " << name << "\n";
  os << a.rows() << " " << a.cols() << " " << a.rows() * a.cols() << "\n";
  char buf[96];
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n", long(i), long(j), a(i, j));
      os << buf;
    }
}

namespace {
// Bunch-Kaufman threshold, (1 + sqrt(17)) / 8.
constexpr double kAlpha = 0.6403882032022076;
}  // namespace

SymFactor::SymFactor(const Eigen::MatrixXd& a_in) {
  n_ = static_cast<int>(a_in.rows());
  if (a_in.cols() != n_) throw Error(errc::dimension_mismatch, "SymFactor needs a square matrix");
  Eigen::MatrixXd a = 0.5 * (a_in + a_in.transpose());  // enforce exact symmetry
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double tiny = 1e-14 * scale;

  perm_.resize(n_);
  for (int i = 0; i < n_; ++i) perm_[i] = i;
  pivot_type_.assign(n_, 0);

  int k = 0;
  while (k < n_) {
    const int rem = n_ - k;
    // Column of largest off-diagonal magnitude in the trailing block.
    double colmax = 0.0;
    int r = k;
    for (int i = k + 1; i < n_; ++i) {
      if (std::abs(a(i, k)) > colmax) {
        colmax = std::abs(a(i, k));
        r = i;
      }
    }
    const double akk = std::abs(a(k, k));

    bool use_1x1 = true;
    int swap_row = -1;
    if (rem == 1 || akk >= kAlpha * colmax) {
      use_1x1 = true;
    } else {
      // Largest off-diagonal in row r of the trailing block.
      double rowmax = 0.0;
      for (int j = k; j < n_; ++j)
        if (j != r) rowmax = std::max(rowmax, std::abs(a(r, j)));
      if (akk * rowmax >= kAlpha * colmax * colmax) {
        use_1x1 = true;
      } else if (std::abs(a(r, r)) >= kAlpha * rowmax) {
        use_1x1 = true;
        swap_row = r;
      } else {
        use_1x1 = false;
        swap_row = r;
      }
    }

    auto sym_swap = [&](int p, int q) {
      if (p == q) return;
      a.row(p).swap(a.row(q));
      a.col(p).swap(a.col(q));
      std::swap(perm_[p], perm_[q]);
    };

    if (use_1x1) {
      if (swap_row >= 0) sym_swap(k, swap_row);
      const double d = a(k, k);
      if (std::abs(d) <= tiny)
        throw Error(errc::singular_matrix,
                    "singular matrix in symmetric factorization at pivot " + std::to_string(k));
      pivot_type_[k] = 1;
      const Eigen::VectorXd colk = a.col(k).segment(k + 1, rem - 1).eval();
      for (int i = k + 1; i < n_; ++i) {
        const double lik = colk[i - k - 1] / d;
        for (int j = k + 1; j <= i; ++j) a(i, j) -= lik * colk[j - k - 1];
        a(i, k) = lik;
      }
      for (int i = k + 1; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) a(i, j) = a(j, i);
      ++k;
    } else {
      sym_swap(k + 1, swap_row);
      // 2x2 pivot block D = [[a_kk, a_k1k],[a_k1k, a_k1k1]].
      const double d11 = a(k, k), d21 = a(k + 1, k), d22 = a(k + 1, k + 1);
      const double det = d11 * d22 - d21 * d21;
      if (std::abs(det) <= tiny * tiny)
        throw Error(errc::singular_matrix,
                    "singular 2x2 pivot in symmetric factorization at pivot " + std::to_string(k));
      pivot_type_[k] = 2;
      pivot_type_[k + 1] = 0;
      const Eigen::VectorXd col1 = a.col(k).segment(k + 2, rem - 2).eval();
      const Eigen::VectorXd col2 = a.col(k + 1).segment(k + 2, rem - 2).eval();
      for (int i = k + 2; i < n_; ++i) {
        const double b1 = col1[i - k - 2], b2 = col2[i - k - 2];
        const double l1 = (d22 * b1 - d21 * b2) / det;
        const double l2 = (-d21 * b1 + d11 * b2) / det;
        for (int j = k + 2; j <= i; ++j)
          a(i, j) -= l1 * col1[j - k - 2] + l2 * col2[j - k - 2];
        a(i, k) = l1;
        a(i, k + 1) = l2;
      }
      for (int i = k + 2; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) a(i, j) = a(j, i);
      k += 2;
    }
  }
  lu_ = std::move(a);
}

Eigen::VectorXd SymFactor::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n_) throw Error(errc::dimension_mismatch, "SymFactor::solve size mismatch");
  Eigen::VectorXd x(n_);
  for (int i = 0; i < n_; ++i) x[i] = b[perm_[i]];

  // Forward substitution with unit lower triangle L.
  for (int k = 0; k < n_;) {
    const int w = pivot_type_[k];
    for (int i = k + w; i < n_; ++i)
      for (int j = k; j < k + w; ++j) x[i] -= lu_(i, j) * x[j];
    k += w;
  }
  // Block-diagonal solve.
  for (int k = 0; k < n_;) {
    if (pivot_type_[k] == 1) {
      x[k] /= lu_(k, k);
      k += 1;
    } else {
      const double d11 = lu_(k, k), d21 = lu_(k + 1, k), d22 = lu_(k + 1, k + 1);
      const double det = d11 * d22 - d21 * d21;
      const double b1 = x[k], b2 = x[k + 1];
      x[k] = (d22 * b1 - d21 * b2) / det;
      x[k + 1] = (-d21 * b1 + d11 * b2) / det;
      k += 2;
    }
  }
  // Backward substitution with L^T.
  for (int k = n_ - 1; k >= 0;) {
    int kb = k;
    if (pivot_type_[k] == 0) kb = k - 1;  // second slot of a 2x2 block
    const int w = (pivot_type_[kb] == 2) ? 2 : 1;
    for (int j = kb; j < kb + w; ++j)
      for (int i = kb + w; i < n_; ++i) x[j] -= lu_(i, j) * x[i];
    k = kb - 1;
  }

  Eigen::VectorXd out(n_);
  for (int i = 0; i < n_; ++i) out[perm_[i]] = x[i];
  return out;
}

Eigen::VectorXd sym_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const SymFactor factor(a);
  Eigen::VectorXd x = factor.solve(b);
  // one step of iterative refinement tightens the residual on
  // ill-conditioned instances at the cost of a reused factorization
  const Eigen::VectorXd r = b - a * x;
  x += factor.solve(r);
  return x;
}

Eigen::VectorXd sym_solve(const SymSparse& a, const Eigen::VectorXd& b) {
  return sym_solve(a.to_dense(), b);
}

bool is_spd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) return false;
  if (((a - a.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    return false;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (a + a.transpose()));
  return llt.info() == Eigen::Success;
}

PowerIterationResult power_iteration(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                                     int dim, double tol, int max_iter) {
  if (dim <= 0) throw Error(errc::dimension_mismatch, "power_iteration needs dim > 0");
  // Deterministic pseudo-random start vector with a component in every mode.
  Eigen::VectorXd v(dim);
  uint64_t s = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < dim; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    v[i] = 0.5 + static_cast<double>(s % 1000003) / 1000003.0;
  }
  v.normalize();

  PowerIterationResult res;
  double lambda_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd w = op(v);
    const double nw = w.norm();
    if (nw == 0.0) {
      res.value = 0.0;
      res.converged = true;
      res.iterations = it;
      return res;
    }
    const double lambda = v.dot(w);  // Rayleigh quotient (v normalized)
    v = w / nw;
    res.value = lambda;
    res.iterations = it;
    if (it > 1 && std::abs(lambda - lambda_prev) <= tol * std::max(1.0, std::abs(lambda))) {
      res.converged = true;
      // sign fix-up: for symmetric operators |lambda| -> dominant magnitude
      return res;
    }
    lambda_prev = lambda;
  }
  res.converged = false;
  return res;
}

PowerIterationResult power_iteration(const Eigen::MatrixXd& a, double tol, int max_iter) {
  return power_iteration([&a](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); },
                         static_cast<int>(a.rows()), tol, max_iter);
}

GeneralizedEigenResult generalized_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw Error(errc::dimension_mismatch, "generalized_eigen needs square matrices of equal size");
  if (a.rows() > 256)
    throw Error(errc::size_guard, "generalized_eigen is a small-scale oracle (dim <= 256)");
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (b + b.transpose()));
  if (llt.info() != Eigen::Success)
    throw Error(errc::domain, "generalized_eigen requires SPD B");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()),
                                                               0.5 * (b + b.transpose()));
  if (es.info() != Eigen::Success)
    throw Error(errc::internal, "generalized eigensolve failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace shapeopt
