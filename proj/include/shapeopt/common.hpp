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

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapeopt {

using Vec2 = Eigen::Vector2d;
using Field = std::vector<Eigen::Vector2d>;  // one d-vector per mesh node

/// Error categories, mirrored 1:1 by the C API status codes.
enum class errc {
  invalid_mesh,
  dimension_mismatch,
  domain,
  unsupported,
  non_convergence,
  singular_matrix,
  infeasible_qp,
  cycling,
  divergence,
  assembly,
  size_guard,
  config,
  io,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

/// Fixed-point solver failure; carries the last residual and iteration count.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double residual, int iterations)
      : Error(errc::non_convergence, msg), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Config validation failure; the message always contains the dotted field path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field_path, const std::string& msg)
      : Error(errc::config, field_path + ": " + msg), field_path_(field_path) {}
  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

inline Eigen::VectorXd flatten(const Field& f) {
  Eigen::VectorXd x(2 * static_cast<Eigen::Index>(f.size()));
  for (size_t i = 0; i < f.size(); ++i) {
    x[2 * i] = f[i][0];
    x[2 * i + 1] = f[i][1];
  }
  return x;
}

inline Field unflatten(const Eigen::VectorXd& x) {
  if (x.size() % 2 != 0)
    throw Error(errc::dimension_mismatch, "field vector length must be even");
  Field f(static_cast<size_t>(x.size() / 2));
  for (size_t i = 0; i < f.size(); ++i) f[i] = Vec2(x[2 * i], x[2 * i + 1]);
  return f;
}

inline double dot(const Field& a, const Field& b) {
  if (a.size() != b.size())
    throw Error(errc::dimension_mismatch, "field sizes differ in dot product");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

inline double inf_norm(const Field& a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max({m, std::abs(v[0]), std::abs(v[1])});
  return m;
}

}  // namespace shapeopt
