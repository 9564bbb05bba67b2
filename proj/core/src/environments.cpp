/*
 Copyright 2026 The d2c Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <cmath>
#include <initializer_list>
#include <utility>
#include <numbers>
#include <set>
#include <sstream>

#include "d2c/environment.hpp"

namespace d2c {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Reads overrides with defaults and rejects keys nobody asked for.
class ParamReader {
 public:
  ParamReader(std::string family, const EnvParams& p) : family_(std::move(family)), p_(p) {}

  double scalar(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = p_.scalars.find(key);
    return it == p_.scalars.end() ? fallback : it->second;
  }
  bool has(const std::string& key) const {
    return p_.scalars.count(key) != 0 || p_.arrays.count(key) != 0;
  }
  const std::vector<double>* array(const std::string& key) {
    used_.insert(key);
    auto it = p_.arrays.find(key);
    return it == p_.arrays.end() ? nullptr : &it->second;
  }
  int integer(const std::string& key, int fallback) {
    const double v = scalar(key, fallback);
    if (v != std::floor(v) || v < 1.0)
      throw InvalidArgument(family_ + ": parameter '" + key + "' must be a positive integer");
    return static_cast<int>(v);
  }
  void finish() const {
    for (const auto& [k, _] : p_.scalars)
      if (!used_.count(k)) throw InvalidArgument(family_ + ": unknown parameter '" + k + "'");
    for (const auto& [k, _] : p_.arrays)
      if (!used_.count(k)) throw InvalidArgument(family_ + ": unknown parameter '" + k + "'");
  }

 private:
  std::string family_;
  const EnvParams& p_;
  std::set<std::string> used_;
};

void require_positive(const std::string& family, const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InvalidArgument(family + ": parameter '" + key + "' must be positive and finite");
}

Environment make_pendulum(const EnvParams& params) {
  ParamReader r("pendulum", params);
  const double m = r.scalar("m", 1.0);
  const double l = r.scalar("l", 1.0);
  const double g = r.scalar("g", 9.81);
  const double b = r.scalar("b", 0.01);
  const double dt = r.scalar("dt", 0.1);
  const double u_max = r.scalar("u_max", 10.0);
  r.finish();
  for (auto [k, v] : std::initializer_list<std::pair<const char*, double>>{
           {"m", m}, {"l", l}, {"dt", dt}, {"u_max", u_max}})
    require_positive("pendulum", k, v);

  const double inertia = m * l * l;
  auto step = [=](const Vector& x, const Vector& u) {
    Vector next(2);
    const double theta_ddot = (u[0] - b * x[1] - m * g * l * std::sin(x[0])) / inertia;
    next[0] = x[0] + dt * x[1];
    next[1] = x[1] + dt * theta_ddot;
    return next;
  };
  auto jac = [=](const Vector& x, const Vector&) {
    Jacobians J{Matrix(2, 2), Matrix(2, 1)};
    J.A << 1.0, dt, -dt * m * g * l * std::cos(x[0]) / inertia, 1.0 - dt * b / inertia;
    J.B << 0.0, dt / inertia;
    return J;
  };
  Environment env("pendulum", 2, 1, dt, Vector::Constant(1, u_max), step, jac);
  env.default_x0 = Vector::Zero(2);
  env.default_goal = (Vector(2) << kPi, 0.0).finished();
  env.success_box = (Vector(2) << 40.0 * kDeg, 40.0 * kDeg).finished();
  env.params = {{"m", m}, {"l", l}, {"g", g}, {"b", b}, {"dt", dt}, {"u_max", u_max}};
  return env;
}

// Point-mass pole on a cart, theta measured from hanging down.
Environment make_cartpole(const EnvParams& params) {
  ParamReader r("cartpole", params);
  const double mc = r.scalar("m_cart", 1.0);
  const double mp = r.scalar("m_pole", 0.1);
  const double l = r.scalar("l", 0.5);
  const double g = r.scalar("g", 9.81);
  const double dt = r.scalar("dt", 0.05);
  const double u_max = r.scalar("u_max", 20.0);
  r.finish();
  for (auto [k, v] : std::initializer_list<std::pair<const char*, double>>{
           {"m_cart", mc}, {"m_pole", mp}, {"l", l}, {"dt", dt}, {"u_max", u_max}})
    require_positive("cartpole", k, v);

  auto step = [=](const Vector& x, const Vector& u) {
    const double s = std::sin(x[1]);
    const double c = std::cos(x[1]);
    const double w = x[3];
    const double F = u[0];
    const double D = mc + mp * s * s;
    const double x_ddot = (F + mp * s * (l * w * w + g * c)) / D;
    const double th_ddot = (-F * c - mp * l * w * w * c * s - (mc + mp) * g * s) / (l * D);
    Vector next(4);
    next[0] = x[0] + dt * x[2];
    next[1] = x[1] + dt * x[3];
    next[2] = x[2] + dt * x_ddot;
    next[3] = x[3] + dt * th_ddot;
    return next;
  };
  auto jac = [=](const Vector& x, const Vector& u) {
    const double s = std::sin(x[1]);
    const double c = std::cos(x[1]);
    const double w = x[3];
    const double F = u[0];
    const double D = mc + mp * s * s;
    const double D_th = 2.0 * mp * s * c;

    const double N1 = F + mp * s * (l * w * w + g * c);
    const double N1_th = mp * (c * l * w * w + g * (c * c - s * s));
    const double N1_w = 2.0 * mp * s * l * w;

    const double N2 = -F * c - mp * l * w * w * c * s - (mc + mp) * g * s;
    const double N2_th = F * s - mp * l * w * w * (c * c - s * s) - (mc + mp) * g * c;
    const double N2_w = -2.0 * mp * l * w * c * s;

    Jacobians J{Matrix::Identity(4, 4), Matrix::Zero(4, 1)};
    J.A(0, 2) = dt;
    J.A(1, 3) = dt;
    J.A(2, 1) = dt * (N1_th * D - N1 * D_th) / (D * D);
    J.A(2, 3) = dt * N1_w / D;
    J.A(3, 1) = dt * (N2_th * D - N2 * D_th) / (l * D * D);
    J.A(3, 3) += dt * N2_w / (l * D);
    J.B(2, 0) = dt / D;
    J.B(3, 0) = -dt * c / (l * D);
    return J;
  };
  Environment env("cartpole", 4, 1, dt, Vector::Constant(1, u_max), step, jac);
  env.default_x0 = Vector::Zero(4);
  env.default_goal = (Vector(4) << 0.0, kPi, 0.0, 0.0).finished();
  env.success_box = (Vector(4) << 0.8, 40.0 * kDeg, 1.5, 40.0 * kDeg).finished();
  env.params = {{"m_cart", mc}, {"m_pole", mp}, {"l", l},
                {"g", g},       {"dt", dt},     {"u_max", u_max}};
  return env;
}

Matrix reshape_row_major(const std::vector<double>& data, int rows, int cols,
                         const std::string& what) {
  if (static_cast<int>(data.size()) != rows * cols) {
    std::ostringstream os;
    os << "linear: '" << what << "' needs " << rows * cols << " entries, got " << data.size();
    throw InvalidArgument(os.str());
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
  return m;
}

Environment make_linear(const EnvParams& params) {
  ParamReader r("linear", params);
  const double dt = r.scalar("dt", 0.1);
  const double u_max = r.scalar("u_max", 1.0);
  require_positive("linear", "dt", dt);
  require_positive("linear", "u_max", u_max);

  const auto* a_data = r.array("A");
  const auto* b_data = r.array("B");
  int n_x = 2;
  if (a_data) {
    n_x = static_cast<int>(std::lround(std::sqrt(static_cast<double>(a_data->size()))));
  }
  n_x = r.integer("n_x", n_x);
  int n_u = (b_data && n_x > 0) ? static_cast<int>(b_data->size()) / n_x : 1;
  n_u = r.integer("n_u", n_u);

  Matrix A, B;
  if (a_data) {
    A = reshape_row_major(*a_data, n_x, n_x, "A");
  } else if (n_x == 2) {
    A = (Matrix(2, 2) << 1.0, dt, 0.0, 1.0).finished();  // double integrator
  } else {
    A = Matrix::Identity(n_x, n_x);
  }
  if (b_data) {
    B = reshape_row_major(*b_data, n_x, n_u, "B");
  } else if (n_x == 2 && n_u == 1) {
    B = (Matrix(2, 1) << 0.5 * dt * dt, dt).finished();
  } else {
    B = Matrix::Identity(n_x, n_u);
  }
  Vector x0 = Vector::Zero(n_x);
  if (n_x == 2 && !r.has("x0")) x0[0] = 1.0;
  if (const auto* v = r.array("x0")) x0 = reshape_row_major(*v, n_x, 1, "x0");
  Vector goal = Vector::Zero(n_x);
  if (const auto* v = r.array("goal")) goal = reshape_row_major(*v, n_x, 1, "goal");
  r.finish();

  Environment env = make_linear_environment(A, B, dt, u_max);
  env.default_x0 = x0;
  env.default_goal = goal;
  env.params = {{"n_x", n_x}, {"n_u", n_u}, {"dt", dt}, {"u_max", u_max}};
  return env;
}

Environment make_allen_cahn(const EnvParams& params) {
  ParamReader r("allen_cahn", params);
  int grid = r.integer("grid", 20);
  if (r.has("grid_rows") || r.has("grid_cols")) {
    const int rows = r.integer("grid_rows", grid);
    const int cols = r.integer("grid_cols", grid);
    if (rows != cols) {
      std::ostringstream os;
      os << "allen_cahn: non-square grid " << rows << "x" << cols << " is not supported";
      throw InvalidArgument(os.str());
    }
    grid = rows;
  }
  const int patch = r.integer("patch", 2);
  const int band = r.integer("band", 2);
  const double M = r.scalar("M", 1.0);
  const double gamma = r.scalar("gamma", 1.0);
  const double dx = r.scalar("dx", 1.0);
  const double T_base = r.scalar("T", 0.0);
  const double h_base = r.scalar("h", 0.0);
  const double u_max = r.scalar("u_max", 10.0);
  require_positive("allen_cahn", "M", M);
  require_positive("allen_cahn", "dx", dx);
  require_positive("allen_cahn", "u_max", u_max);
  if (gamma < 0.0) throw InvalidArgument("allen_cahn: gamma must be non-negative");
  const double bound = allen_cahn_stable_dt(M, gamma, dx, T_base);
  const double dt = r.scalar("dt", 0.5 * bound);
  r.finish();
  require_positive("allen_cahn", "dt", dt);
  if (dt > bound) {
    std::ostringstream os;
    os.precision(17);
    os << "allen_cahn: dt=" << dt << " violates the explicit stability bound dt <= " << bound;
    throw InvalidArgument(os.str());
  }
  if (grid % patch != 0) {
    std::ostringstream os;
    os << "allen_cahn: patch size " << patch << " does not divide grid " << grid;
    throw InvalidArgument(os.str());
  }

  const int n_x = grid * grid;
  const int per_side = grid / patch;
  const int n_patch = per_side * per_side;
  const int n_u = 2 * n_patch;
  std::vector<int> patch_of(static_cast<std::size_t>(n_x));
  for (int row = 0; row < grid; ++row)
    for (int col = 0; col < grid; ++col)
      patch_of[static_cast<std::size_t>(row * grid + col)] =
          (row / patch) * per_side + col / patch;

  const double inv_dx2 = 1.0 / (dx * dx);
  auto laplacian_at = [grid, inv_dx2](const Vector& phi, int row, int col) {
    const int up = ((row + grid - 1) % grid) * grid + col;
    const int down = ((row + 1) % grid) * grid + col;
    const int left = row * grid + (col + grid - 1) % grid;
    const int right = row * grid + (col + 1) % grid;
    const int c = row * grid + col;
    return (phi[up] + phi[down] + phi[left] + phi[right] - 4.0 * phi[c]) * inv_dx2;
  };

  auto step = [=](const Vector& phi, const Vector& u) {
    Vector next(n_x);
    for (int row = 0; row < grid; ++row) {
      for (int col = 0; col < grid; ++col) {
        const int i = row * grid + col;
        const int p = patch_of[static_cast<std::size_t>(i)];
        const double T = T_base + u[p];
        const double h = h_base + u[n_patch + p];
        const double v = phi[i];
        const double dF = 4.0 * v * v * v + 2.0 * T * v + h;
        next[i] = v - dt * M * (dF - gamma * laplacian_at(phi, row, col));
      }
    }
    return next;
  };
  auto jac = [=](const Vector& phi, const Vector& u) {
    Jacobians J{Matrix::Zero(n_x, n_x), Matrix::Zero(n_x, n_u)};
    const double k = dt * M * gamma * inv_dx2;
    for (int row = 0; row < grid; ++row) {
      for (int col = 0; col < grid; ++col) {
        const int i = row * grid + col;
        const int p = patch_of[static_cast<std::size_t>(i)];
        const double T = T_base + u[p];
        const double v = phi[i];
        J.A(i, i) += 1.0 - dt * M * (12.0 * v * v + 2.0 * T) - 4.0 * k;
        J.A(i, ((row + grid - 1) % grid) * grid + col) += k;
        J.A(i, ((row + 1) % grid) * grid + col) += k;
        J.A(i, row * grid + (col + grid - 1) % grid) += k;
        J.A(i, row * grid + (col + 1) % grid) += k;
        J.B(i, p) = -dt * M * 2.0 * v;
        J.B(i, n_patch + p) = -dt * M;
      }
    }
    return J;
  };

  Environment env("allen_cahn", n_x, n_u, dt, Vector::Constant(n_u, u_max), step, jac);
  env.default_x0 = Vector::Constant(n_x, -1.0);
  env.default_goal = allen_cahn_banded_target(grid, band);
  env.params = {{"grid", grid}, {"patch", patch}, {"band", band}, {"M", M},
                {"gamma", gamma}, {"dx", dx},     {"T", T_base},  {"h", h_base},
                {"dt", dt},      {"u_max", u_max}};
  return env;
}

}  // namespace

double allen_cahn_stable_dt(double mobility, double gamma, double dx, double T_base) {
  // Explicit Euler on phi' = -M (F'(phi) - gamma lap phi) is stable when
  // dt * M * (8 gamma / dx^2 + max F'') <= 2, with F'' = 12 phi^2 + 2 T and
  // |phi| <= 1. With no reaction term this is the classic dx^2 / (4 M gamma).
  const double stiffness = 8.0 * gamma / (dx * dx) + 12.0 + 2.0 * std::abs(T_base);
  return 2.0 / (mobility * stiffness);
}

Vector allen_cahn_banded_target(int grid, int band) {
  Vector target(grid * grid);
  for (int row = 0; row < grid; ++row)
    for (int col = 0; col < grid; ++col)
      target[row * grid + col] = ((col / band) % 2 == 0) ? 0.0 : 1.0;
  return target;
}

Environment make_linear_environment(const Matrix& A, const Matrix& B, double dt, double u_max) {
  if (A.rows() != A.cols() || B.rows() != A.rows())
    throw InvalidArgument("linear: A must be square and B must have matching rows");
  const int n_x = static_cast<int>(A.rows());
  const int n_u = static_cast<int>(B.cols());
  auto step = [A, B](const Vector& x, const Vector& u) -> Vector { return A * x + B * u; };
  auto jac = [A, B](const Vector&, const Vector&) { return Jacobians{A, B}; };
  Environment env("linear", n_x, n_u, dt, Vector::Constant(n_u, u_max), step, jac);
  env.params = {{"n_x", n_x}, {"n_u", n_u}, {"dt", dt}, {"u_max", u_max}};
  return env;
}

Environment make_environment(const std::string& name, const EnvParams& params) {
  if (name == "pendulum") return make_pendulum(params);
  if (name == "cartpole") return make_cartpole(params);
  if (name == "linear") return make_linear(params);
  if (name == "allen_cahn") return make_allen_cahn(params);
  throw InvalidArgument("unknown environment '" + name +
                        "' (expected pendulum, cartpole, linear or allen_cahn)");
}

}  // namespace d2c
