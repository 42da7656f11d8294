#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sdfem {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Barycentric coordinates (lambda_0, lambda_1, lambda_2) of a point in a triangle.
using Bary = std::array<double, 3>;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec2(const Point&)>;
using TensorField = std::function<Mat2(const Point&)>;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MeshError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  using Error::Error;
};

inline constexpr double pi = 3.14159265358979323846;

enum class Subdomain { stokes, darcy };

inline const char* to_string(Subdomain s) {
  return s == Subdomain::stokes ? "stokes" : "darcy";
}

}  // namespace sdfem
