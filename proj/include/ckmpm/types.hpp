#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ckmpm {

using Real = double;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec2i = Eigen::Vector2i;
using VecX = Eigen::VectorXd;

/// 2D cross product, returns the scalar z-component of a x b.
inline Real cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Flatten index for d2xd2 tangent matrices: vec(F)[i + 2*j] = F(i,j) (column-major).
inline int flat_index(int i, int j) { return i + 2 * j; }

inline Vec4 flatten(const Mat2& m) {
  Vec4 v;
  v << m(0, 0), m(1, 0), m(0, 1), m(1, 1);
  return v;
}

inline Mat2 unflatten(const Vec4& v) {
  Mat2 m;
  m << v(0), v(2), v(1), v(3);
  return m;
}

// Error taxonomy. Each condition named by the spec of the engine's public
// operations maps to one exception type; the CLI maps them to distinct exit
// codes.
enum class ErrorCode : int {
  Generic = 1,
  Parse = 2,
  Validation = 3,
  OutOfDomain = 4,
  EmptySystem = 5,
  NonPositiveJacobian = 6,
  SingularD = 7,
  MaxIters = 8,
  LineSearchStall = 9,
  LinearSolveFailure = 10,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

struct OutOfDomainError : Error {
  explicit OutOfDomainError(const std::string& msg) : Error(ErrorCode::OutOfDomain, msg) {}
};

struct EmptySystemError : Error {
  explicit EmptySystemError(const std::string& msg) : Error(ErrorCode::EmptySystem, msg) {}
};

struct NonPositiveJacobianError : Error {
  explicit NonPositiveJacobianError(const std::string& msg) : Error(ErrorCode::NonPositiveJacobian, msg) {}
};

struct SingularDError : Error {
  explicit SingularDError(const std::string& msg) : Error(ErrorCode::SingularD, msg) {}
};

struct MaxItersError : Error {
  explicit MaxItersError(const std::string& msg) : Error(ErrorCode::MaxIters, msg) {}
};

struct LineSearchStallError : Error {
  explicit LineSearchStallError(const std::string& msg) : Error(ErrorCode::LineSearchStall, msg) {}
};

struct LinearSolveError : Error {
  explicit LinearSolveError(const std::string& msg) : Error(ErrorCode::LinearSolveFailure, msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(ErrorCode::Parse, msg) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(ErrorCode::Validation, msg) {}
};

}  // namespace ckmpm
