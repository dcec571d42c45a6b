#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

enum class Errc {
    domain = 1,
    no_equilibrium,
    degenerate,
    absorbed,
    integration,
    precondition,
    not_found,
    model_violation,
    non_closure,
    invalid_argument,
};

class Error : public std::runtime_error {
public:
    Error(Errc c, const std::string& what) : std::runtime_error(what), code_(c) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// Sum of absolute coordinates.
inline double sum_norm(const Vec3& v) { return v.cwiseAbs().sum(); }
inline double sum_norm(const Vec6& v) { return v.cwiseAbs().sum(); }

inline constexpr double kSigma = 0.6180339887498949;  // (sqrt(5)-1)/2

}  // namespace sf
