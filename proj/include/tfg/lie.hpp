#pragma once

#include <Eigen/Dense>

#include "tfg/errors.hpp"

namespace tfg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Which frame a stacked vector lives in. Lowercase x in the paper notation
/// is fixed-frame, small-caps X is body-frame.
enum class Frame { Fixed, Body };

namespace lie {

/// Below this angle the closed forms of nu/log/right_jacobian switch to
/// 4th-order Taylor expansions.
inline constexpr double kSmallAngle = 1e-7;

/// A rotation of SO(2) or SO(3), stored as its matrix.
class Rotation {
public:
    /// Validates orthonormality (R^T R = I, det = +1) up to 1e-9.
    explicit Rotation(const Mat& m);

    static Rotation identity(int d);
    /// 2x2 rotation of the given angle, rho(theta) in the paper.
    static Rotation planar(double angle);

    const Mat& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    /// Dimension of the Lie algebra: 1 for SO(2), 3 for SO(3).
    int algebra_dim() const { return dim() == 2 ? 1 : 3; }

    Rotation operator*(const Rotation& rhs) const;
    Rotation inverse() const;

private:
    struct Unchecked {};
    Rotation(Mat m, Unchecked) : m_(std::move(m)) {}
    Mat m_;
};

/// N stacked d-vectors with a frame tag.
struct MultiVector {
    Vec data;
    int dim = 3;
    Frame frame = Frame::Fixed;

    MultiVector() = default;
    MultiVector(Vec v, int d, Frame f);
    int count() const { return dim > 0 ? static_cast<int>(data.size()) / dim : 0; }
};

/// Skew-symmetric matrix (beta)_x with skew(beta) * gamma = beta x gamma.
Eigen::Matrix3d skew(const Eigen::Vector3d& beta);

/// exp_SO(d): xi of size 1 gives a planar rotation, size 3 the Rodrigues formula.
Rotation exp_rot(const Vec& xi);

/// Principal logarithm, ||xi|| <= pi. Throws AngleNearPi within 1e-6 of pi (d=3).
Vec log_rot(const Rotation& r);

/// Adjoint on the Lie algebra: R exp(xi) R^-1 = exp(Ad_R xi).
/// Equals R itself for SO(3) and the 1x1 identity for SO(2).
Mat adjoint(const Rotation& r);

/// The nu_d factor of the TFG exponential. For d=3 this is the left Jacobian
/// of SO(3); for d=2 the formula uses the signed angle so that
/// nu_2(-xi) = rho(-xi) nu_2(xi).
Mat nu(const Vec& xi, int d);

/// Right Jacobian of SO(3): exp(a+b) ~ exp(a) exp(right_jacobian(a) b).
Eigen::Matrix3d right_jacobian(const Eigen::Vector3d& mu);

/// Term-by-term action: rotates each d-block of w.
Vec act(const Rotation& r, const Vec& w);
MultiVector act(const Rotation& r, const MultiVector& w);

/// Matrix of the term-by-term action on N stacked vectors: diag(R, ..., R).
Mat rep_matrix(const Rotation& r, int n);

/// First-order generator matrix: act(exp_rot(xi), w) = w - dg_operator(w) xi + O(xi^2).
/// For a single 3-vector this is (w)_x; for d=2 each block contributes -J w_i.
Mat dg_operator(const Vec& w, int d);

/// Nearest rotation in Frobenius norm (polar projection, det fixed to +1).
Rotation project_rotation(const Mat& m);

/// Rotation angle in [0, pi]; never throws (unlike log_rot near pi).
double rotation_angle(const Rotation& r);

}  // namespace lie
}  // namespace tfg
