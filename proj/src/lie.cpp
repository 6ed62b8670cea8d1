#include "tfg/lie.hpp"

#include <cmath>

namespace tfg::lie {

namespace {

Eigen::Matrix2d planar_mat(double angle) {
    Eigen::Matrix2d m;
    m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return m;
}

const Eigen::Matrix2d kJ = planar_mat(M_PI / 2.0);  // rho(pi/2)

}  // namespace

Rotation::Rotation(const Mat& m) : m_(m) {
    const int d = static_cast<int>(m.rows());
    if ((d != 2 && d != 3) || m.cols() != d) {
        throw ShapeMismatch("Rotation must be a 2x2 or 3x3 matrix");
    }
    const double ortho = (m.transpose() * m - Mat::Identity(d, d)).norm();
    if (ortho > 1e-9 || m.determinant() < 0.0) {
        throw ShapeMismatch("matrix is not a rotation (orthonormality residual " +
                            std::to_string(ortho) + ")");
    }
}

Rotation Rotation::identity(int d) { return Rotation(Mat::Identity(d, d), Unchecked{}); }

Rotation Rotation::planar(double angle) { return Rotation(planar_mat(angle), Unchecked{}); }

Rotation Rotation::operator*(const Rotation& rhs) const {
    if (dim() != rhs.dim()) throw ShapeMismatch("rotation dimension mismatch in product");
    return Rotation(m_ * rhs.m_, Unchecked{});
}

Rotation Rotation::inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

MultiVector::MultiVector(Vec v, int d, Frame f) : data(std::move(v)), dim(d), frame(f) {
    if (d != 2 && d != 3) throw ShapeMismatch("MultiVector dimension must be 2 or 3");
    if (data.size() % d != 0) throw ShapeMismatch("MultiVector length not divisible by d");
}

Eigen::Matrix3d skew(const Eigen::Vector3d& beta) {
    Eigen::Matrix3d s;
    s << 0.0, -beta.z(), beta.y(), beta.z(), 0.0, -beta.x(), -beta.y(), beta.x(), 0.0;
    return s;
}

Rotation exp_rot(const Vec& xi) {
    if (xi.size() == 1) {
        return Rotation::planar(xi(0));
    }
    if (xi.size() != 3) throw ShapeMismatch("exp_rot expects algebra coordinates of size 1 or 3");
    const double theta2 = xi.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Eigen::Matrix3d s = skew(xi);
    double a, b;  // R = I + a (xi)_x + b (xi)_x^2
    if (theta < kSmallAngle) {
        a = 1.0 - theta2 / 6.0;
        b = 0.5 - theta2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta2;
    }
    return Rotation(Eigen::Matrix3d::Identity() + a * s + b * s * s);
}

Vec log_rot(const Rotation& r) {
    if (r.dim() == 2) {
        Vec xi(1);
        xi(0) = std::atan2(r.matrix()(1, 0), r.matrix()(0, 0));
        return xi;
    }
    const Eigen::Matrix3d m = r.matrix();
    const double cos_theta = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double theta = std::acos(cos_theta);
    if (M_PI - theta < 1e-6) {
        throw AngleNearPi("log_rot: rotation angle within 1e-6 of pi");
    }
    Eigen::Vector3d w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    double scale;  // theta / (2 sin(theta))
    if (theta < kSmallAngle) {
        scale = 0.5 + theta * theta / 12.0;
    } else {
        scale = theta / (2.0 * std::sin(theta));
    }
    return scale * w;
}

Mat adjoint(const Rotation& r) {
    if (r.dim() == 2) return Mat::Identity(1, 1);
    return r.matrix();
}

Mat nu(const Vec& xi, int d) {
    if (d == 2) {
        if (xi.size() != 1) throw ShapeMismatch("nu: SO(2) algebra coordinate must be scalar");
        const double t = xi(0);
        double a, b;  // nu_2 = a I + b J
        if (std::abs(t) < kSmallAngle) {
            a = 1.0 - t * t / 6.0;
            b = t / 2.0 - t * t * t / 24.0;
        } else {
            a = std::sin(t) / t;
            b = (1.0 - std::cos(t)) / t;
        }
        return a * Eigen::Matrix2d::Identity() + b * kJ;
    }
    if (d != 3 || xi.size() != 3) throw ShapeMismatch("nu: expected d=3 with 3 coordinates");
    const double theta2 = xi.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Eigen::Matrix3d s = skew(xi);
    double a, b;  // nu_3 = I + a (xi)_x + b (xi)_x^2
    if (theta < kSmallAngle) {
        a = 0.5 - theta2 / 24.0;
        b = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        a = (1.0 - std::cos(theta)) / theta2;
        b = (theta - std::sin(theta)) / (theta2 * theta);
    }
    return Eigen::Matrix3d::Identity() + a * s + b * s * s;
}

Eigen::Matrix3d right_jacobian(const Eigen::Vector3d& mu) {
    const double theta2 = mu.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Eigen::Matrix3d s = skew(mu);
    double a, b;  // J = I - a (mu)_x + b (mu)_x^2
    if (theta < kSmallAngle) {
        a = 0.5 - theta2 / 24.0;
        b = 1.0 / 6.0 - theta2 / 120.0;
    } else {
        a = (1.0 - std::cos(theta)) / theta2;
        b = (theta - std::sin(theta)) / (theta2 * theta);
    }
    return Eigen::Matrix3d::Identity() - a * s + b * s * s;
}

Vec act(const Rotation& r, const Vec& w) {
    const int d = r.dim();
    if (w.size() % d != 0) throw ShapeMismatch("act: vector length not divisible by d");
    Vec out(w.size());
    for (int i = 0; i < w.size() / d; ++i) {
        out.segment(i * d, d) = r.matrix() * w.segment(i * d, d);
    }
    return out;
}

MultiVector act(const Rotation& r, const MultiVector& w) {
    if (r.dim() != w.dim) throw ShapeMismatch("act: rotation and multivector dimension differ");
    return MultiVector(act(r, w.data), w.dim, w.frame);
}

Mat rep_matrix(const Rotation& r, int n) {
    const int d = r.dim();
    Mat rep = Mat::Zero(n * d, n * d);
    for (int i = 0; i < n; ++i) rep.block(i * d, i * d, d, d) = r.matrix();
    return rep;
}

Mat dg_operator(const Vec& w, int d) {
    if (w.size() % d != 0) throw ShapeMismatch("dg_operator: vector length not divisible by d");
    const int n = static_cast<int>(w.size()) / d;
    if (d == 2) {
        Mat dg(2 * n, 1);
        for (int i = 0; i < n; ++i) dg.block(2 * i, 0, 2, 1) = -kJ * w.segment(2 * i, 2);
        return dg;
    }
    Mat dg(3 * n, 3);
    for (int i = 0; i < n; ++i) dg.block(3 * i, 0, 3, 3) = skew(w.segment(3 * i, 3));
    return dg;
}

Rotation project_rotation(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat u = svd.matrixU();
    Mat v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(u.cols() - 1) *= -1.0;
    return Rotation(u * v.transpose());
}

double rotation_angle(const Rotation& r) {
    if (r.dim() == 2) return std::abs(std::atan2(r.matrix()(1, 0), r.matrix()(0, 0)));
    const Eigen::Matrix3d m = r.matrix();
    const Eigen::Vector3d w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    const double s = 0.5 * w.norm();  // sin(theta), accurate near 0
    const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::atan2(s, c);
}

}  // namespace tfg::lie
