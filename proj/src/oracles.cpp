#include "tfg/oracles.hpp"

#include <cmath>

namespace tfg::oracles {

Mat expm_series(const Mat& m, int terms) {
    int scale = 0;
    while (m.norm() / std::pow(2.0, scale) > 0.25) ++scale;
    const Mat a = m / std::pow(2.0, scale);
    Mat result = Mat::Identity(m.rows(), m.cols());
    Mat term = Mat::Identity(m.rows(), m.cols());
    for (int n = 1; n <= terms; ++n) {
        term = term * a / n;
        result += term;
    }
    for (int s = 0; s < scale; ++s) result = result * result;
    return result;
}

Mat logm_iss(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    Mat a = m;
    int roots = 0;
    while ((a - Mat::Identity(n, n)).norm() > 0.3) {
        // Denman-Beavers square root iteration.
        Mat y = a, z = Mat::Identity(n, n);
        for (int it = 0; it < 60; ++it) {
            const Mat y_next = 0.5 * (y + z.inverse());
            const Mat z_next = 0.5 * (z + y.inverse());
            if ((y_next - y).norm() < 1e-14 * std::max(1.0, y.norm())) {
                y = y_next;
                break;
            }
            y = y_next;
            z = z_next;
        }
        a = y;
        ++roots;
        if (roots > 64) throw std::runtime_error("logm_iss: square-root stage did not converge");
    }
    const Mat e = a - Mat::Identity(n, n);
    Mat result = Mat::Zero(n, n);
    Mat power = Mat::Identity(n, n);
    for (int k = 1; k <= 40; ++k) {
        power = power * e;
        result += (k % 2 == 1 ? 1.0 : -1.0) / k * power;
    }
    return std::pow(2.0, roots) * result;
}

namespace {

/// Generator of the term-by-term action on n stacked d-vectors.
Mat action_generator(const Vec& xi_rot, int d, int n) {
    Mat gen = Mat::Zero(n * d, n * d);
    if (d == 2) {
        Eigen::Matrix2d j;
        j << 0.0, -xi_rot(0), xi_rot(0), 0.0;
        for (int i = 0; i < n; ++i) gen.block(2 * i, 2 * i, 2, 2) = j;
    } else {
        const Eigen::Matrix3d s = lie::skew(xi_rot);
        for (int i = 0; i < n; ++i) gen.block(3 * i, 3 * i, 3, 3) = s;
    }
    return gen;
}

Vec vee_rotation_block(const Mat& block, int d) {
    if (d == 2) {
        Vec xi(1);
        xi(0) = 0.5 * (block(1, 0) - block(0, 1));
        return xi;
    }
    Vec xi(3);
    xi << 0.5 * (block(2, 1) - block(1, 2)), 0.5 * (block(0, 2) - block(2, 0)),
        0.5 * (block(1, 0) - block(0, 1));
    return xi;
}

}  // namespace

Mat algebra_embedding(const TfgTangent& xi, const TfgShape& shape) {
    const int q = shape.q(), r = shape.r();
    Mat m = Mat::Zero(q + r + 2, q + r + 2);
    m.block(0, 0, q, q) = action_generator(xi.rot, shape.d, shape.n_fixed);
    m.block(0, q, q, 1) = xi.fixed;
    m.block(q + 1, q + 1, r, r) = action_generator(xi.rot, shape.d, shape.n_body);
    m.block(q + 1, q + 1 + r, r, 1) = xi.body;
    return m;
}

TfgElement element_from_embedding(const Mat& m, const TfgShape& shape) {
    const int d = shape.d, q = shape.q(), r = shape.r();
    if (shape.n_fixed == 0 && shape.n_body == 0) {
        throw ShapeMismatch("element_from_embedding: rotation block absent for N1 = N2 = 0");
    }
    Mat rot_block = shape.n_fixed > 0 ? m.block(0, 0, d, d) : m.block(q + 1, q + 1, d, d);
    const lie::Rotation rot = lie::project_rotation(rot_block);
    const Vec x = m.block(0, q, q, 1);
    const Vec rotated_bx = m.block(q + 1, q + 1 + r, r, 1);
    return TfgElement(rot, x, lie::act(rot.inverse(), rotated_bx));
}

TfgTangent tangent_from_embedding(const Mat& m, const TfgShape& shape) {
    const int d = shape.d, q = shape.q(), r = shape.r();
    if (shape.n_fixed == 0 && shape.n_body == 0) {
        throw ShapeMismatch("tangent_from_embedding: rotation block absent for N1 = N2 = 0");
    }
    const Mat rot_block =
        shape.n_fixed > 0 ? m.block(0, 0, d, d) : m.block(q + 1, q + 1, d, d);
    return {vee_rotation_block(rot_block, d), m.block(0, q, q, 1),
            m.block(q + 1, q + 1 + r, r, 1)};
}

TfgElement compose_embedding(const TfgElement& a, const TfgElement& b) {
    return element_from_embedding(embed_matrix(a) * embed_matrix(b), a.shape());
}

TfgElement inverse_embedding(const TfgElement& a) {
    return element_from_embedding(embed_matrix(a).inverse(), a.shape());
}

TfgElement exp_tfg_embedding(const TfgTangent& xi) {
    const int d = xi.rot.size() == 1 ? 2 : 3;
    const TfgShape shape{d, static_cast<int>(xi.fixed.size()) / d,
                         static_cast<int>(xi.body.size()) / d};
    return element_from_embedding(expm_series(algebra_embedding(xi, shape), 40), shape);
}

TfgTangent log_tfg_embedding(const TfgElement& a) {
    return tangent_from_embedding(logm_iss(embed_matrix(a)), a.shape());
}

Mat central_difference(const std::function<Vec(const Vec&)>& f, const Vec& at, double h) {
    const Vec f0 = f(at);
    Mat jac(f0.size(), at.size());
    for (int j = 0; j < at.size(); ++j) {
        Vec plus = at, minus = at;
        plus(j) += h;
        minus(j) -= h;
        jac.col(j) = (f(plus) - f(minus)) / (2.0 * h);
    }
    return jac;
}

}  // namespace tfg::oracles
