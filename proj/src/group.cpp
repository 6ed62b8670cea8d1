#include "tfg/group.hpp"

#include <cmath>

namespace tfg {

using lie::Rotation;

TfgElement::TfgElement(Rotation rot, Vec x, Vec bx)
    : rot_(std::move(rot)), x_(std::move(x)), bx_(std::move(bx)) {
    const int d = rot_.dim();
    if (x_.size() % d != 0 || bx_.size() % d != 0) {
        throw ShapeMismatch("TfgElement parts not divisible by d");
    }
    shape_ = TfgShape{d, static_cast<int>(x_.size()) / d, static_cast<int>(bx_.size()) / d};
}

TfgElement::TfgElement(Rotation rot, const lie::MultiVector& x, const lie::MultiVector& bx)
    : TfgElement(std::move(rot), x.data, bx.data) {
    if (x.frame != Frame::Fixed || bx.frame != Frame::Body) {
        throw FrameMismatch("TfgElement expects (fixed, body) multivectors");
    }
    if (x.dim != shape_.d || bx.dim != shape_.d) {
        throw ShapeMismatch("TfgElement multivector dimension mismatch");
    }
}

TfgElement TfgElement::identity(const TfgShape& shape) {
    return TfgElement(Rotation::identity(shape.d), Vec::Zero(shape.q()), Vec::Zero(shape.r()));
}

TfgElement TfgElement::orthonormalized() const {
    return TfgElement(lie::project_rotation(rot_.matrix()), x_, bx_);
}

TfgTangent TfgTangent::zero(const TfgShape& shape) {
    return {Vec::Zero(shape.algebra_dim()), Vec::Zero(shape.q()), Vec::Zero(shape.r())};
}

TfgTangent TfgTangent::from_stacked(const TfgShape& shape, const Vec& v) {
    if (v.size() != shape.tangent_dim()) throw ShapeMismatch("tangent vector length mismatch");
    const int dp = shape.algebra_dim();
    return {v.segment(0, dp), v.segment(dp, shape.q()), v.segment(dp + shape.q(), shape.r())};
}

Vec TfgTangent::stacked() const {
    Vec v(rot.size() + fixed.size() + body.size());
    v << rot, fixed, body;
    return v;
}

TfgElement compose(const TfgElement& a, const TfgElement& b) {
    if (!(a.shape() == b.shape())) throw ShapeMismatch("compose: shape mismatch");
    return TfgElement(a.rot() * b.rot(), a.fixed() + lie::act(a.rot(), b.fixed()),
                      b.body() + lie::act(b.rot().inverse(), a.body()));
}

TfgElement inverse(const TfgElement& a) {
    const Rotation rinv = a.rot().inverse();
    return TfgElement(rinv, -lie::act(rinv, a.fixed()), -lie::act(a.rot(), a.body()));
}

TfgElement exp_tfg(const TfgTangent& xi) {
    const int d = xi.rot.size() == 1 ? 2 : 3;
    const Rotation r = lie::exp_rot(xi.rot);
    const Mat nu_pos = lie::nu(xi.rot, d);
    const Mat nu_neg = lie::nu(-xi.rot, d);
    Vec x(xi.fixed.size());
    for (int i = 0; i < xi.fixed.size() / d; ++i) {
        x.segment(i * d, d) = nu_pos * xi.fixed.segment(i * d, d);
    }
    Vec bx(xi.body.size());
    for (int j = 0; j < xi.body.size() / d; ++j) {
        bx.segment(j * d, d) = nu_neg * xi.body.segment(j * d, d);
    }
    return TfgElement(r, std::move(x), std::move(bx));
}

TfgTangent log_tfg(const TfgElement& a) {
    const int d = a.shape().d;
    const Vec xi_rot = lie::log_rot(a.rot());
    const auto solver_for = [d](const Mat& nu_mat) {
        Eigen::FullPivLU<Mat> lu(nu_mat);
        if (!lu.isInvertible()) throw SingularNu("log_tfg: nu_d is singular");
        return lu;
    };
    const auto lu_pos = solver_for(lie::nu(xi_rot, d));
    const auto lu_neg = solver_for(lie::nu(-xi_rot, d));
    Vec xi_x(a.fixed().size());
    for (int i = 0; i < a.fixed().size() / d; ++i) {
        xi_x.segment(i * d, d) = lu_pos.solve(a.fixed().segment(i * d, d));
    }
    Vec xi_bx(a.body().size());
    for (int j = 0; j < a.body().size() / d; ++j) {
        xi_bx.segment(j * d, d) = lu_neg.solve(a.body().segment(j * d, d));
    }
    return {xi_rot, std::move(xi_x), std::move(xi_bx)};
}

Mat embed_matrix(const TfgElement& a) {
    const TfgShape& s = a.shape();
    const int q = s.q(), r = s.r();
    Mat m = Mat::Zero(q + r + 2, q + r + 2);
    m.block(0, 0, q, q) = lie::rep_matrix(a.rot(), s.n_fixed);
    m.block(0, q, q, 1) = a.fixed();
    m(q, q) = 1.0;
    m.block(q + 1, q + 1, r, r) = lie::rep_matrix(a.rot(), s.n_body);
    m.block(q + 1, q + 1 + r, r, 1) = lie::act(a.rot(), a.body());
    m(q + 1 + r, q + 1 + r) = 1.0;
    return m;
}

Vec star_action(const TfgElement& a, const Vec& beta, const Mat& hx, const Mat& hbx) {
    return hx * a.fixed() + lie::act(a.rot(), hbx * a.body() + beta);
}

TfgElement left_error(const TfgElement& chi_hat, const TfgElement& chi) {
    return compose(inverse(chi_hat), chi);
}

TfgElement right_error(const TfgElement& chi_hat, const TfgElement& chi) {
    return compose(chi, inverse(chi_hat));
}

double distance(const TfgElement& a, const TfgElement& b) {
    const double dr = (a.rot().matrix() - b.rot().matrix()).norm();
    const double dx = (a.fixed() - b.fixed()).norm();
    const double dbx = (a.body() - b.body()).norm();
    return std::max({dr, dx, dbx});
}

}  // namespace tfg
