#include "tfg/filter.hpp"

#include <cmath>

namespace tfg {

using lie::Rotation;

namespace {

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

Mat gain_matrix(const TfgElement& chi, const std::function<Mat(const TfgElement&)>& g, int dim) {
    if (!g) return Mat::Identity(dim, dim);
    return g(chi);
}

}  // namespace

Vec innovation(const OutputModel& om, const TfgElement& chi_hat, const Vec& measured) {
    if (measured.size() != om.offset.size()) {
        throw ShapeMismatch("innovation: measurement length mismatch");
    }
    if (om.frame == Frame::Fixed) {
        return lie::act(chi_hat.rot().inverse(), measured - om.Hx * chi_hat.fixed()) -
               om.HX * chi_hat.body() - om.offset;
    }
    return lie::act(chi_hat.rot(), measured + om.HX * chi_hat.body()) + om.Hx * chi_hat.fixed() -
           om.offset;
}

Vec innovation_from_error(const OutputModel& om, const TfgElement& err) {
    if (om.frame == Frame::Fixed) {
        return om.Hx * err.fixed() + om.HX * lie::act(err.rot(), err.body()) +
               lie::act(err.rot(), om.offset) - om.offset;
    }
    const Rotation rinv = err.rot().inverse();
    return -om.HX * err.body() - om.Hx * lie::act(rinv, err.fixed()) +
           lie::act(rinv, om.offset) - om.offset;
}

Mat output_jacobian(const OutputModel& om, const TfgShape& shape, ErrorSide side) {
    const int rows = static_cast<int>(om.offset.size());
    Mat h(rows, shape.tangent_dim());
    const Mat dg_b = lie::dg_operator(om.offset, shape.d);
    if (side == ErrorSide::Left) {
        if (om.frame != Frame::Fixed) throw FrameMismatch("left error takes fixed-frame outputs");
        h << -dg_b, om.Hx, om.HX;
    } else {
        if (om.frame != Frame::Body) throw FrameMismatch("right error takes body-frame outputs");
        h << dg_b, -om.Hx, -om.HX;
    }
    return h;
}

std::pair<Mat, Mat> propagation_jacobians(const StepModel& sm, const TfgShape& shape,
                                          ErrorSide side, const TfgElement& pre,
                                          const TfgElement& post) {
    const int dp = shape.algebra_dim(), q = shape.q(), r = shape.r();
    const int n = shape.tangent_dim();

    Mat a_v = Mat::Zero(n, n);
    a_v.block(0, 0, dp, dp) = Mat::Identity(dp, dp);
    a_v.block(dp, dp, q, q) = sm.vec.F;
    a_v.block(dp, dp + q, q, r) = sm.vec.C;
    a_v.block(dp + q, dp, r, q) = sm.vec.Gamma;
    a_v.block(dp + q, dp + q, r, r) = sm.vec.Phi;
    if (side == ErrorSide::Left) {
        a_v.block(dp, 0, q, dp) = -lie::dg_operator(sm.vec.u_body, shape.d);
        a_v.block(dp + q, 0, r, dp) = -lie::dg_operator(sm.vec.d_body, shape.d);
    } else {
        a_v.block(dp, 0, q, dp) = lie::dg_operator(sm.vec.d_fixed, shape.d);
        a_v.block(dp + q, 0, r, dp) = lie::dg_operator(sm.vec.u_fixed, shape.d);
    }

    Mat a_s = Mat::Identity(n, n);
    if (const auto* nf = std::get_if<NaturalFrame>(&sm.frame)) {
        if (side == ErrorSide::Left) {
            a_s.block(0, 0, dp, dp) = lie::adjoint(nf->Omega.inverse());
            a_s.block(dp, dp, q, q) =
                lie::rep_matrix(nf->Omega.inverse() * nf->O.inverse(), shape.n_fixed);
        } else {
            a_s.block(0, 0, dp, dp) = lie::adjoint(nf->O);
            a_s.block(dp + q, dp + q, r, r) = lie::rep_matrix(nf->O * nf->Omega, shape.n_body);
        }
    } else {
        a_s = std::get<GenericFrame>(sm.frame).error_jacobian(pre, post);
    }
    return {a_s, a_v};
}

namespace {

JacobianSet jacobians_for(const TwoFramesSystem& system, int step, ErrorSide side,
                          const TfgElement& pre, const TfgElement& post) {
    JacobianSet js;
    const StepModel sm = system.step_model(step);
    std::tie(js.A_s, js.A_v) = propagation_jacobians(sm, system.shape, side, pre, post);
    if (!system.outputs.empty()) {
        js.H = output_jacobian(stack_outputs(system.outputs), system.shape, side);
    }
    return js;
}

}  // namespace

JacobianSet jacobians_left(const TwoFramesSystem& system, int step, const TfgElement& pre,
                           const TfgElement& post) {
    return jacobians_for(system, step, ErrorSide::Left, pre, post);
}

JacobianSet jacobians_right(const TwoFramesSystem& system, int step, const TfgElement& pre,
                            const TfgElement& post) {
    return jacobians_for(system, step, ErrorSide::Right, pre, post);
}

Mat generic_frame_jacobian_imu(const TfgElement& pre, const TfgElement& post,
                               const Eigen::Vector3d& omega, double dt) {
    if (!(pre.shape() == TfgShape{3, 2, 2})) {
        throw ShapeMismatch("generic_frame_jacobian_imu expects SO(3)^+_{2,2}");
    }
    const Eigen::Vector3d b_gyro = pre.body().segment(0, 3);
    const Eigen::Matrix3d j_bar = lie::right_jacobian(dt * (omega + b_gyro));
    const Eigen::Matrix3d m1 =
        dt * post.rot().matrix() * j_bar * pre.rot().matrix().transpose();
    const Eigen::Matrix3d m2 = post.rot().matrix() * pre.rot().matrix().transpose();
    const Eigen::Vector3d v_hat = pre.fixed().segment(0, 3);
    const Eigen::Vector3d p_hat = pre.fixed().segment(3, 3);

    Mat a_s = Mat::Identity(15, 15);
    a_s.block(0, 9, 3, 3) = m1;
    a_s.block(3, 9, 3, 3) = lie::skew(v_hat) * m1;
    a_s.block(6, 9, 3, 3) = lie::skew(p_hat) * m1;
    a_s.block(9, 9, 3, 3) = m2;
    a_s.block(12, 12, 3, 3) = m2;
    return a_s;
}

std::pair<Mat, Mat> noise_hat(const NoiseModel& noise, const TfgElement& chi_hat,
                              ErrorSide side) {
    const TfgShape& s = chi_hat.shape();
    const int dp = s.algebra_dim(), q = s.q(), r = s.r();
    const Mat gx = gain_matrix(chi_hat, noise.Gx, q);
    const Mat gbx = gain_matrix(chi_hat, noise.GX, r);
    const int wx = static_cast<int>(gx.cols()), wbx = static_cast<int>(gbx.cols());

    // Q_hat = B Q B^T where B maps (w^R, w^x, w^X) onto the linearized error,
    // per the noisy-error expansion xi_noisy = xi + B w.
    Mat b = Mat::Zero(dp + q + r, dp + wx + wbx);
    if (side == ErrorSide::Left) {
        // The X row follows E^X = X - (R^-1 R_hat) X_hat: a right-multiplied
        // rotation noise exp(w^R) enters as -dg(X_hat) w^R, the same
        // linearization as in the P_0|0 transform.
        b.block(0, 0, dp, dp) = Mat::Identity(dp, dp);
        b.block(dp, dp, q, wx) = lie::rep_matrix(chi_hat.rot().inverse(), s.n_fixed) * gx;
        b.block(dp + q, 0, r, dp) = -lie::dg_operator(chi_hat.body(), s.d);
        b.block(dp + q, dp + wx, r, wbx) = gbx;
    } else {
        const Mat ad = lie::adjoint(chi_hat.rot());
        b.block(0, 0, dp, dp) = ad;
        b.block(dp, 0, q, dp) = lie::dg_operator(chi_hat.fixed(), s.d) * ad;
        b.block(dp, dp, q, wx) = gx;
        b.block(dp + q, dp + wx, r, wbx) = lie::rep_matrix(chi_hat.rot(), s.n_body) * gbx;
    }
    Mat qw = Mat::Zero(dp + wx + wbx, dp + wx + wbx);
    qw.block(0, 0, dp, dp) = noise.Qr;
    qw.block(dp, dp, wx, wx) = noise.Qx;
    qw.block(dp + wx, dp + wx, wbx, wbx) = noise.QX;
    const Mat q_hat = symmetrized(b * qw * b.transpose());

    Mat n_hat;
    if (noise.N.size() != 0) {
        const int m_blocks = static_cast<int>(noise.N.rows()) / s.d;
        const Rotation ry =
            side == ErrorSide::Left ? chi_hat.rot().inverse() : chi_hat.rot();
        const Mat rep = lie::rep_matrix(ry, m_blocks);
        n_hat = symmetrized(rep * noise.N * rep.transpose());
    }
    return {q_hat, n_hat};
}

Mat initial_covariance(const Mat& p_bar, const TfgElement& chi_hat, ErrorSide side) {
    const TfgShape& s = chi_hat.shape();
    const int dp = s.algebra_dim(), q = s.q(), r = s.r();
    if (p_bar.rows() != s.tangent_dim()) {
        throw ShapeMismatch("initial_covariance: P_bar dimension mismatch");
    }
    Mat l = Mat::Identity(s.tangent_dim(), s.tangent_dim());
    if (side == ErrorSide::Left) {
        l.block(dp, dp, q, q) = lie::rep_matrix(chi_hat.rot().inverse(), s.n_fixed);
        l.block(dp + q, 0, r, dp) = -lie::dg_operator(chi_hat.body(), s.d);
    } else {
        l.block(dp, 0, q, dp) = lie::dg_operator(chi_hat.fixed(), s.d);
        l.block(dp + q, dp + q, r, r) = lie::rep_matrix(chi_hat.rot(), s.n_body);
    }
    return symmetrized(l * p_bar * l.transpose());
}

FilterState propagate(const FilterState& state, const TwoFramesSystem& system,
                      const NoiseModel& noise, int step) {
    const StepModel sm = system.step_model(step);
    const TfgElement pre = apply_vector_dynamics(sm.vec, state.chi);
    const TfgElement post = apply_frame_dynamics(sm.frame, pre);
    const auto [a_s, a_v] = propagation_jacobians(sm, system.shape, state.side, pre, post);
    const Mat a = a_s * a_v;
    const Mat q_hat = noise_hat(noise, post, state.side).first;
    return {post, symmetrized(a * state.P * a.transpose()) + q_hat, state.side};
}

FilterState update(const FilterState& state, const OutputModel& om, const NoiseModel& noise,
                   const Vec& measured) {
    const bool compatible = (om.frame == Frame::Fixed && state.side == ErrorSide::Left) ||
                            (om.frame == Frame::Body && state.side == ErrorSide::Right);
    if (!compatible) {
        throw FrameMismatch("update: output frame incompatible with filter error side");
    }
    const TfgShape& shape = state.chi.shape();
    const Mat h = output_jacobian(om, shape, state.side);
    const Vec z = innovation(om, state.chi, measured);

    const int m_blocks = static_cast<int>(om.offset.size()) / shape.d;
    const Rotation ry =
        state.side == ErrorSide::Left ? state.chi.rot().inverse() : state.chi.rot();
    const Mat rep = lie::rep_matrix(ry, m_blocks);
    const Mat n_hat = symmetrized(rep * noise.N * rep.transpose());

    const Mat s = symmetrized(h * state.P * h.transpose()) + n_hat;
    Eigen::SelfAdjointEigenSolver<Mat> eig(s);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (lmin <= 0.0 || lmax / lmin > 1e12) {
        throw SingularInnovationCovariance("update: innovation covariance condition > 1e12");
    }
    const Mat k = s.ldlt().solve(h * state.P).transpose();

    const TfgElement corr = exp_tfg(TfgTangent::from_stacked(shape, k * z));
    const TfgElement chi = state.side == ErrorSide::Left ? compose(state.chi, corr)
                                                         : compose(corr, state.chi);
    const Mat p = symmetrized((Mat::Identity(k.rows(), k.rows()) - k * h) * state.P);
    return {chi.orthonormalized(), p, state.side};
}

TfgElement error_propagate(const TfgElement& err, const StepModel& sm, ErrorSide side) {
    const auto* nf = std::get_if<NaturalFrame>(&sm.frame);
    if (nf == nullptr) {
        throw std::invalid_argument("error_propagate requires natural frame dynamics");
    }
    const Rotation rinv = err.rot().inverse();
    if (side == ErrorSide::Left) {
        const Vec x = sm.vec.F * err.fixed() + sm.vec.C * lie::act(err.rot(), err.body()) +
                      lie::act(err.rot(), sm.vec.u_body) - sm.vec.u_body;
        const Vec bx = sm.vec.Phi * err.body() + sm.vec.d_body -
                       lie::act(rinv, sm.vec.d_body) +
                       sm.vec.Gamma * lie::act(rinv, err.fixed());
        const Rotation rot = nf->Omega.inverse() * err.rot() * nf->Omega;
        return TfgElement(rot, lie::act(nf->Omega.inverse() * nf->O.inverse(), x), bx);
    }
    const Vec x = sm.vec.F * err.fixed() + sm.vec.C * lie::act(err.rot(), err.body()) +
                  sm.vec.d_fixed - lie::act(err.rot(), sm.vec.d_fixed);
    const Vec bx = sm.vec.Phi * err.body() + sm.vec.Gamma * lie::act(rinv, err.fixed()) +
                   lie::act(rinv, sm.vec.u_fixed) - sm.vec.u_fixed;
    const Rotation rot = nf->O * err.rot() * nf->O.inverse();
    return TfgElement(rot, x, lie::act(nf->O * nf->Omega, bx));
}

TfgElement error_propagate(const TfgElement& err, const TwoFramesSystem& system, int step,
                           ErrorSide side) {
    return error_propagate(err, system.step_model(step), side);
}

TfgElement error_update(const TfgElement& err, const TfgElement& corr, ErrorSide side) {
    if (!(err.shape() == corr.shape())) throw ShapeMismatch("error_update: shape mismatch");
    if (side == ErrorSide::Left) {
        const Rotation lr_inv = corr.rot().inverse();
        return TfgElement(lr_inv * err.rot(), lie::act(lr_inv, err.fixed() - corr.fixed()),
                          err.body() - lie::act(err.rot().inverse() * corr.rot(), corr.body()));
    }
    const Rotation lr_inv = corr.rot().inverse();
    return TfgElement(err.rot() * lr_inv,
                      err.fixed() - lie::act(err.rot() * lr_inv, corr.fixed()),
                      lie::act(corr.rot(), err.body() - corr.body()));
}

}  // namespace tfg
