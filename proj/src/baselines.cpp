#include "tfg/baselines.hpp"

#include <cmath>

#include "tfg/errors.hpp"

namespace tfg::baselines {

using lie::Rotation;
using lie::skew;

namespace {

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

struct Propagated {
    BaselineState mean;       // propagated physical state, P untouched
    Eigen::Matrix3d r_prev;   // attitude before the step
};

Propagated propagate_mean(const BaselineState& s, const NavParams& prm, const ImuSample& imu) {
    Propagated out{s, s.R.matrix()};
    const Eigen::Vector3d a_world = s.R.matrix() * (imu.accel + s.ba);
    out.mean.v = s.v + prm.dt * (prm.gravity + a_world);
    out.mean.p = s.p + prm.dt * s.v;
    out.mean.R = s.R * lie::exp_rot(Vec(prm.dt * (imu.gyro + s.bw)));
    return out;
}

Mat process_noise(const NavParams& prm) {
    Mat q = Mat::Zero(15, 15);
    q.block(0, 0, 3, 3) = prm.Qr;
    q.block(3, 3, 3, 3) = prm.Qv;
    q.block(9, 9, 3, 3) = prm.Qbw;
    q.block(12, 12, 3, 3) = prm.Qba;
    return q;
}

Mat kalman_gain(const Mat& p, const Mat& h, const Mat& n) {
    const Mat s = symmetrized(h * p * h.transpose()) + n;
    return Mat(s.ldlt().solve(h * p)).transpose();
}

}  // namespace

Mat mekf_transition(const BaselineState& state, const NavParams& prm, const ImuSample& imu) {
    // Error state (eta, dv, dp, dbw, dba) with R = R_hat exp(eta).
    const Eigen::Vector3d mu = prm.dt * (imu.gyro + state.bw);
    Mat f = Mat::Identity(15, 15);
    f.block(0, 0, 3, 3) = lie::exp_rot(Vec(mu)).matrix().transpose();
    f.block(0, 9, 3, 3) = prm.dt * lie::right_jacobian(mu);
    f.block(3, 0, 3, 3) = -prm.dt * state.R.matrix() * skew(imu.accel + state.ba);
    f.block(3, 12, 3, 3) = prm.dt * state.R.matrix();
    f.block(6, 3, 3, 3) = prm.dt * Eigen::Matrix3d::Identity();
    return f;
}

Mat imperfect_transition(const BaselineState& state, const NavParams& prm,
                         const ImuSample& imu) {
    // Right-invariant error on the SE_2(3) part: xi_R with e^R = R R_hat^-1,
    // xi_v = dv + (v_hat)x xi_R, xi_p = dp + (p_hat)x xi_R; additive biases.
    const auto [next, r_prev] = propagate_mean(state, prm, imu);
    const Eigen::Vector3d mu = prm.dt * (imu.gyro + state.bw);
    Mat a_v = Mat::Identity(15, 15);
    a_v.block(3, 0, 3, 3) = prm.dt * skew(prm.gravity);
    a_v.block(3, 12, 3, 3) = prm.dt * r_prev;
    a_v.block(6, 3, 3, 3) = prm.dt * Eigen::Matrix3d::Identity();

    const Eigen::Matrix3d m1 = prm.dt * next.R.matrix() * lie::right_jacobian(mu);
    Mat a_s = Mat::Identity(15, 15);
    a_s.block(0, 9, 3, 3) = m1;
    a_s.block(3, 9, 3, 3) = skew(next.v) * m1;
    a_s.block(6, 9, 3, 3) = skew(next.p) * m1;
    return a_s * a_v;
}

BaselineState mekf_step(const BaselineState& state, const NavParams& prm, const ImuSample& imu,
                        const std::optional<ObsBatch>& obs) {
    auto [next, r_prev] = propagate_mean(state, prm, imu);
    (void)r_prev;
    const Mat f = mekf_transition(state, prm, imu);
    // Velocity-channel noise is body-frame (accelerometer), rotate it to world.
    Mat q = process_noise(prm);
    q.block(3, 3, 3, 3) = next.R.matrix() * prm.Qv * next.R.matrix().transpose();
    next.P = symmetrized(f * state.P * f.transpose()) + q;

    if (obs) {
        const int m = static_cast<int>(obs->landmarks.size());
        Mat h = Mat::Zero(3 * m, 15);
        Vec z(3 * m);
        const Eigen::Matrix3d rt = next.R.matrix().transpose();
        for (int i = 0; i < m; ++i) {
            const Eigen::Vector3d pred = rt * (obs->landmarks[i] - next.p);
            h.block(3 * i, 0, 3, 3) = skew(pred);
            h.block(3 * i, 6, 3, 3) = -rt;
            z.segment(3 * i, 3) = obs->measured.segment(3 * i, 3) - pred;
        }
        const Mat k = kalman_gain(next.P, h, obs->N);
        const Vec dx = k * z;
        next.R = lie::project_rotation(next.R.matrix() *
                                       lie::exp_rot(Vec(dx.segment(0, 3))).matrix());
        next.v += dx.segment(3, 3);
        next.p += dx.segment(6, 3);
        next.bw += dx.segment(9, 3);
        next.ba += dx.segment(12, 3);
        next.P = symmetrized((Mat::Identity(15, 15) - k * h) * next.P);
    }
    return next;
}

BaselineState imperfect_iekf_step(const BaselineState& state, const NavParams& prm,
                                  const ImuSample& imu, const std::optional<ObsBatch>& obs) {
    auto [next, r_prev] = propagate_mean(state, prm, imu);
    (void)r_prev;
    const Mat a = imperfect_transition(state, prm, imu);

    // Map the channel noises into right-invariant coordinates.
    const Eigen::Matrix3d r_hat = next.R.matrix();
    Mat b = Mat::Identity(15, 15);
    b.block(0, 0, 3, 3) = r_hat;
    b.block(3, 0, 3, 3) = skew(next.v) * r_hat;
    b.block(6, 0, 3, 3) = skew(next.p) * r_hat;
    b.block(3, 3, 3, 3) = r_hat;  // body-frame accelerometer noise
    const Mat q_hat = symmetrized(b * process_noise(prm) * b.transpose());

    next.P = symmetrized(a * state.P * a.transpose()) + q_hat;

    if (obs) {
        const int m = static_cast<int>(obs->landmarks.size());
        Mat h = Mat::Zero(3 * m, 15);
        Vec z(3 * m);
        for (int i = 0; i < m; ++i) {
            h.block(3 * i, 0, 3, 3) = skew(obs->landmarks[i]);
            h.block(3 * i, 6, 3, 3) = -Eigen::Matrix3d::Identity();
            z.segment(3 * i, 3) =
                next.R.matrix() * obs->measured.segment(3 * i, 3) - obs->landmarks[i] + next.p;
        }
        const int mb = static_cast<int>(obs->N.rows()) / 3;
        const Mat rep = lie::rep_matrix(next.R, mb);
        const Mat n_hat = symmetrized(rep * obs->N * rep.transpose());
        const Mat k = kalman_gain(next.P, h, n_hat);
        const Vec dx = k * z;

        const Rotation lr = lie::exp_rot(Vec(dx.segment(0, 3)));
        const Mat nu = lie::nu(Vec(dx.segment(0, 3)), 3);
        next.v = nu * dx.segment(3, 3) + lr.matrix() * next.v;
        next.p = nu * dx.segment(6, 3) + lr.matrix() * next.p;
        next.R = lie::project_rotation(lr.matrix() * next.R.matrix());
        next.bw += dx.segment(9, 3);
        next.ba += dx.segment(12, 3);
        next.P = symmetrized((Mat::Identity(15, 15) - k * h) * next.P);
    }
    return next;
}

Mat sekd_embed(const Mat& rot, const std::vector<Vec>& translations) {
    const int d = static_cast<int>(rot.rows());
    const int k = static_cast<int>(translations.size());
    Mat m = Mat::Identity(d + k, d + k);
    m.block(0, 0, d, d) = rot;
    for (int i = 0; i < k; ++i) m.block(0, d + i, d, 1) = translations[i];
    return m;
}

std::pair<Mat, std::vector<Vec>> sekd_compose(const Mat& r1, const std::vector<Vec>& t1,
                                              const Mat& r2, const std::vector<Vec>& t2) {
    const int d = static_cast<int>(r1.rows());
    const Mat prod = sekd_embed(r1, t1) * sekd_embed(r2, t2);
    std::vector<Vec> t(t1.size());
    for (size_t i = 0; i < t.size(); ++i) t[i] = prod.block(0, d + static_cast<int>(i), d, 1);
    return {prod.block(0, 0, d, d), t};
}

std::pair<Mat, std::vector<Vec>> sekd_exp(const Vec& xi_rot, const std::vector<Vec>& xi_t) {
    const int d = xi_rot.size() == 1 ? 2 : 3;
    const int k = static_cast<int>(xi_t.size());
    Mat alg = Mat::Zero(d + k, d + k);
    if (d == 2) {
        alg(0, 1) = -xi_rot(0);
        alg(1, 0) = xi_rot(0);
    } else {
        alg.block(0, 0, 3, 3) = skew(xi_rot);
    }
    for (int i = 0; i < k; ++i) alg.block(0, d + i, d, 1) = xi_t[i];

    // Plain scaled-and-squared series; this routine is an oracle, not a hot path.
    int scale = 0;
    while (alg.norm() / std::pow(2.0, scale) > 0.25) ++scale;
    const Mat a = alg / std::pow(2.0, scale);
    Mat result = Mat::Identity(d + k, d + k);
    Mat term = Mat::Identity(d + k, d + k);
    for (int n = 1; n <= 24; ++n) {
        term = term * a / n;
        result += term;
    }
    for (int s = 0; s < scale; ++s) result = result * result;

    std::vector<Vec> t(xi_t.size());
    for (size_t i = 0; i < t.size(); ++i) t[i] = result.block(0, d + static_cast<int>(i), d, 1);
    return {result.block(0, 0, d, d), t};
}

}  // namespace tfg::baselines
