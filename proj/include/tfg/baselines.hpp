#pragma once

#include <optional>
#include <vector>

#include "tfg/lie.hpp"

namespace tfg::baselines {

/// Physical state shared by the comparison filters: attitude, velocity,
/// position, gyro bias, accel bias, plus the filter's own 15x15 covariance.
struct BaselineState {
    lie::Rotation R = lie::Rotation::identity(3);
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Vector3d bw = Eigen::Vector3d::Zero();
    Eigen::Vector3d ba = Eigen::Vector3d::Zero();
    Mat P = Mat::Zero(15, 15);
};

struct ImuSample {
    Eigen::Vector3d gyro = Eigen::Vector3d::Zero();
    Eigen::Vector3d accel = Eigen::Vector3d::Zero();
};

/// Body-frame observations of landmarks with known positions, stacked.
struct ObsBatch {
    std::vector<Eigen::Vector3d> landmarks;
    Vec measured;  // 3 * landmarks.size()
    Mat N;
};

/// Per-step process noise (already discretized) and constants, shared by the
/// baselines so the comparison is fair.
struct NavParams {
    double dt = 0.01;
    Eigen::Vector3d gravity = Eigen::Vector3d(0, 0, -9.81);
    Mat Qr = Mat::Zero(3, 3);   // attitude channel, per step
    Mat Qv = Mat::Zero(3, 3);   // velocity channel, per step
    Mat Qbw = Mat::Zero(3, 3);  // gyro-bias random walk
    Mat Qba = Mat::Zero(3, 3);  // accel-bias random walk
};

/// Multiplicative EKF on SO(3) x R^12; attitude error in the body frame
/// (right-multiplicative, R = R_hat exp(eta)).
BaselineState mekf_step(const BaselineState& state, const NavParams& params,
                        const ImuSample& imu, const std::optional<ObsBatch>& obs = {});

/// "Imperfect IEKF": right-invariant error on SE_2(3) for (R, v, p), plain
/// additive errors for the biases.
BaselineState imperfect_iekf_step(const BaselineState& state, const NavParams& params,
                                  const ImuSample& imu,
                                  const std::optional<ObsBatch>& obs = {});

/// Error-state transition matrices used by the steps above, exposed for the
/// finite-difference validation of the linearizations.
Mat mekf_transition(const BaselineState& state, const NavParams& params,
                    const ImuSample& imu);
Mat imperfect_transition(const BaselineState& state, const NavParams& params,
                         const ImuSample& imu);

// Independent SE_k(d) implementation (homogeneous (d+k) x (d+k) matrices).
// Used as an oracle against the TFG specialization SO(d)^+_{k,0}; deliberately
// does not share code with the TFG composition/exponential path.

/// Embeds (R, t_1..t_k) as [R, t_1, .., t_k; 0, I_k].
Mat sekd_embed(const Mat& rot, const std::vector<Vec>& translations);

/// Group law via matrix product, returned as (R, t_1..t_k).
std::pair<Mat, std::vector<Vec>> sekd_compose(const Mat& r1, const std::vector<Vec>& t1,
                                              const Mat& r2, const std::vector<Vec>& t2);

/// Exponential via dense series on the embedded algebra element.
std::pair<Mat, std::vector<Vec>> sekd_exp(const Vec& xi_rot, const std::vector<Vec>& xi_t);

}  // namespace tfg::baselines
