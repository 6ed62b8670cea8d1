#pragma once

#include "tfg/system.hpp"

namespace tfg {

/// Which invariant error the filter linearizes: the left error E = chi_hat^-1 . chi
/// goes with fixed-frame observations, the right error e = chi . chi_hat^-1 with
/// body-frame observations.
enum class ErrorSide { Left, Right };

/// Estimate chi_hat plus the covariance P of the linearized invariant error.
struct FilterState {
    TfgElement chi;
    Mat P;
    ErrorSide side = ErrorSide::Right;
};

/// Process noise (R / x / X channels with optional state-dependent gains) and
/// the observation covariance N of the output model in use.
struct NoiseModel {
    Mat Qr, Qx, QX;
    std::function<Mat(const TfgElement&)> Gx;  // defaults to identity when empty
    std::function<Mat(const TfgElement&)> GX;
    Mat N;
};

struct JacobianSet {
    Mat A_s, A_v, H;
};

/// Innovation in the sense of invariant filtering:
///   fixed frame: Z = R^-1 * (y - H^x x) - H^X X - offset
///   body frame:  z = R * (Y + H^X X) + H^x x - offset
Vec innovation(const OutputModel& om, const TfgElement& chi_hat, const Vec& measured);

/// The same innovation computed from the invariant error alone (Prop. 2 identity);
/// used as a cross-check oracle against `innovation`.
Vec innovation_from_error(const OutputModel& om, const TfgElement& err);

/// Linearized-error Jacobian of one output model.
Mat output_jacobian(const OutputModel& om, const TfgShape& shape, ErrorSide side);

/// A^s and A^v for one step. `pre`/`post` are the estimates around the frame
/// step; they are only consulted for generic frame dynamics.
std::pair<Mat, Mat> propagation_jacobians(const StepModel& sm, const TfgShape& shape,
                                          ErrorSide side, const TfgElement& pre,
                                          const TfgElement& post);

JacobianSet jacobians_left(const TwoFramesSystem& system, int step, const TfgElement& pre,
                           const TfgElement& post);
JacobianSet jacobians_right(const TwoFramesSystem& system, int step, const TfgElement& pre,
                            const TfgElement& post);

/// A^s for inertial navigation with IMU biases on SO(3)^+_{2,2}
/// (x = (v, p), X = (b_gyro, b_accel)); omega is the gyro reading of the step.
Mat generic_frame_jacobian_imu(const TfgElement& pre, const TfgElement& post,
                               const Eigen::Vector3d& omega, double dt);

/// Noise covariances mapped into linearized-invariant-error coordinates,
/// evaluated at the current estimate. Returns (Q_hat, N_hat).
std::pair<Mat, Mat> noise_hat(const NoiseModel& noise, const TfgElement& chi_hat,
                              ErrorSide side);

/// Maps a covariance of the classical error (att log, x - x_hat, X - X_hat)
/// into the invariant-error coordinates at chi_hat: P0 = L Pbar L^T.
Mat initial_covariance(const Mat& p_bar, const TfgElement& chi_hat, ErrorSide side);

/// Copy of the dynamics plus the Riccati propagation
/// P <- (A^s A^v) P (A^s A^v)^T + Q_hat.
FilterState propagate(const FilterState& state, const TwoFramesSystem& system,
                      const NoiseModel& noise, int step);

/// Multiplicative update chi_hat <- chi_hat . exp(K z) (left) or
/// exp(K z) . chi_hat (right), with K from the Riccati equation and
/// P <- (I - K H) P.
FilterState update(const FilterState& state, const OutputModel& om, const NoiseModel& noise,
                   const Vec& measured);

/// Exact nonlinear invariant-error recursion through one step of a natural
/// system (component formulas of the error propositions). Test oracle for the
/// log-linearity and trajectory-independence properties.
TfgElement error_propagate(const TfgElement& err, const TwoFramesSystem& system, int step,
                           ErrorSide side);
TfgElement error_propagate(const TfgElement& err, const StepModel& sm, ErrorSide side);

/// Exact error update under a correction L: E <- L^-1 . E (left),
/// e <- e . L^-1 (right), in component form.
TfgElement error_update(const TfgElement& err, const TfgElement& corr, ErrorSide side);

}  // namespace tfg
