#pragma once

#include <cstdint>
#include <map>
#include <random>

#include "tfg/baselines.hpp"
#include "tfg/config.hpp"
#include "tfg/filter.hpp"

namespace tfg::scenarios {

/// Everything a simulation / benchmark run needs, all units in the key names
/// of the config file that feeds it.
struct ScenarioConfig {
    std::string scenario = "inertial_nav";  // inertial_nav | lever_arm_car | slammot
    double dt_s = 0.01;
    double duration_s = 80.0;
    int runs = 100;
    std::uint64_t seed = 1;
    int record_every_steps = 10;
    int threads = 0;  // 0 = hardware concurrency
    std::vector<std::string> filters = {"tfg", "imperfect", "mekf"};

    // inertial_nav: loop trajectory and landmark geometry
    double traj_radius_m = 200.0;
    double traj_speed_mps = 20.0;
    double gravity_mps2 = 9.81;
    double sigma_gyro_rad_s = 0.01;
    double sigma_accel_mps2 = 0.05;
    double sigma_feature_m = 1.0;
    double landmark_rate_hz = 10.0;
    Eigen::Vector3d landmark1{200.0, 0.0, 0.0};
    Eigen::Vector3d landmark2{0.0, 200.0, 50.0};
    Eigen::Vector3d landmark3{0.0, -200.0, 50.0};
    double landmarks23_from_s = 20.0;

    // initial-error standard deviations
    double init_att_deg = 30.0;
    double init_bw_deg_s = 1.0;
    double init_ba_g = 0.1;
    double p0_vel_mps = 0.1;
    double p0_pos_m = 0.1;

    // lever_arm_car
    double car_speed_mps = 5.0;
    double car_yaw_rate_rad_s = 0.3;
    double sigma_odo_m = 0.02;
    double sigma_odo_rad = 0.002;
    double sigma_gnss_m = 0.5;
    double gnss_rate_hz = 10.0;
    Eigen::Vector2d lever_arm_m{1.0, 0.5};
    bool odo_scale_variant = false;
    double odo_scale = 1.0;

    // slammot
    int slam_static_features = 2;
    int slam_moving_features = 1;
    bool slam_singer = false;
    double slam_singer_gamma = 0.5;
    double sigma_slam_feature_m = 0.5;

    int steps() const { return static_cast<int>(duration_s / dt_s + 0.5); }

    static ScenarioConfig from_map(const cli::ConfigMap& map);
    cli::ConfigMap to_map() const;
};

struct MeasurementEvent {
    int step;              // measurement taken after this step's propagation
    std::vector<int> ids;  // landmark / feature indices, scenario-specific
    Vec y;                 // stacked measured blocks
};

/// Truth states, sensor readings and measurement stream of one simulated run.
/// Readings are what the filters consume; the truth satisfies the discrete
/// scenario dynamics driven by reading + true bias + noise exactly.
struct SimLog {
    double dt = 0.0;
    std::vector<double> t;           // size steps + 1
    std::vector<TfgElement> truth;   // size steps + 1
    std::vector<Vec> u_rot;          // per step: gyro reading / odometry angle / preint rot
    std::vector<Vec> u_vec;          // per step: accel reading / odometry shift / preint (av, ap)
    std::vector<MeasurementEvent> meas;
};

/// A scenario instantiated as a TwoFramesSystem bound to a log's inputs.
struct BuiltScenario {
    TwoFramesSystem system;
    ErrorSide side = ErrorSide::Right;
    NoiseModel noise;                 // process part; N filled per update batch
    Mat obs_noise_block;              // d x d covariance of one measured block
};

BuiltScenario build_inertial_nav(const ScenarioConfig& cfg, const SimLog& log);
BuiltScenario build_lever_arm_car(const ScenarioConfig& cfg, const SimLog& log);
BuiltScenario build_slammot(const ScenarioConfig& cfg, const SimLog& log);
/// Structural variants bound to an all-zero one-step log, for the validators.
BuiltScenario build_for_validation(const ScenarioConfig& cfg);

SimLog simulate(const ScenarioConfig& cfg, std::mt19937_64& rng);

/// Deterministic per-run generator seed derived from the master seed.
std::uint64_t run_seed(std::uint64_t master_seed, int run);

/// Per-step error norms of one filter against the truth:
/// columns att_deg, vel_mps, pos_m, bw_degps, ba_mps2.
struct ErrorTrace {
    std::vector<double> t;
    Mat metrics;  // rows = recorded steps, 5 columns
};

struct MonteCarloResult {
    std::vector<double> t;
    std::map<std::string, Mat> rmse;                    // filter -> (times x 5)
    std::map<std::string, std::vector<Mat>> per_run;    // filter -> per-run traces
};

/// Runs the paper's comparison experiment (inertial navigation with IMU
/// biases) for the requested filters on identical per-run logs.
MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg);

}  // namespace tfg::scenarios
