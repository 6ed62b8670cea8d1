#include "tfg/scenarios.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace tfg::scenarios {

using baselines::BaselineState;
using baselines::ImuSample;
using baselines::NavParams;
using baselines::ObsBatch;
using lie::Rotation;

namespace {

constexpr double kDeg = M_PI / 180.0;
constexpr double kG0 = 9.81;

Vec randn(int n, std::mt19937_64& rng, double sigma = 1.0) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = sigma * dist(rng);
    return v;
}

std::string vec_to_string(const Vec& v) {
    std::ostringstream out;
    for (int i = 0; i < v.size(); ++i) out << (i ? " " : "") << cli::format_double(v(i));
    return out.str();
}

}  // namespace

ScenarioConfig ScenarioConfig::from_map(const cli::ConfigMap& map) {
    ScenarioConfig c;
    c.scenario = cli::get_string(map, "scenario", c.scenario);
    if (c.scenario != "inertial_nav" && c.scenario != "lever_arm_car" &&
        c.scenario != "slammot") {
        throw ConfigError("unknown scenario: " + c.scenario);
    }
    c.dt_s = cli::get_double(map, "dt_s", c.dt_s);
    c.duration_s = cli::get_double(map, "duration_s", c.duration_s);
    c.runs = cli::get_int(map, "runs", c.runs);
    c.seed = static_cast<std::uint64_t>(cli::get_long(map, "seed", static_cast<long long>(c.seed)));
    c.record_every_steps = cli::get_int(map, "record_every_steps", c.record_every_steps);
    c.threads = cli::get_int(map, "threads", c.threads);
    {
        std::istringstream in(cli::get_string(map, "filters", "tfg,imperfect,mekf"));
        std::string tok;
        c.filters.clear();
        while (std::getline(in, tok, ',')) {
            if (!tok.empty()) c.filters.push_back(tok);
        }
    }
    c.traj_radius_m = cli::get_double(map, "traj_radius_m", c.traj_radius_m);
    c.traj_speed_mps = cli::get_double(map, "traj_speed_mps", c.traj_speed_mps);
    c.gravity_mps2 = cli::get_double(map, "gravity_mps2", c.gravity_mps2);
    c.sigma_gyro_rad_s = cli::get_double(map, "sigma_gyro_rad_s", c.sigma_gyro_rad_s);
    c.sigma_accel_mps2 = cli::get_double(map, "sigma_accel_mps2", c.sigma_accel_mps2);
    c.sigma_feature_m = cli::get_double(map, "sigma_feature_m", c.sigma_feature_m);
    c.landmark_rate_hz = cli::get_double(map, "landmark_rate_hz", c.landmark_rate_hz);
    const auto lm = [&](const char* key, Eigen::Vector3d fallback) {
        const auto v = cli::get_doubles(map, key, {fallback.x(), fallback.y(), fallback.z()});
        if (v.size() != 3) throw ConfigError(std::string(key) + ": expected 3 numbers");
        return Eigen::Vector3d(v[0], v[1], v[2]);
    };
    c.landmark1 = lm("landmark1_m", c.landmark1);
    c.landmark2 = lm("landmark2_m", c.landmark2);
    c.landmark3 = lm("landmark3_m", c.landmark3);
    c.landmarks23_from_s = cli::get_double(map, "landmarks23_from_s", c.landmarks23_from_s);
    c.init_att_deg = cli::get_double(map, "init_att_deg", c.init_att_deg);
    c.init_bw_deg_s = cli::get_double(map, "init_bw_deg_s", c.init_bw_deg_s);
    c.init_ba_g = cli::get_double(map, "init_ba_g", c.init_ba_g);
    c.p0_vel_mps = cli::get_double(map, "p0_vel_mps", c.p0_vel_mps);
    c.p0_pos_m = cli::get_double(map, "p0_pos_m", c.p0_pos_m);
    c.car_speed_mps = cli::get_double(map, "car_speed_mps", c.car_speed_mps);
    c.car_yaw_rate_rad_s = cli::get_double(map, "car_yaw_rate_rad_s", c.car_yaw_rate_rad_s);
    c.sigma_odo_m = cli::get_double(map, "sigma_odo_m", c.sigma_odo_m);
    c.sigma_odo_rad = cli::get_double(map, "sigma_odo_rad", c.sigma_odo_rad);
    c.sigma_gnss_m = cli::get_double(map, "sigma_gnss_m", c.sigma_gnss_m);
    c.gnss_rate_hz = cli::get_double(map, "gnss_rate_hz", c.gnss_rate_hz);
    {
        const auto v = cli::get_doubles(map, "lever_arm_m", {c.lever_arm_m.x(), c.lever_arm_m.y()});
        if (v.size() != 2) throw ConfigError("lever_arm_m: expected 2 numbers");
        c.lever_arm_m = Eigen::Vector2d(v[0], v[1]);
    }
    c.odo_scale_variant = cli::get_bool(map, "odo_scale_variant", c.odo_scale_variant);
    c.odo_scale = cli::get_double(map, "odo_scale", c.odo_scale);
    c.slam_static_features = cli::get_int(map, "slam_static_features", c.slam_static_features);
    c.slam_moving_features = cli::get_int(map, "slam_moving_features", c.slam_moving_features);
    c.slam_singer = cli::get_bool(map, "slam_singer", c.slam_singer);
    c.slam_singer_gamma = cli::get_double(map, "slam_singer_gamma", c.slam_singer_gamma);
    c.sigma_slam_feature_m = cli::get_double(map, "sigma_slam_feature_m", c.sigma_slam_feature_m);
    if (c.dt_s <= 0.0) throw ConfigError("dt_s must be positive");
    if (c.runs < 1) throw ConfigError("runs must be >= 1");
    for (double sigma : {c.sigma_gyro_rad_s, c.sigma_accel_mps2, c.sigma_feature_m,
                         c.sigma_odo_m, c.sigma_odo_rad, c.sigma_gnss_m,
                         c.sigma_slam_feature_m, c.init_att_deg, c.init_bw_deg_s, c.init_ba_g}) {
        if (sigma < 0.0) throw ConfigError("standard deviations must be nonnegative");
    }
    return c;
}

cli::ConfigMap ScenarioConfig::to_map() const {
    cli::ConfigMap m;
    m["scenario"] = scenario;
    m["dt_s"] = cli::format_double(dt_s);
    m["duration_s"] = cli::format_double(duration_s);
    m["runs"] = std::to_string(runs);
    m["seed"] = std::to_string(seed);
    m["record_every_steps"] = std::to_string(record_every_steps);
    m["threads"] = std::to_string(threads);
    {
        std::string f;
        for (const auto& name : filters) f += (f.empty() ? "" : ",") + name;
        m["filters"] = f;
    }
    m["traj_radius_m"] = cli::format_double(traj_radius_m);
    m["traj_speed_mps"] = cli::format_double(traj_speed_mps);
    m["gravity_mps2"] = cli::format_double(gravity_mps2);
    m["sigma_gyro_rad_s"] = cli::format_double(sigma_gyro_rad_s);
    m["sigma_accel_mps2"] = cli::format_double(sigma_accel_mps2);
    m["sigma_feature_m"] = cli::format_double(sigma_feature_m);
    m["landmark_rate_hz"] = cli::format_double(landmark_rate_hz);
    m["landmark1_m"] = vec_to_string(landmark1);
    m["landmark2_m"] = vec_to_string(landmark2);
    m["landmark3_m"] = vec_to_string(landmark3);
    m["landmarks23_from_s"] = cli::format_double(landmarks23_from_s);
    m["init_att_deg"] = cli::format_double(init_att_deg);
    m["init_bw_deg_s"] = cli::format_double(init_bw_deg_s);
    m["init_ba_g"] = cli::format_double(init_ba_g);
    m["p0_vel_mps"] = cli::format_double(p0_vel_mps);
    m["p0_pos_m"] = cli::format_double(p0_pos_m);
    m["car_speed_mps"] = cli::format_double(car_speed_mps);
    m["car_yaw_rate_rad_s"] = cli::format_double(car_yaw_rate_rad_s);
    m["sigma_odo_m"] = cli::format_double(sigma_odo_m);
    m["sigma_odo_rad"] = cli::format_double(sigma_odo_rad);
    m["sigma_gnss_m"] = cli::format_double(sigma_gnss_m);
    m["gnss_rate_hz"] = cli::format_double(gnss_rate_hz);
    m["lever_arm_m"] = vec_to_string(lever_arm_m);
    m["odo_scale_variant"] = odo_scale_variant ? "true" : "false";
    m["odo_scale"] = cli::format_double(odo_scale);
    m["slam_static_features"] = std::to_string(slam_static_features);
    m["slam_moving_features"] = std::to_string(slam_moving_features);
    m["slam_singer"] = slam_singer ? "true" : "false";
    m["slam_singer_gamma"] = cli::format_double(slam_singer_gamma);
    m["sigma_slam_feature_m"] = cli::format_double(sigma_slam_feature_m);
    return m;
}

std::uint64_t run_seed(std::uint64_t master_seed, int run) {
    // splitmix64 of (seed, run); decorrelates neighbouring runs.
    std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(run) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

int meas_period_steps(double rate_hz, double dt) {
    if (rate_hz <= 0.0) return 0;
    return std::max(1, static_cast<int>(std::lround(1.0 / (rate_hz * dt))));
}

SimLog simulate_inertial(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    const int steps = cfg.steps();
    const double dt = cfg.dt_s;
    const Eigen::Vector3d gravity(0.0, 0.0, -cfg.gravity_mps2);
    const double yaw_rate = cfg.traj_speed_mps / cfg.traj_radius_m;

    const Eigen::Vector3d bw_true = randn(3, rng, cfg.init_bw_deg_s * kDeg);
    const Eigen::Vector3d ba_true = randn(3, rng, cfg.init_ba_g * kG0);

    SimLog log;
    log.dt = dt;
    log.t.reserve(steps + 1);
    log.truth.reserve(steps + 1);

    const auto analytic_v = [&](double t) {
        const double th = yaw_rate * t;
        return Eigen::Vector3d(-cfg.traj_speed_mps * std::sin(th),
                               cfg.traj_speed_mps * std::cos(th), 0.0);
    };

    Rotation r = Rotation::identity(3);
    Eigen::Vector3d v = analytic_v(0.0);
    Eigen::Vector3d p(cfg.traj_radius_m, 0.0, 0.0);
    Vec bias(6);
    bias << bw_true, ba_true;
    log.t.push_back(0.0);
    log.truth.emplace_back(r, Vec((Vec(6) << v, p).finished()), bias);

    const int period = meas_period_steps(cfg.landmark_rate_hz, dt);
    const std::vector<Eigen::Vector3d> landmarks{cfg.landmark1, cfg.landmark2, cfg.landmark3};

    for (int n = 0; n < steps; ++n) {
        const double t_next = (n + 1) * dt;
        const Eigen::Vector3d omega_ideal(0.0, 0.0, yaw_rate);
        const Eigen::Vector3d accel_ideal =
            r.matrix().transpose() * ((analytic_v(t_next) - v) / dt - gravity);

        log.u_rot.push_back(Vec(omega_ideal - bw_true - randn(3, rng, cfg.sigma_gyro_rad_s)));
        log.u_vec.push_back(Vec(accel_ideal - ba_true - randn(3, rng, cfg.sigma_accel_mps2)));

        // Truth follows the ideal inputs; the drawn noises live in the readings.
        const Eigen::Vector3d p_next = p + dt * v;
        const Eigen::Vector3d v_next = v + dt * (gravity + r.matrix() * accel_ideal);
        r = lie::project_rotation(r.matrix() * lie::exp_rot(Vec(dt * omega_ideal)).matrix());
        v = v_next;
        p = p_next;
        log.t.push_back(t_next);
        log.truth.emplace_back(r, Vec((Vec(6) << v, p).finished()), bias);

        if (period > 0 && (n + 1) % period == 0) {
            MeasurementEvent ev;
            ev.step = n;
            std::vector<int> ids{0};
            if (t_next >= cfg.landmarks23_from_s) {
                ids.push_back(1);
                ids.push_back(2);
            }
            ev.ids = ids;
            ev.y = Vec(3 * ids.size());
            for (size_t i = 0; i < ids.size(); ++i) {
                ev.y.segment(3 * i, 3) = r.matrix().transpose() * (landmarks[ids[i]] - p) +
                                         randn(3, rng, cfg.sigma_feature_m);
            }
            log.meas.push_back(std::move(ev));
        }
    }
    return log;
}

SimLog simulate_lever_arm(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    const int steps = cfg.steps();
    const double dt = cfg.dt_s;

    SimLog log;
    log.dt = dt;
    Rotation r = Rotation::identity(2);
    Eigen::Vector2d x(0.0, 0.0);
    const Vec lever = cfg.lever_arm_m;
    log.t.push_back(0.0);
    log.truth.emplace_back(r, Vec(x), lever);

    const int period = meas_period_steps(cfg.gnss_rate_hz, dt);
    for (int n = 0; n < steps; ++n) {
        const double dtheta = dt * cfg.car_yaw_rate_rad_s;
        const Eigen::Vector2d shift(dt * cfg.car_speed_mps * cfg.odo_scale, 0.0);

        log.u_rot.push_back(Vec((Vec(1) << dtheta - randn(1, rng, cfg.sigma_odo_rad)(0)).finished()));
        log.u_vec.push_back(Vec(Eigen::Vector2d(shift - randn(2, rng, cfg.sigma_odo_m))));

        x = x + r.matrix() * shift;
        r = r * Rotation::planar(dtheta);
        log.t.push_back((n + 1) * dt);
        log.truth.emplace_back(r, Vec(x), lever);

        if (period > 0 && (n + 1) % period == 0) {
            MeasurementEvent ev;
            ev.step = n;
            ev.ids = {0};
            ev.y = Vec(x) + r.matrix() * lever + randn(2, rng, cfg.sigma_gnss_m);
            log.meas.push_back(std::move(ev));
        }
    }
    return log;
}

SimLog simulate_slammot(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    const int steps = cfg.steps();
    const double dt = cfg.dt_s;
    const Eigen::Vector3d gravity(0.0, 0.0, -cfg.gravity_mps2);
    const double yaw_rate = cfg.traj_speed_mps / cfg.traj_radius_m;
    const int ns = cfg.slam_static_features, nm = cfg.slam_moving_features;
    const int n1 = 2 + ns + 2 * nm + (cfg.slam_singer ? nm : 0);

    // Feature geometry: statics scattered around the loop, movers crossing it.
    std::vector<Eigen::Vector3d> statics(ns), movers(nm), speeds(nm), accels(nm);
    for (int k = 0; k < ns; ++k) {
        statics[k] = Eigen::Vector3d(randn(3, rng, 0.5 * cfg.traj_radius_m));
    }
    for (int i = 0; i < nm; ++i) {
        movers[i] = Eigen::Vector3d(randn(3, rng, 0.5 * cfg.traj_radius_m));
        speeds[i] = Eigen::Vector3d(randn(3, rng, 2.0));
        accels[i] = cfg.slam_singer ? Eigen::Vector3d(randn(3, rng, 0.5))
                                    : Eigen::Vector3d::Zero();
    }

    const auto pack = [&](const Rotation& r, const Eigen::Vector3d& v, const Eigen::Vector3d& p) {
        Vec x(3 * n1);
        x.segment(0, 3) = v;
        x.segment(3, 3) = p;
        for (int k = 0; k < ns; ++k) x.segment(6 + 3 * k, 3) = statics[k];
        for (int i = 0; i < nm; ++i) x.segment(6 + 3 * ns + 3 * i, 3) = movers[i];
        for (int i = 0; i < nm; ++i) x.segment(6 + 3 * ns + 3 * nm + 3 * i, 3) = speeds[i];
        if (cfg.slam_singer) {
            for (int i = 0; i < nm; ++i) x.segment(6 + 3 * ns + 6 * nm + 3 * i, 3) = accels[i];
        }
        return TfgElement(r, x, Vec::Zero(0));
    };

    SimLog log;
    log.dt = dt;
    const auto analytic_v = [&](double t) {
        const double th = yaw_rate * t;
        return Eigen::Vector3d(-cfg.traj_speed_mps * std::sin(th),
                               cfg.traj_speed_mps * std::cos(th), 0.0);
    };
    Rotation r = Rotation::identity(3);
    Eigen::Vector3d v = analytic_v(0.0);
    Eigen::Vector3d p(cfg.traj_radius_m, 0.0, 0.0);
    log.t.push_back(0.0);
    log.truth.push_back(pack(r, v, p));

    const int period = meas_period_steps(cfg.landmark_rate_hz, dt);
    for (int n = 0; n < steps; ++n) {
        const double t_next = (n + 1) * dt;
        const Eigen::Vector3d rotvec(0.0, 0.0, yaw_rate * dt);
        const Eigen::Vector3d av = r.matrix().transpose() * (analytic_v(t_next) - v - dt * gravity);
        const Eigen::Vector3d ap = Eigen::Vector3d::Zero();

        log.u_rot.push_back(Vec(rotvec + randn(3, rng, cfg.sigma_gyro_rad_s * dt)));
        log.u_vec.push_back(Vec((Vec(6) << av + randn(3, rng, cfg.sigma_accel_mps2 * dt),
                                 ap).finished()));

        const Eigen::Vector3d p_next = p + dt * v + r.matrix() * ap;
        const Eigen::Vector3d v_next = v + dt * gravity + r.matrix() * av;
        r = lie::project_rotation(r.matrix() * lie::exp_rot(Vec(rotvec)).matrix());
        v = v_next;
        p = p_next;
        for (int i = 0; i < nm; ++i) {
            movers[i] += dt * speeds[i];
            if (cfg.slam_singer) {
                speeds[i] += dt * accels[i];
                accels[i] -= dt * cfg.slam_singer_gamma * accels[i];
            }
        }
        log.t.push_back(t_next);
        log.truth.push_back(pack(r, v, p));

        if (period > 0 && (n + 1) % period == 0) {
            MeasurementEvent ev;
            ev.step = n;
            ev.y = Vec(3 * (ns + nm));
            for (int k = 0; k < ns; ++k) {
                ev.ids.push_back(k);
                ev.y.segment(3 * k, 3) = r.matrix().transpose() * (statics[k] - p) +
                                         randn(3, rng, cfg.sigma_slam_feature_m);
            }
            for (int i = 0; i < nm; ++i) {
                ev.ids.push_back(ns + i);
                ev.y.segment(3 * (ns + i), 3) = r.matrix().transpose() * (movers[i] - p) +
                                                randn(3, rng, cfg.sigma_slam_feature_m);
            }
            log.meas.push_back(std::move(ev));
        }
    }
    return log;
}

}  // namespace

SimLog simulate(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    if (cfg.scenario == "inertial_nav") return simulate_inertial(cfg, rng);
    if (cfg.scenario == "lever_arm_car") return simulate_lever_arm(cfg, rng);
    return simulate_slammot(cfg, rng);
}

// ---------------------------------------------------------------------------
// System builders
// ---------------------------------------------------------------------------

BuiltScenario build_inertial_nav(const ScenarioConfig& cfg, const SimLog& log) {
    const double dt = cfg.dt_s;
    const TfgShape shape{3, 2, 2};
    const Eigen::Vector3d gravity(0.0, 0.0, -cfg.gravity_mps2);

    BuiltScenario out;
    out.side = ErrorSide::Right;
    out.system.shape = shape;

    Mat f = Mat::Identity(6, 6);
    f.block(3, 0, 3, 3) = dt * Eigen::Matrix3d::Identity();  // p += dt v
    Mat c = Mat::Zero(6, 6);
    c.block(0, 3, 3, 3) = dt * Eigen::Matrix3d::Identity();  // v += dt R b_a
    Vec d_fixed = Vec::Zero(6);
    d_fixed.segment(0, 3) = dt * gravity;

    out.system.step_model = [f, c, d_fixed, dt, u_rot = log.u_rot, u_vec = log.u_vec](int n) {
        StepModel sm;
        sm.vec.F = f;
        sm.vec.C = c;
        sm.vec.Phi = Mat::Identity(6, 6);
        sm.vec.Gamma = Mat::Zero(6, 6);
        sm.vec.d_fixed = d_fixed;
        sm.vec.u_body = Vec::Zero(6);
        sm.vec.u_body.segment(0, 3) = dt * u_vec[n];
        sm.vec.d_body = Vec::Zero(6);
        sm.vec.u_fixed = Vec::Zero(6);
        const Eigen::Vector3d omega = u_rot[n];
        GenericFrame gf;
        gf.advance = [omega, dt](const TfgElement& chi) {
            const Eigen::Vector3d b_gyro = chi.body().segment(0, 3);
            return chi.rot() * lie::exp_rot(Vec(dt * (omega + b_gyro)));
        };
        gf.error_jacobian = [omega, dt](const TfgElement& pre, const TfgElement& post) {
            return generic_frame_jacobian_imu(pre, post, omega, dt);
        };
        sm.frame = std::move(gf);
        return sm;
    };

    for (const Eigen::Vector3d& lm : {cfg.landmark1, cfg.landmark2, cfg.landmark3}) {
        OutputModel om;
        om.frame = Frame::Body;
        om.Hx = Mat::Zero(3, 6);
        om.Hx.block(0, 3, 3, 3) = Eigen::Matrix3d::Identity();  // picks p
        om.HX = Mat::Zero(3, 6);
        om.offset = lm;
        out.system.outputs.push_back(std::move(om));
    }

    out.noise.Qr = std::pow(dt * cfg.sigma_gyro_rad_s, 2) * Mat::Identity(3, 3);
    out.noise.Qx = std::pow(dt * cfg.sigma_accel_mps2, 2) * Mat::Identity(3, 3);
    out.noise.Gx = [](const TfgElement& chi) {
        Mat g = Mat::Zero(6, 3);
        g.block(0, 0, 3, 3) = chi.rot().matrix();
        return g;
    };
    out.noise.QX = Mat::Zero(6, 6);
    out.obs_noise_block = std::pow(cfg.sigma_feature_m, 2) * Mat::Identity(3, 3);
    return out;
}

BuiltScenario build_lever_arm_car(const ScenarioConfig& cfg, const SimLog& log) {
    const TfgShape shape{2, 1, 1};
    BuiltScenario out;
    out.side = ErrorSide::Left;
    out.system.shape = shape;

    out.system.step_model = [u_rot = log.u_rot, u_vec = log.u_vec](int n) {
        StepModel sm;
        sm.vec = VectorDynamics::identity(TfgShape{2, 1, 1});
        sm.vec.u_body = u_vec[n];
        sm.frame = NaturalFrame{Rotation::identity(2), lie::exp_rot(u_rot[n])};
        return sm;
    };

    OutputModel om;
    om.frame = Frame::Fixed;
    om.Hx = Mat::Identity(2, 2);
    om.HX = Mat::Identity(2, 2);
    om.offset = Vec::Zero(2);
    out.system.outputs.push_back(std::move(om));

    out.noise.Qr = std::pow(cfg.sigma_odo_rad, 2) * Mat::Identity(1, 1);
    out.noise.Qx = std::pow(cfg.sigma_odo_m, 2) * Mat::Identity(2, 2);
    out.noise.Gx = [](const TfgElement& chi) { return Mat(chi.rot().matrix()); };
    out.noise.QX = Mat::Zero(2, 2);
    out.noise.N = std::pow(cfg.sigma_gnss_m, 2) * Mat::Identity(2, 2);
    out.obs_noise_block = out.noise.N;
    return out;
}

BuiltScenario build_slammot(const ScenarioConfig& cfg, const SimLog& log) {
    const int ns = cfg.slam_static_features, nm = cfg.slam_moving_features;
    const bool singer = cfg.slam_singer;
    const int n1 = 2 + ns + 2 * nm + (singer ? nm : 0);
    const TfgShape shape{3, n1, 0};
    const double dt = cfg.dt_s;
    const Eigen::Vector3d gravity(0.0, 0.0, -cfg.gravity_mps2);

    BuiltScenario out;
    out.side = ErrorSide::Right;
    out.system.shape = shape;

    const int q = 3 * n1;
    Mat f = Mat::Identity(q, q);
    f.block(3, 0, 3, 3) = dt * Eigen::Matrix3d::Identity();  // p += dt v
    for (int i = 0; i < nm; ++i) {
        // q^i += dt c^i
        f.block(6 + 3 * ns + 3 * i, 6 + 3 * ns + 3 * nm + 3 * i, 3, 3) =
            dt * Eigen::Matrix3d::Identity();
        if (singer) {
            // c^i += dt a^i ; a^i -= dt gamma a^i
            f.block(6 + 3 * ns + 3 * nm + 3 * i, 6 + 3 * ns + 6 * nm + 3 * i, 3, 3) =
                dt * Eigen::Matrix3d::Identity();
            f.block(6 + 3 * ns + 6 * nm + 3 * i, 6 + 3 * ns + 6 * nm + 3 * i, 3, 3) =
                (1.0 - dt * cfg.slam_singer_gamma) * Eigen::Matrix3d::Identity();
        }
    }
    Vec d_fixed = Vec::Zero(q);
    d_fixed.segment(0, 3) = dt * gravity;

    out.system.step_model = [f, d_fixed, q, u_rot = log.u_rot, u_vec = log.u_vec](int n) {
        StepModel sm;
        sm.vec.F = f;
        sm.vec.C = Mat::Zero(q, 0);
        sm.vec.Phi = Mat::Zero(0, 0);
        sm.vec.Gamma = Mat::Zero(0, q);
        sm.vec.d_fixed = d_fixed;
        sm.vec.u_body = Vec::Zero(q);
        sm.vec.u_body.segment(0, 6) = u_vec[n];
        sm.vec.d_body = Vec::Zero(0);
        sm.vec.u_fixed = Vec::Zero(0);
        sm.frame = NaturalFrame{Rotation::identity(3), lie::exp_rot(u_rot[n])};
        return sm;
    };

    // Body-frame feature observations: R^T (l^k - p) and R^T (q^i - p).
    for (int k = 0; k < ns + nm; ++k) {
        OutputModel om;
        om.frame = Frame::Body;
        om.Hx = Mat::Zero(3, q);
        om.Hx.block(0, 3, 3, 3) = Eigen::Matrix3d::Identity();
        om.Hx.block(0, 6 + 3 * k, 3, 3) = -Eigen::Matrix3d::Identity();
        om.HX = Mat::Zero(3, 0);
        om.offset = Vec::Zero(3);
        out.system.outputs.push_back(std::move(om));
    }

    out.noise.Qr = std::pow(dt * cfg.sigma_gyro_rad_s, 2) * Mat::Identity(3, 3);
    out.noise.Qx = std::pow(dt * cfg.sigma_accel_mps2, 2) * Mat::Identity(6, 6);
    out.noise.Gx = [q](const TfgElement& chi) {
        Mat g = Mat::Zero(q, 6);
        g.block(0, 0, 3, 3) = chi.rot().matrix();
        g.block(3, 3, 3, 3) = chi.rot().matrix();
        return g;
    };
    out.noise.QX = Mat::Zero(0, 0);
    out.obs_noise_block = std::pow(cfg.sigma_slam_feature_m, 2) * Mat::Identity(3, 3);
    return out;
}

BuiltScenario build_for_validation(const ScenarioConfig& cfg) {
    // Fixed nonzero inputs: zero inputs would hide input-dependent failures
    // of the group-affine property.
    std::mt19937_64 rng(0xC0FFEEull);
    SimLog probe;
    probe.dt = cfg.dt_s;
    if (cfg.scenario == "inertial_nav") {
        probe.u_rot.assign(1, randn(3, rng, 0.5));
        probe.u_vec.assign(1, randn(3, rng, 2.0));
        return build_inertial_nav(cfg, probe);
    }
    if (cfg.scenario == "lever_arm_car") {
        probe.u_rot.assign(1, randn(1, rng, 0.3));
        probe.u_vec.assign(1, randn(2, rng, 1.0));
        return build_lever_arm_car(cfg, probe);
    }
    probe.u_rot.assign(1, randn(3, rng, 0.3));
    probe.u_vec.assign(1, randn(6, rng, 1.0));
    return build_slammot(cfg, probe);
}

// ---------------------------------------------------------------------------
// Monte-Carlo benchmark (inertial navigation comparison)
// ---------------------------------------------------------------------------

namespace {

Eigen::Matrix<double, 5, 1> nav_metrics(const TfgElement& truth, const Rotation& r_hat,
                                        const Eigen::Vector3d& v_hat,
                                        const Eigen::Vector3d& p_hat,
                                        const Eigen::Vector3d& bw_hat,
                                        const Eigen::Vector3d& ba_hat) {
    Eigen::Matrix<double, 5, 1> m;
    m(0) = lie::rotation_angle(r_hat.inverse() * truth.rot()) / kDeg;
    m(1) = (truth.fixed().segment(0, 3) - v_hat).norm();
    m(2) = (truth.fixed().segment(3, 3) - p_hat).norm();
    m(3) = (truth.body().segment(0, 3) - bw_hat).norm() / kDeg;
    m(4) = (truth.body().segment(3, 3) - ba_hat).norm();
    return m;
}

struct RunOutput {
    std::map<std::string, Mat> traces;  // filter -> (recorded x 5)
};

RunOutput run_single(const ScenarioConfig& cfg, int run) {
    std::mt19937_64 rng(run_seed(cfg.seed, run));
    const SimLog log = simulate_inertial(cfg, rng);
    const int steps = cfg.steps();

    // Initial estimate: attitude perturbed in the body frame, biases at zero.
    const Vec eps = randn(3, rng, cfg.init_att_deg * kDeg);
    const Rotation r0_hat =
        lie::project_rotation(log.truth[0].rot().matrix() * lie::exp_rot(eps).matrix());
    const Eigen::Vector3d v0 = log.truth[0].fixed().segment(0, 3);
    const Eigen::Vector3d p0 = log.truth[0].fixed().segment(3, 3);

    Mat p_bar = Mat::Zero(15, 15);
    p_bar.block(0, 0, 3, 3) = std::pow(cfg.init_att_deg * kDeg, 2) * Mat::Identity(3, 3);
    p_bar.block(3, 3, 3, 3) = std::pow(cfg.p0_vel_mps, 2) * Mat::Identity(3, 3);
    p_bar.block(6, 6, 3, 3) = std::pow(cfg.p0_pos_m, 2) * Mat::Identity(3, 3);
    p_bar.block(9, 9, 3, 3) = std::pow(cfg.init_bw_deg_s * kDeg, 2) * Mat::Identity(3, 3);
    p_bar.block(12, 12, 3, 3) = std::pow(cfg.init_ba_g * kG0, 2) * Mat::Identity(3, 3);

    const BuiltScenario built = build_inertial_nav(cfg, log);
    const std::vector<Eigen::Vector3d> landmarks{cfg.landmark1, cfg.landmark2, cfg.landmark3};

    const bool want_tfg = std::count(cfg.filters.begin(), cfg.filters.end(), "tfg") > 0;
    const bool want_imp = std::count(cfg.filters.begin(), cfg.filters.end(), "imperfect") > 0;
    const bool want_mekf = std::count(cfg.filters.begin(), cfg.filters.end(), "mekf") > 0;

    Vec x0(6);
    x0 << v0, p0;
    FilterState tfg_state{TfgElement(r0_hat, x0, Vec::Zero(6)), Mat(), ErrorSide::Right};
    tfg_state.P = initial_covariance(p_bar, tfg_state.chi, ErrorSide::Right);

    NavParams prm;
    prm.dt = cfg.dt_s;
    prm.gravity = Eigen::Vector3d(0.0, 0.0, -cfg.gravity_mps2);
    prm.Qr = std::pow(cfg.dt_s * cfg.sigma_gyro_rad_s, 2) * Mat::Identity(3, 3);
    prm.Qv = std::pow(cfg.dt_s * cfg.sigma_accel_mps2, 2) * Mat::Identity(3, 3);

    BaselineState imp;
    imp.R = r0_hat;
    imp.v = v0;
    imp.p = p0;
    {
        Mat l = Mat::Identity(15, 15);
        l.block(3, 0, 3, 3) = lie::skew(v0);
        l.block(6, 0, 3, 3) = lie::skew(p0);
        imp.P = l * p_bar * l.transpose();
    }
    BaselineState mekf = imp;
    mekf.P = p_bar;

    const int rec = std::max(1, cfg.record_every_steps);
    const int n_recorded = steps / rec + 1;
    RunOutput out;
    const auto ensure = [&](const std::string& name) {
        out.traces.emplace(name, Mat::Zero(n_recorded, 5));
    };
    if (want_tfg) ensure("tfg");
    if (want_imp) ensure("imperfect");
    if (want_mekf) ensure("mekf");

    int rec_row = 0;
    const auto record = [&](int truth_idx) {
        if (want_tfg) {
            const TfgElement& c = tfg_state.chi;
            out.traces["tfg"].row(rec_row) =
                nav_metrics(log.truth[truth_idx], c.rot(), c.fixed().segment(0, 3),
                            c.fixed().segment(3, 3), c.body().segment(0, 3),
                            c.body().segment(3, 3))
                    .transpose();
        }
        if (want_imp) {
            out.traces["imperfect"].row(rec_row) =
                nav_metrics(log.truth[truth_idx], imp.R, imp.v, imp.p, imp.bw, imp.ba)
                    .transpose();
        }
        if (want_mekf) {
            out.traces["mekf"].row(rec_row) =
                nav_metrics(log.truth[truth_idx], mekf.R, mekf.v, mekf.p, mekf.bw, mekf.ba)
                    .transpose();
        }
        ++rec_row;
    };
    record(0);

    size_t next_meas = 0;
    NoiseModel tfg_noise = built.noise;
    for (int n = 0; n < steps; ++n) {
        std::optional<ObsBatch> obs;
        if (next_meas < log.meas.size() && log.meas[next_meas].step == n) {
            const MeasurementEvent& ev = log.meas[next_meas];
            ObsBatch batch;
            for (int id : ev.ids) batch.landmarks.push_back(landmarks[id]);
            batch.measured = ev.y;
            batch.N = Mat::Zero(ev.y.size(), ev.y.size());
            for (int i = 0; i < static_cast<int>(ev.ids.size()); ++i) {
                batch.N.block(3 * i, 3 * i, 3, 3) = built.obs_noise_block;
            }
            obs = std::move(batch);
            ++next_meas;
        }

        const ImuSample imu{Eigen::Vector3d(log.u_rot[n]), Eigen::Vector3d(log.u_vec[n])};
        if (want_tfg) {
            tfg_state = propagate(tfg_state, built.system, tfg_noise, n);
            if (obs) {
                std::vector<OutputModel> models;
                for (size_t i = 0; i < obs->landmarks.size(); ++i) {
                    OutputModel om = built.system.outputs[0];
                    om.offset = obs->landmarks[i];
                    models.push_back(std::move(om));
                }
                tfg_noise.N = obs->N;
                tfg_state = update(tfg_state, stack_outputs(models), tfg_noise, obs->measured);
            }
        }
        if (want_imp) imp = baselines::imperfect_iekf_step(imp, prm, imu, obs);
        if (want_mekf) mekf = baselines::mekf_step(mekf, prm, imu, obs);

        if ((n + 1) % rec == 0) record(n + 1);
    }
    return out;
}

}  // namespace

MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg) {
    if (cfg.scenario != "inertial_nav") {
        throw ConfigError("run_monte_carlo: the benchmark experiment is inertial_nav only");
    }
    const int steps = cfg.steps();
    const int rec = std::max(1, cfg.record_every_steps);
    const int n_recorded = steps / rec + 1;
    for (const auto& name : cfg.filters) {
        if (name != "tfg" && name != "imperfect" && name != "mekf") {
            throw ConfigError("unknown filter: " + name);
        }
    }

    std::vector<RunOutput> outputs(cfg.runs);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int threads = static_cast<int>(
        std::min<unsigned>(cfg.threads > 0 ? cfg.threads : hw, cfg.runs));
    if (threads <= 1) {
        for (int run = 0; run < cfg.runs; ++run) outputs[run] = run_single(cfg, run);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int run = next.fetch_add(1); run < cfg.runs; run = next.fetch_add(1)) {
                    outputs[run] = run_single(cfg, run);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    MonteCarloResult result;
    result.t.resize(n_recorded);
    for (int i = 0; i < n_recorded; ++i) result.t[i] = i * rec * cfg.dt_s;
    for (const auto& name : cfg.filters) {
        Mat sum_sq = Mat::Zero(n_recorded, 5);
        auto& runs = result.per_run[name];
        for (int run = 0; run < cfg.runs; ++run) {
            const Mat& trace = outputs[run].traces.at(name);
            sum_sq += trace.cwiseProduct(trace);
            runs.push_back(trace);
        }
        result.rmse[name] = (sum_sq / cfg.runs).cwiseSqrt();
    }
    return result;
}

}  // namespace tfg::scenarios
