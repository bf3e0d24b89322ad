// rotornav: GPS-denied UAV position estimation pipeline.
//
// Subcommands cover the full flow: simulate flight logs, train the memory
// neuron network, evaluate one-step prediction, replay EKF fusion with the
// network as a pseudo-GPS source, convert coordinates, and dump plot tables.
// Every subcommand is deterministic given its flags and seeds.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rotornav/errors.hpp"
#include "rotornav/fixtures.hpp"
#include "rotornav/flight_gen.hpp"
#include "rotornav/flightlog.hpp"
#include "rotornav/geodesy.hpp"
#include "rotornav/model_io.hpp"
#include "rotornav/replay.hpp"
#include "rotornav/trainer.hpp"

namespace fs = std::filesystem;
using namespace rotornav;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr double kDegree = M_PI / 180.0;

std::string fmt12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

GeodeticCoord parse_origin(const std::string& spec) {
    std::vector<double> vals;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            vals.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw DomainError("origin: cannot parse '" + tok + "'");
        }
    }
    if (vals.size() != 3) throw DomainError("origin must be lat_deg,lon_deg,alt_m");
    GeodeticCoord origin{vals[0] * kDegree, vals[1] * kDegree, vals[2]};
    origin.validate();
    return origin;
}

// Flat key=value config file; '#' starts a comment line.
std::map<std::string, std::string> read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    return kv;
}

void apply_train_config(const std::map<std::string, std::string>& kv, TrainConfig& cfg) {
    for (const auto& [key, value] : kv) {
        try {
            if (key == "eta") cfg.eta = std::stod(value);
            else if (key == "gamma") cfg.gamma = std::stod(value);
            else if (key == "epochs") cfg.epochs = std::stoi(value);
            else if (key == "alpha_mode") {
                if (value == "fixed") cfg.alpha_mode = AlphaMode::Fixed;
                else if (value == "learned") cfg.alpha_mode = AlphaMode::Learned;
                else throw DomainError("alpha_mode must be fixed|learned");
            } else if (key == "alpha_value") cfg.alpha_value = std::stod(value);
            else if (key == "eta_alpha") cfg.eta_alpha = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "renorm_every") {
                if (value == "sample") cfg.renorm_every = RenormEvery::Sample;
                else if (value == "epoch") cfg.renorm_every = RenormEvery::Epoch;
                else throw DomainError("renorm_every must be sample|epoch");
            } else {
                throw DomainError("unknown config key '" + key + "'");
            }
        } catch (const DomainError&) {
            throw;
        } catch (const std::exception&) {
            throw DomainError("config key '" + key + "': bad value '" + value + "'");
        }
    }
}

std::vector<FlightLog> load_logs(std::vector<std::string> files, const std::string& dir,
                                 double omega_max_raw, double resample_hz) {
    if (!dir.empty()) {
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".csv") found.push_back(entry.path());
        }
        std::sort(found.begin(), found.end());
        for (const auto& p : found) files.push_back(p.string());
    }
    if (files.empty()) throw DomainError("no input logs (use --data or --data-dir)");
    ParseOptions opts;
    opts.raw_rpm_omega_max = omega_max_raw;
    std::vector<FlightLog> logs;
    for (const std::string& f : files) {
        FlightLog log = parse_flight_log(fs::path(f), opts);
        if (resample_hz > 0.0) log = resample(log, resample_hz);
        logs.push_back(std::move(log));
    }
    return logs;
}

void write_train_report(const TrainReport& report, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "# mode: " << (report.unconstrained ? "unconstrained" : "spectral-normalized") << '\n';
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < report.per_epoch_loss.size(); ++i) {
        out << (i + 1) << ',' << fmt17(report.per_epoch_loss[i]) << '\n';
    }
}

TrajectoryPlan plan_from_flags(const std::string& kind, double duration, double radius,
                               double side, double speed, double altitude, double box,
                               std::uint64_t seed, double rate) {
    TrajectoryPlan plan;
    if (kind == "hover") plan.kind = PlanKind::Hover;
    else if (kind == "square") plan.kind = PlanKind::Square;
    else if (kind == "circle") plan.kind = PlanKind::Circle;
    else if (kind == "random") plan.kind = PlanKind::RandomWaypoint;
    else throw DomainError("unknown plan '" + kind + "' (hover|square|circle|random)");
    plan.duration_s = duration;
    plan.radius_m = radius;
    plan.side_m = side;
    plan.speed_mps = speed;
    plan.altitude_m = altitude;
    plan.box_m = box;
    plan.seed = seed;
    plan.log_rate_hz = rate;
    return plan;
}

int run(int argc, char** argv) {
    CLI::App app{"GPS-denied UAV position estimation from rotor speeds"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "Generate one synthetic flight log");
    std::string sim_plan = "hover", sim_out = "flight.csv";
    double sim_duration = 30.0, sim_radius = 2.0, sim_side = 2.0, sim_speed = 0.5;
    double sim_alt = 1.5, sim_box = 2.0, sim_noise = 0.0, sim_rate = 100.0;
    std::uint64_t sim_seed = 0, sim_noise_seed = 0;
    sim->add_option("--plan", sim_plan, "hover|square|circle|random");
    sim->add_option("--duration", sim_duration, "flight duration, s");
    sim->add_option("--radius", sim_radius, "circle radius, m");
    sim->add_option("--side", sim_side, "square side, m");
    sim->add_option("--speed", sim_speed, "cruise speed, m/s");
    sim->add_option("--altitude", sim_alt, "altitude, m");
    sim->add_option("--box", sim_box, "random-waypoint half extent, m");
    sim->add_option("--rate", sim_rate, "log rate, Hz");
    sim->add_option("--seed", sim_seed, "plan seed");
    sim->add_option("--noise-sigma", sim_noise, "position noise std dev, m");
    sim->add_option("--noise-seed", sim_noise_seed, "position noise seed");
    sim->add_option("--out", sim_out, "output CSV path");

    // ---- fixtures ----
    auto* fix = app.add_subcommand("fixtures", "Generate the canonical fixture suite");
    std::string fix_dir;
    if (const char* env = std::getenv("ROTORNAV_FIXTURES")) fix_dir = env;
    else fix_dir = "fixtures";
    int fix_jobs = 1;
    bool fix_stress = false;
    fix->add_option("--out-dir", fix_dir, "output directory (default $ROTORNAV_FIXTURES)");
    fix->add_option("--jobs", fix_jobs, "parallel simulations");
    fix->add_flag("--stress", fix_stress, "also generate the large-trajectory stress suite");

    // ---- train ----
    auto* tr = app.add_subcommand("train", "Train the network on flight logs");
    std::vector<std::string> tr_files;
    std::string tr_dir, tr_config, tr_model = "model.bin", tr_report = "train_report.csv";
    double tr_omega_max = 0.0, tr_rate = 0.0;
    TrainConfig tr_cfg;
    std::uint64_t tr_split_seed = 1;
    bool tr_no_sn = false;
    int tr_hidden = 100;
    tr->add_option("--data", tr_files, "input log CSV (repeatable)");
    tr->add_option("--data-dir", tr_dir, "directory of *.csv logs");
    tr->add_option("--config", tr_config, "key=value config file");
    tr->add_option("--out", tr_model, "output model path");
    tr->add_option("--report", tr_report, "output loss table path");
    tr->add_option("--epochs", tr_cfg.epochs, "training epochs");
    tr->add_option("--eta", tr_cfg.eta, "learning rate");
    tr->add_option("--gamma", tr_cfg.gamma, "Lipschitz budget");
    tr->add_option("--seed", tr_cfg.seed, "weight-init seed");
    tr->add_option("--hidden", tr_hidden, "hidden layer width");
    tr->add_option("--split-seed", tr_split_seed, "train-segment shuffle seed");
    tr->add_option("--omega-max", tr_omega_max, "treat rpm columns as raw rad/s, divide by this");
    tr->add_option("--rate", tr_rate, "resample logs to this rate first, Hz");
    tr->add_flag("--no-spectral-norm", tr_no_sn, "disable spectral normalization (ablation)");

    // ---- evaluate ----
    auto* ev = app.add_subcommand("evaluate", "One-step prediction RMSE of a model");
    std::vector<std::string> ev_files;
    std::string ev_dir, ev_model, ev_split = "test";
    double ev_omega_max = 0.0, ev_rate = 0.0;
    std::uint64_t ev_split_seed = 1;
    ev->add_option("--model", ev_model, "model path")->required();
    ev->add_option("--data", ev_files, "input log CSV (repeatable)");
    ev->add_option("--data-dir", ev_dir, "directory of *.csv logs");
    ev->add_option("--split", ev_split, "test|train|all portion of the 3:2 split");
    ev->add_option("--split-seed", ev_split_seed, "split shuffle seed");
    ev->add_option("--omega-max", ev_omega_max, "raw rpm divisor");
    ev->add_option("--rate", ev_rate, "resample rate, Hz");

    // ---- fuse ----
    auto* fu = app.add_subcommand("fuse", "Replay EKF fusion with the model as pseudo-GPS");
    std::string fu_model, fu_data, fu_out = "fusion.csv", fu_origin = "12.99,77.59,850";
    std::string fu_feedback = "pred";
    double fu_sigma = 0.1, fu_imu_noise = 0.0, fu_rate = 0.0, fu_omega_max = 0.0;
    int fu_gps_div = 10;
    std::uint64_t fu_seed = 0;
    fu->add_option("--model", fu_model, "model path")->required();
    fu->add_option("--data", fu_data, "input log CSV")->required();
    fu->add_option("--origin", fu_origin, "geodetic origin lat_deg,lon_deg,alt_m");
    fu->add_option("--out", fu_out, "output fusion CSV");
    fu->add_option("--sigma", fu_sigma, "pseudo-GPS std dev handed to the filter, m");
    fu->add_option("--gps-div", fu_gps_div, "pseudo-GPS every N log steps");
    fu->add_option("--imu-noise", fu_imu_noise, "accel noise std dev, m/s^2");
    fu->add_option("--seed", fu_seed, "noise seed");
    fu->add_option("--feedback", fu_feedback, "pred|fused network position feedback");
    fu->add_option("--rate", fu_rate, "resample rate, Hz");
    fu->add_option("--omega-max", fu_omega_max, "raw rpm divisor");

    // ---- convert ----
    auto* cv = app.add_subcommand("convert", "Convert coordinate triples from stdin");
    std::string cv_dir_flag, cv_origin = "0,0,0";
    cv->add_option("--direction", cv_dir_flag, "enu2geo|geo2ecef|ecef2geo")->required();
    cv->add_option("--origin", cv_origin, "geodetic origin lat_deg,lon_deg,alt_m (enu2geo)");

    // ---- plotdata ----
    auto* pd = app.add_subcommand("plotdata", "Re-emit plot tables from report files");
    std::string pd_kind, pd_in;
    pd->add_option("--kind", pd_kind, "loss|trajectory")->required();
    pd->add_option("--in", pd_in, "input report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (sim->parsed()) {
        const TrajectoryPlan plan = plan_from_flags(sim_plan, sim_duration, sim_radius, sim_side,
                                                    sim_speed, sim_alt, sim_box, sim_seed,
                                                    sim_rate);
        NoiseConfig noise;
        noise.position_sigma_m = sim_noise;
        noise.seed = sim_noise_seed;
        const FlightLog log = generate_flight(plan, UavParams{}, noise);
        write_flight_log(log, fs::path(sim_out));
        std::cout << "wrote " << sim_out << " (" << log.size() << " rows, "
                  << fmt12(log.duration()) << " s)\n";
        return 0;
    }

    if (fix->parsed()) {
        fs::create_directories(fix_dir);
        auto suite = fixture_suite();
        if (fix_stress) {
            auto stress = stress_suite();
            suite.insert(suite.end(), stress.begin(), stress.end());
        }
        const int jobs = std::max(1, fix_jobs);
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex mu;
        auto worker = [&]() {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= suite.size()) return;
                    i = next++;
                }
                const FlightLog log = generate_flight(suite[i].second, UavParams{});
                write_flight_log(log, fs::path(fix_dir) / (suite[i].first + ".csv"));
            }
        };
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        std::cout << "wrote " << suite.size() << " fixtures to " << fix_dir << '\n';
        return 0;
    }

    if (tr->parsed()) {
        if (!tr_config.empty()) {
            TrainConfig file_cfg;
            apply_train_config(read_config(tr_config), file_cfg);
            // Flags given on the command line override file values.
            if (!tr->count("--epochs")) tr_cfg.epochs = file_cfg.epochs;
            if (!tr->count("--eta")) tr_cfg.eta = file_cfg.eta;
            if (!tr->count("--gamma")) tr_cfg.gamma = file_cfg.gamma;
            if (!tr->count("--seed")) tr_cfg.seed = file_cfg.seed;
            tr_cfg.alpha_mode = file_cfg.alpha_mode;
            tr_cfg.alpha_value = file_cfg.alpha_value;
            tr_cfg.eta_alpha = file_cfg.eta_alpha;
            tr_cfg.renorm_every = file_cfg.renorm_every;
        }
        tr_cfg.spectral_norm_enabled = !tr_no_sn;

        const std::vector<FlightLog> logs = load_logs(tr_files, tr_dir, tr_omega_max, tr_rate);
        const Dataset ds = build_dataset(logs, tr_split_seed);
        MnnNetwork net = init_weights({InputVector::kDim, tr_hidden, 3}, tr_cfg.gamma,
                                      tr_cfg.seed);
        const TrainReport report = train(net, ds.train, tr_cfg);
        save_model(net, fs::path(tr_model));
        write_train_report(report, fs::path(tr_report));
        const double test_rmse = evaluate(net, ds.test);
        std::cerr << "train rmse " << fmt12(report.final_rmse_train) << " m, test rmse "
                  << fmt12(test_rmse) << " m, wall " << fmt12(report.wall_time_s) << " s\n";
        std::cout << "train_rmse_m," << fmt12(report.final_rmse_train) << '\n';
        std::cout << "test_rmse_m," << fmt12(test_rmse) << '\n';
        return 0;
    }

    if (ev->parsed()) {
        const MnnNetwork net = load_model(fs::path(ev_model));
        const std::vector<FlightLog> logs = load_logs(ev_files, ev_dir, ev_omega_max, ev_rate);
        const Dataset ds = build_dataset(logs, ev_split_seed);
        std::vector<Sequence> data;
        if (ev_split == "test") data = ds.test;
        else if (ev_split == "train") data = ds.train;
        else if (ev_split == "all") {
            data = ds.train;
            data.insert(data.end(), ds.test.begin(), ds.test.end());
        } else {
            throw DomainError("--split must be test|train|all");
        }
        std::cout << "rmse_m," << fmt12(evaluate(net, data)) << '\n';
        return 0;
    }

    if (fu->parsed()) {
        const MnnNetwork net = load_model(fs::path(fu_model));
        ParseOptions opts;
        opts.raw_rpm_omega_max = fu_omega_max;
        FlightLog log = parse_flight_log(fs::path(fu_data), opts);
        if (fu_rate > 0.0) log = resample(log, fu_rate);
        ReplayConfig cfg;
        cfg.meas_sigma_m = Eigen::Vector3d::Constant(fu_sigma);
        cfg.gps_divisor = fu_gps_div;
        cfg.accel_noise_sigma = fu_imu_noise;
        cfg.noise_seed = fu_seed;
        if (fu_feedback == "pred") cfg.feedback = FeedbackMode::Prediction;
        else if (fu_feedback == "fused") cfg.feedback = FeedbackMode::Fused;
        else throw DomainError("--feedback must be pred|fused");
        const FusionReport report = replay(log, net, parse_origin(fu_origin), cfg);
        write_fusion_csv(report, fs::path(fu_out));
        std::cout << "rmse_pred_m," << fmt12(report.rmse_pred) << '\n';
        std::cout << "rmse_fused_m," << fmt12(report.rmse_fused) << '\n';
        std::cout << "rejected," << report.rejected_count << '\n';
        return 0;
    }

    if (cv->parsed()) {
        const GeodeticCoord origin = parse_origin(cv_origin);
        std::string line;
        while (std::getline(std::cin, line)) {
            for (char& ch : line) {
                if (ch == ',') ch = ' ';
            }
            std::stringstream ss(line);
            double a, b, c;
            if (!(ss >> a >> b >> c)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                throw DomainError("convert: cannot parse triple '" + line + "'");
            }
            if (cv_dir_flag == "enu2geo") {
                const GeodeticCoord g = enu_to_geodetic(EnuCoord{a, b, c}, origin);
                std::cout << fmt12(g.lat_rad / kDegree) << ' ' << fmt12(g.lon_rad / kDegree)
                          << ' ' << fmt12(g.alt_m) << '\n';
            } else if (cv_dir_flag == "geo2ecef") {
                const EcefCoord e = geodetic_to_ecef({a * kDegree, b * kDegree, c});
                std::cout << fmt12(e.x) << ' ' << fmt12(e.y) << ' ' << fmt12(e.z) << '\n';
            } else if (cv_dir_flag == "ecef2geo") {
                const GeodeticCoord g = ecef_to_geodetic({a, b, c});
                std::cout << fmt12(g.lat_rad / kDegree) << ' ' << fmt12(g.lon_rad / kDegree)
                          << ' ' << fmt12(g.alt_m) << '\n';
            } else {
                throw DomainError("--direction must be enu2geo|geo2ecef|ecef2geo");
            }
        }
        return 0;
    }

    if (pd->parsed()) {
        std::ifstream in(pd_in);
        if (!in) throw Error("cannot open " + pd_in);
        std::string line;
        if (pd_kind == "loss") {
            bool saw_header = false;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (!saw_header) {
                    if (line != "epoch,loss") throw DomainError("not a loss table: " + pd_in);
                    saw_header = true;
                }
                std::cout << line << '\n';
            }
            if (!saw_header) throw DomainError("not a loss table: " + pd_in);
        } else if (pd_kind == "trajectory") {
            bool saw_header = false;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (!saw_header) {
                    if (line.rfind("t,truth_x", 0) != 0) {
                        throw DomainError("not a trajectory table: " + pd_in);
                    }
                    saw_header = true;
                }
                std::cout << line << '\n';
            }
            if (!saw_header) throw DomainError("not a trajectory table: " + pd_in);
        } else {
            throw DomainError("--kind must be loss|trajectory");
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
