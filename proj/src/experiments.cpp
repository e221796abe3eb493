#include "mbjcas/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "mbjcas/csv.hpp"
#include "mbjcas/dsp.hpp"
#include "mbjcas/rng.hpp"
#include "mbjcas/svg.hpp"

namespace mbjcas {

namespace {

constexpr std::uint64_t kCommChannelTag = 0x636f6d6dULL;
constexpr std::uint64_t kSceneTag = 0x7363656eULL;

OfdmParams ofdm_from(const RootConfig& cfg) {
    OfdmParams ofdm;
    ofdm.subcarriers = cfg.ofdm.subcarriers;
    ofdm.bandwidth_hz = cfg.ofdm.bandwidth_hz;
    ofdm.cp_duration_s = cfg.ofdm.cp_fraction * cfg.ofdm.subcarriers / cfg.ofdm.bandwidth_hz;
    return ofdm;
}

FramePlan frame_from(const RootConfig& cfg) {
    FramePlan frame = FramePlan::defaults(ofdm_from(cfg));
    frame.n_t = cfg.frame.n_t;
    frame.n_r = cfg.frame.n_r;
    frame.n_d = cfg.frame.n_d;
    frame.symbols_per_packet = cfg.frame.symbols_per_packet;
    frame.packet_period_s = cfg.frame.packet_period_s > 0.0
                                ? cfg.frame.packet_period_s
                                : frame.symbols_per_packet * frame.ofdm.symbol_period();
    frame.validate();
    return frame;
}

double equivalent_of_angle(const ArrayConfig& array, double theta_rad) {
    return 2.0 * array.element_spacing * std::sin(theta_rad);
}

double actual_of_equivalent(const ArrayConfig& array, double u) {
    return equivalent_to_actual(u / (2.0 * array.element_spacing));
}

Eigen::VectorXd pattern_db(const BeamVector& beam, const ResponseMatrix& response,
                           double floor_db = -80.0) {
    const Eigen::VectorXd mag = radiation_pattern(beam.coeffs(), response).cwiseAbs();
    Eigen::VectorXd db(mag.size());
    for (Eigen::Index i = 0; i < mag.size(); ++i)
        db(i) = mag(i) > 0.0 ? std::max(20.0 * std::log10(mag(i)), floor_db) : floor_db;
    return db;
}

Scenario scenario_from(const RootConfig& cfg, std::uint64_t scene_seed) {
    Scenario scenario;
    scenario.tx_power_dbm = cfg.scenario.tx_power_dbm;
    scenario.noise_power_dbm = cfg.scenario.noise_power_dbm;
    scenario.pathloss_exponent = cfg.scenario.pathloss_exponent;
    scenario.carrier_hz = cfg.scenario.carrier_hz;
    scenario.rng_seed = scene_seed;
    if (!cfg.scenario.explicit_paths.empty()) {
        for (const PathSpec& p : cfg.scenario.explicit_paths) {
            Multipath m;
            m.amplitude = std::polar(
                std::sqrt(pathloss(p.distance_m, cfg.scenario.pathloss_exponent)), p.phase_rad);
            m.delay_s = 2.0 * p.distance_m / kSpeedOfLight;
            m.doppler_hz = doppler_from_speed(p.speed_mps, cfg.scenario.carrier_hz);
            m.aod_rad = deg_to_rad(p.aoa_deg);
            m.aoa_rad = m.aod_rad;
            scenario.paths.push_back(m);
        }
    } else {
        scenario.paths = generate_scatterers(
            scene_seed, cfg.scenario.scatterer_count, cfg.scenario.min_distance_m,
            cfg.scenario.max_distance_m, deg_to_rad(cfg.scenario.aoa_range_deg),
            cfg.scenario.speed_min_mps, cfg.scenario.speed_max_mps,
            cfg.scenario.pathloss_exponent, cfg.scenario.carrier_hz);
    }
    return scenario;
}

// Weakest on-coverage response level over probe directions: for each probe,
// the best (transmit gain x receive gain) any slice offers, times tx power.
// Thresholds anchor on this so beam-edge targets still clear the margin.
double worst_case_level(const MmvProblem& problem, const std::vector<BeamVector>& tx_beams,
                        const ArrayConfig& array, double tx_power_mw, double u_lo, double u_hi) {
    constexpr int kProbes = 33;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kProbes; ++i) {
        const double u = u_lo + (u_hi - u_lo) * i / (kProbes - 1);
        const Eigen::VectorXcd a = equivalent_response(array.num_elements, u);
        double level = 0.0;
        for (int s = 0; s < problem.slice_count(); ++s) {
            const BeamVector& w_t =
                tx_beams[static_cast<std::size_t>(problem.packet_of_slice[static_cast<std::size_t>(s)] - 1)];
            const BeamVector w_r(
                equivalent_response(array.num_elements,
                                    problem.slot_directions[static_cast<std::size_t>(s)])
                    .conjugate());
            const double tx_gain = std::norm(cd(a.transpose() * w_t.coeffs()));
            const double rx_gain = std::norm(cd(a.transpose() * w_r.coeffs()));
            level = std::max(level, tx_power_mw * tx_gain * rx_gain);
        }
        worst = std::min(worst, level);
    }
    return worst;
}

double min_adjacent_spacing(std::vector<double> values, double fallback) {
    if (values.size() < 2) return fallback;
    std::sort(values.begin(), values.end());
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < values.size(); ++i)
        spacing = std::min(spacing, values[i] - values[i - 1]);
    return spacing;
}

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

BeamSet build_beam_set(const RootConfig& cfg) {
    cfg.validate();
    BeamSet set{.array = {cfg.array.num_elements, cfg.array.element_spacing},
                .grid = DirectionGrid::full_view(cfg.array.grid_points_per_element *
                                                 cfg.array.num_elements),
                .response = {},
                .comm_direction_u = 0.0,
                .subbeam_width_u = 0.0,
                .comm_reference = BeamVector(Eigen::VectorXcd::Ones(cfg.array.num_elements)),
                .sensing_reference = BeamVector(Eigen::VectorXcd::Ones(cfg.array.num_elements)),
                .comm_subbeam = BeamVector(Eigen::VectorXcd::Ones(cfg.array.num_elements)),
                .scan_deltas = {},
                .scan_directions_u = {},
                .sensing_subbeams = {},
                .multibeams_method1 = {},
                .multibeams_method2 = {}};
    set.response = equivalent_response_matrix(set.array, set.grid);

    const WeightMatrix weighting =
        cfg.combine.reference_weighting == "exp_taper"
            ? WeightMatrix::exponential_taper(set.grid.size, cfg.combine.taper_decay)
            : WeightMatrix::identity(set.grid.size);
    set.comm_reference =
        reference_subbeam(set.array, set.grid, cfg.combine.comm_shape_elements, weighting);
    set.sensing_reference =
        reference_subbeam(set.array, set.grid, cfg.combine.sensing_shape_elements, weighting);

    const double u_comm = equivalent_of_angle(set.array, deg_to_rad(cfg.combine.comm_direction_deg));
    const int delta_comm = static_cast<int>(std::lround(u_comm / set.grid.step));
    set.comm_direction_u = delta_comm * set.grid.step;
    set.comm_subbeam = displace(set.comm_reference, delta_comm, set.grid);
    set.subbeam_width_u =
        2.0 * std::sin(half_power_beamwidth(cfg.combine.sensing_shape_elements) / 2.0);

    set.scan_deltas = scan_schedule(equivalent_of_angle(set.array, deg_to_rad(cfg.combine.scan_min_deg)),
                                    equivalent_of_angle(set.array, deg_to_rad(cfg.combine.scan_max_deg)),
                                    cfg.combine.sensing_shape_elements, cfg.frame.n_t, set.grid);
    const WeightMatrix identity = WeightMatrix::identity(set.grid.size);
    for (int delta : set.scan_deltas) {
        set.scan_directions_u.push_back(delta * set.grid.step);
        set.sensing_subbeams.push_back(displace(set.sensing_reference, delta, set.grid));
    }
    CombineSpec spec1{cfg.combine.rho, set.comm_direction_u, CombineMethod::Separated};
    CombineSpec spec2{cfg.combine.rho, set.comm_direction_u, CombineMethod::Joint};
    for (const BeamVector& w_s : set.sensing_subbeams) {
        set.multibeams_method1.push_back(combine_method1(set.comm_subbeam, w_s, spec1));
        set.multibeams_method2.push_back(
            combine_method2(set.comm_subbeam, w_s, spec2, set.response, identity).weights);
    }
    return set;
}

std::vector<Multipath> generate_comm_channel(std::uint64_t seed, double comm_aod_rad,
                                             int nlos_paths, double spread_rad,
                                             double power_ratio_db) {
    Rng rng(derive_seed(seed, {kCommChannelTag}));
    std::vector<Multipath> paths;
    Multipath los;
    los.amplitude = cd{1.0, 0.0};
    los.aod_rad = comm_aod_rad;
    los.aoa_rad = comm_aod_rad;
    paths.push_back(los);
    if (nlos_paths > 0) {
        const double per_path_power = db_to_linear(-power_ratio_db) / nlos_paths;
        for (int i = 0; i < nlos_paths; ++i) {
            Multipath p;
            p.aod_rad = comm_aod_rad + rng.uniform(-spread_rad / 2.0, spread_rad / 2.0);
            p.aoa_rad = comm_aod_rad + rng.uniform(-spread_rad / 2.0, spread_rad / 2.0);
            p.amplitude = rng.complex_gaussian(per_path_power);
            paths.push_back(p);
        }
    }
    return paths;
}

double received_power_mrc(const std::vector<Multipath>& paths, const BeamVector& w_t,
                          const ArrayConfig& array) {
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(array.num_elements);
    for (const Multipath& p : paths) {
        const cd tx_gain = steering_vector(array, p.aod_rad).transpose() * w_t.coeffs();
        h += p.amplitude * tx_gain * steering_vector(array, p.aoa_rad);
    }
    return h.squaredNorm();
}

SceneResult run_sensing_scene(const RootConfig& cfg, const BeamSet& beams,
                              std::uint64_t scene_seed, bool noise_on, Exec exec) {
    const FramePlan frame = frame_from(cfg);
    const Scenario scenario = scenario_from(cfg, scene_seed);
    const RxScanPlan rx_plan = build_rx_scan_plan(beams.comm_direction_u, beams.scan_directions_u,
                                                  beams.subbeam_width_u, frame.n_r);
    const std::vector<BeamVector>& tx_beams = beams.multibeams(cfg.combine.method);
    const MeasurementTensor tensor =
        collect_measurements(scenario, frame, beams.array, tx_beams, rx_plan, noise_on, exec);

    const DelayDictionary dict =
        build_dictionary(frame.ofdm.subcarriers, cfg.sensing.interpolation_factor);
    const double tx_power_mw = dbm_to_mw(cfg.scenario.tx_power_dbm);
    const double lattice_spacing =
        min_adjacent_spacing(beams.scan_directions_u, beams.subbeam_width_u);

    SceneResult scene;
    scene.truth = scenario.paths;
    scene.carrier_hz = cfg.scenario.carrier_hz;
    scene.element_spacing = cfg.array.element_spacing;

    MmvOmpOptions omp_options;
    omp_options.max_sparsity = cfg.sensing.max_sparsity;
    omp_options.residual_tol = cfg.sensing.residual_tol;
    omp_options.exec = exec;

    auto solve_problem = [&](const MmvProblem& problem, double u_lo, double u_hi) {
        const SparseSolution solution = mmv_omp(problem, dict, omp_options);
        if (solution.support.empty()) return;
        const ProblemLambda lambda =
            per_slice_lambda(solution, problem.slice_count(), problem.cols_per_slice);
        const double level =
            worst_case_level(problem, tx_beams, beams.array, tx_power_mw, u_lo, u_hi);
        const std::vector<double> eta = delay_thresholds(
            dict, frame.ofdm.bandwidth_hz, level, 1.0, cfg.scenario.pathloss_exponent,
            cfg.sensing.threshold_margin, cfg.sensing.max_range_m);
        const std::vector<int> detected = detect_delays(lambda, eta);
        const std::vector<TargetEstimate> estimates = associate_aoa(
            lambda, detected, problem, dict, frame.ofdm.bandwidth_hz, frame.n_r,
            frame.ofdm.symbol_period(), cfg.scenario.carrier_hz, eta,
            beams.array.element_spacing);
        scene.cs_estimates.insert(scene.cs_estimates.end(), estimates.begin(), estimates.end());
    };

    for (int packet = 1; packet <= frame.n_t; ++packet) {
        const MmvProblem problem = mmv_stack_sensing(tensor, packet, rx_plan);
        const double center = beams.scan_directions_u[static_cast<std::size_t>(packet - 1)];
        solve_problem(problem, center - lattice_spacing / 2.0, center + lattice_spacing / 2.0);
    }
    if (frame.n_r >= 2) {
        double nearest = std::numeric_limits<double>::infinity();
        for (double u : beams.scan_directions_u)
            nearest = std::min(nearest, std::abs(u - beams.comm_direction_u));
        const double gap_half =
            std::max(nearest - lattice_spacing / 2.0, beams.subbeam_width_u / 4.0);
        try {
            const MmvProblem problem =
                mmv_stack_comm(tensor, rx_plan, beams.scan_directions_u, beams.comm_direction_u,
                               beams.subbeam_width_u);
            solve_problem(problem, beams.comm_direction_u - gap_half,
                          beams.comm_direction_u + gap_half);
        } catch (const ValidationError&) {
            // every packet excluded: scanning hugs the comm direction, skip combination 2
        }
    }
    if (!scene.cs_estimates.empty())
        postprocess_estimates(scene.cs_estimates, cfg.scenario.pathloss_exponent,
                              cfg.sensing.floor_db);

    // DFT pipeline: per-slice delay profiles over receive directions, plus the
    // aggregated delay-Doppler view.
    const int n = frame.ofdm.subcarriers;
    const int total_slices = frame.n_t * frame.n_r;
    scene.dft_map.resize(n, total_slices);
    scene.map_slot_directions.resize(static_cast<std::size_t>(total_slices));
    std::vector<Eigen::MatrixXd> doppler_maps(static_cast<std::size_t>(total_slices));

#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
    for (int s = 0; s < total_slices; ++s) {
        const int packet = s / frame.n_r + 1;
        const int slot = s % frame.n_r + 1;
        const Eigen::MatrixXcd& y = tensor.slice(packet, slot);
        // periodogram-style delay profile: mean squared magnitude, so the
        // pathloss compensation downstream works in the power domain
        Eigen::VectorXd profile = Eigen::VectorXd::Zero(n);
        for (int c = 0; c < frame.n_d; ++c) {
            std::vector<cd> col(y.col(c).data(), y.col(c).data() + n);
            const std::vector<cd> delay = dft(col, true);
            for (int r = 0; r < n; ++r) profile(r) += std::norm(delay[static_cast<std::size_t>(r)]);
        }
        scene.dft_map.col(s) = profile / frame.n_d;
        scene.map_slot_directions[static_cast<std::size_t>(s)] =
            rx_plan.directions[static_cast<std::size_t>(packet - 1)][static_cast<std::size_t>(slot - 1)];
        doppler_maps[static_cast<std::size_t>(s)] = dft_delay_doppler(y);
    }
    scene.delay_doppler = aggregate_maps(doppler_maps);

    scene.map_distances.resize(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r)
        scene.map_distances[static_cast<std::size_t>(r)] =
            r / frame.ofdm.bandwidth_hz * kSpeedOfLight / 2.0;
    scene.dft_map_post = postprocess_map(scene.dft_map, scene.map_distances,
                                         cfg.scenario.pathloss_exponent, cfg.sensing.floor_db,
                                         cfg.sensing.max_range_m);

    // Local maxima of the post-processed map become the DFT estimates.
    for (int r = 0; r < scene.dft_map_post.rows(); ++r) {
        for (int c = 0; c < scene.dft_map_post.cols(); ++c) {
            const double v = scene.dft_map_post(r, c);
            if (v <= cfg.sensing.floor_db + 1e-9) continue;
            bool is_peak = true;
            for (int dr = -1; dr <= 1 && is_peak; ++dr)
                for (int dc = -1; dc <= 1 && is_peak; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int rr = r + dr;
                    const int cc = c + dc;
                    if (rr < 0 || rr >= scene.dft_map_post.rows() || cc < 0 ||
                        cc >= scene.dft_map_post.cols())
                        continue;
                    if (scene.dft_map_post(rr, cc) > v) is_peak = false;
                }
            if (!is_peak) continue;
            TargetEstimate est;
            est.bin = r;
            est.distance_m = scene.map_distances[static_cast<std::size_t>(r)];
            est.aoa_rad = actual_of_equivalent(
                beams.array, scene.map_slot_directions[static_cast<std::size_t>(c)]);
            est.speed_mps = 0.0; // Doppler bins are too coarse to resolve
            est.power = scene.dft_map(r, c);
            est.power_db = v;
            scene.dft_estimates.push_back(est);
        }
    }
    return scene;
}

namespace {

struct MatchResult {
    int matched = 0;
    double sum_sq_distance = 0.0;
    double sum_speed_err = 0.0;
    double sum_u_err = 0.0;
};

MatchResult match_estimates(const std::vector<Multipath>& truth,
                            const std::vector<TargetEstimate>& estimates, const ArrayConfig& array,
                            double carrier_hz, const MatchGates& gates, bool check_speed) {
    MatchResult result;
    for (const Multipath& t : truth) {
        const double d_true = t.delay_s * kSpeedOfLight / 2.0;
        const double u_true = 2.0 * array.element_spacing * std::sin(t.aoa_rad);
        const double v_true = speed_from_doppler(t.doppler_hz, carrier_hz);
        double best_dd = std::numeric_limits<double>::infinity();
        const TargetEstimate* best = nullptr;
        for (const TargetEstimate& e : estimates) {
            const double dd = std::abs(e.distance_m - d_true);
            const double du = std::abs(2.0 * array.element_spacing * std::sin(e.aoa_rad) - u_true);
            const double dv = std::abs(e.speed_mps - v_true);
            if (dd > gates.distance_m || du > gates.u_sin) continue;
            if (check_speed && dv > gates.speed_mps) continue;
            if (dd < best_dd) {
                best_dd = dd;
                best = &e;
            }
        }
        if (!best) continue;
        result.matched += 1;
        result.sum_sq_distance += best_dd * best_dd;
        result.sum_speed_err += std::abs(best->speed_mps - v_true);
        result.sum_u_err +=
            std::abs(2.0 * array.element_spacing * std::sin(best->aoa_rad) - u_true);
    }
    return result;
}

} // namespace

SceneMetrics evaluate_scene(const SceneResult& scene, const MatchGates& tight_gates) {
    SceneMetrics metrics;
    metrics.true_count = static_cast<int>(scene.truth.size());
    const ArrayConfig array{2, scene.element_spacing}; // only the spacing matters for matching
    const double carrier = scene.carrier_hz;

    const MatchResult tight = match_estimates(scene.truth, scene.cs_estimates, array, carrier,
                                              tight_gates, /*check_speed=*/true);
    metrics.cs_detected_within_gates = tight.matched;
    if (tight.matched > 0) {
        metrics.mean_speed_error = tight.sum_speed_err / tight.matched;
        metrics.mean_u_error = tight.sum_u_err / tight.matched;
    }

    const MatchGates loose{3.0, 0.15, 1e12};
    const MatchResult cs_loose = match_estimates(scene.truth, scene.cs_estimates, array, carrier,
                                                 loose, /*check_speed=*/false);
    const MatchResult dft_loose = match_estimates(scene.truth, scene.dft_estimates, array, carrier,
                                                  loose, /*check_speed=*/false);
    metrics.cs_matched_loose = cs_loose.matched;
    metrics.dft_matched_loose = dft_loose.matched;
    if (cs_loose.matched > 0)
        metrics.rms_distance_cs = std::sqrt(cs_loose.sum_sq_distance / cs_loose.matched);
    if (dft_loose.matched > 0)
        metrics.rms_distance_dft = std::sqrt(dft_loose.sum_sq_distance / dft_loose.matched);
    return metrics;
}

namespace {

void emit_pattern_family(const std::filesystem::path& path, const DirectionGrid& grid,
                         const std::string& header, const std::vector<Eigen::VectorXd>& columns) {
    CsvWriter csv(path);
    csv.header(header);
    for (int q = 0; q < grid.size; ++q) {
        std::vector<double> row{grid.direction(q)};
        for (const auto& col : columns) row.push_back(col(q));
        csv.row(row);
    }
}

void emit_weights(const std::filesystem::path& path, const std::vector<BeamVector>& beams) {
    CsvWriter csv(path);
    csv.header("beam,element,real,imag");
    for (std::size_t b = 0; b < beams.size(); ++b)
        for (int m = 0; m < beams[b].size(); ++m)
            csv.row({static_cast<double>(b), static_cast<double>(m), beams[b].coeffs()(m).real(),
                     beams[b].coeffs()(m).imag()});
}

} // namespace

RunReport run_beams_experiment(const RootConfig& cfg, const std::filesystem::path& out_dir,
                               bool plots) {
    const auto start = std::chrono::steady_clock::now();
    ensure_dir(out_dir);
    RunReport report;
    report.name = "beams";
    report.seed = cfg.seed;
    report.config_hash = config_hash(cfg);

    const BeamSet beams = build_beam_set(cfg);
    const DirectionGrid& grid = beams.grid;
    const ResponseMatrix& response = beams.response;

    // Reference construction curves: conventional source pattern, ILS outputs
    // with identity and exponential-taper weighting.
    {
        ArrayConfig shape{cfg.combine.sensing_shape_elements, cfg.array.element_spacing};
        const ResponseMatrix shape_response = equivalent_response_matrix(shape, grid);
        const BeamVector uniform(Eigen::VectorXcd::Ones(shape.num_elements));
        const WeightMatrix identity = WeightMatrix::identity(grid.size);
        const WeightMatrix taper = WeightMatrix::exponential_taper(grid.size, cfg.combine.taper_decay);
        const BeamVector ils_identity =
            reference_subbeam(beams.array, grid, shape.num_elements, identity);
        const BeamVector ils_taper = reference_subbeam(beams.array, grid, shape.num_elements, taper);
        emit_pattern_family(out_dir / "reference_sensing.csv", grid,
                            "u,conventional_db,ils_identity_db,ils_taper_db",
                            {pattern_db(uniform, shape_response), pattern_db(ils_identity, response),
                             pattern_db(ils_taper, response)});
        report.files.push_back("reference_sensing.csv");
    }
    {
        ArrayConfig shape{cfg.combine.comm_shape_elements, cfg.array.element_spacing};
        const ResponseMatrix shape_response = equivalent_response_matrix(shape, grid);
        const BeamVector uniform(Eigen::VectorXcd::Ones(shape.num_elements));
        emit_pattern_family(out_dir / "reference_comm.csv", grid, "u,conventional_db,ils_db",
                            {pattern_db(uniform, shape_response),
                             pattern_db(beams.comm_reference, response)});
        report.files.push_back("reference_comm.csv");
    }

    // Displaced subbeams and the combined multibeams for both methods.
    {
        std::vector<Eigen::VectorXd> cols{pattern_db(beams.comm_subbeam, response)};
        std::string header = "u,comm_db";
        for (std::size_t i = 0; i < beams.sensing_subbeams.size(); ++i) {
            cols.push_back(pattern_db(beams.sensing_subbeams[i], response));
            header += ",sense" + std::to_string(i) + "_db";
        }
        emit_pattern_family(out_dir / "subbeams.csv", grid, header, cols);
        report.files.push_back("subbeams.csv");
    }
    for (int method : {1, 2}) {
        std::vector<Eigen::VectorXd> cols;
        std::string header = "u";
        const auto& set = beams.multibeams(method);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const Eigen::VectorXd db = pattern_db(set[i], response);
            cols.push_back(db);
            header += ",beam" + std::to_string(i) + "_db";
            // one waveform file per scan direction
            const std::string beam_name = "multibeam_method" + std::to_string(method) + "_beam" +
                                          std::to_string(i) + ".csv";
            emit_pattern_family(out_dir / beam_name, grid, "u,magnitude_db", {db});
            report.files.push_back(beam_name);
        }
        const std::string name = "multibeam_method" + std::to_string(method) + ".csv";
        emit_pattern_family(out_dir / name, grid, header, cols);
        emit_weights(out_dir / ("weights_method" + std::to_string(method) + ".csv"), set);
        report.files.push_back(name);
        report.files.push_back("weights_method" + std::to_string(method) + ".csv");
    }

    // Received communication power against the single-beam baseline, averaged
    // over the multipath ensemble.
    const int seeds = cfg.experiment.monte_carlo_seeds;
    const std::size_t directions = beams.scan_directions_u.size();
    std::vector<double> ratio1(directions, 0.0), ratio2(directions, 0.0);
    const double comm_aod = actual_of_equivalent(beams.array, beams.comm_direction_u);
    for (int i = 0; i < seeds; ++i) {
        const std::vector<Multipath> channel = generate_comm_channel(
            derive_seed(cfg.seed, {kCommChannelTag, static_cast<std::uint64_t>(i)}), comm_aod,
            cfg.experiment.nlos_paths, deg_to_rad(cfg.experiment.comm_spread_deg),
            cfg.experiment.nlos_power_ratio_db);
        const double base = received_power_mrc(channel, beams.comm_subbeam, beams.array);
        for (std::size_t d = 0; d < directions; ++d) {
            ratio1[d] += received_power_mrc(channel, beams.multibeams_method1[d], beams.array) / base;
            ratio2[d] += received_power_mrc(channel, beams.multibeams_method2[d], beams.array) / base;
        }
    }
    double mean1 = 0.0, mean2 = 0.0;
    {
        CsvWriter csv(out_dir / "power_ratio.csv");
        csv.header("direction_u,direction_deg,method1_ratio,method2_ratio");
        for (std::size_t d = 0; d < directions; ++d) {
            ratio1[d] /= seeds;
            ratio2[d] /= seeds;
            mean1 += ratio1[d];
            mean2 += ratio2[d];
            csv.row({beams.scan_directions_u[d],
                     rad_to_deg(actual_of_equivalent(beams.array, beams.scan_directions_u[d])),
                     ratio1[d],
                     ratio2[d]});
        }
        mean1 /= static_cast<double>(directions);
        mean2 /= static_cast<double>(directions);
        report.files.push_back("power_ratio.csv");
    }
    report.metrics["method1_mean_power_ratio"] = mean1;
    report.metrics["method2_mean_power_ratio"] = mean2;
    report.metrics["method1_over_method2"] = mean1 / mean2;

    if (plots) {
        SvgPlot plot(-1.0, 1.0, -60.0, 20.0);
        const std::vector<double> u = grid.directions();
        for (std::size_t i = 0; i < beams.multibeams_method1.size(); ++i) {
            const Eigen::VectorXd db = pattern_db(beams.multibeams_method1[i], response, -60.0);
            plot.polyline(u, std::vector<double>(db.data(), db.data() + db.size()), "steelblue");
        }
        plot.save(out_dir / "multibeam_method1.svg", "combined waveforms, method 1");
        report.files.push_back("multibeam_method1.svg");
    }

    std::sort(report.files.begin(), report.files.end());
    write_report(report, out_dir / "report.json");
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

RunReport run_sensing_experiment(const RootConfig& cfg, const std::filesystem::path& out_dir,
                                 bool plots) {
    const auto start = std::chrono::steady_clock::now();
    ensure_dir(out_dir);
    RunReport report;
    report.name = "sense";
    report.seed = cfg.seed;
    report.config_hash = config_hash(cfg);

    const BeamSet beams = build_beam_set(cfg);
    const FramePlan frame = frame_from(cfg);
    // Tight gates: one interpolated delay cell, the receive-slot spacing, 2 m/s.
    const MatchGates gates{kSpeedOfLight /
                               (2.0 * cfg.ofdm.bandwidth_hz * cfg.sensing.interpolation_factor),
                           beams.subbeam_width_u / (cfg.frame.n_r - 1), 2.0};

    const int seeds = cfg.experiment.monte_carlo_seeds;
    CsvWriter metrics_csv(out_dir / "metrics.csv");
    metrics_csv.header(
        "seed,true_count,cs_detected,cs_matched_loose,dft_matched_loose,"
        "rms_distance_cs,rms_distance_dft,mean_speed_error,mean_u_error");

    double mean_detected = 0.0, mean_rms_cs = 0.0, mean_rms_dft = 0.0;
    double mean_speed_err = 0.0, mean_u_err = 0.0;
    int rms_seeds = 0;
    SceneResult primary;
    for (int i = 0; i < seeds; ++i) {
        const std::uint64_t scene_seed =
            derive_seed(cfg.seed, {kSceneTag, static_cast<std::uint64_t>(i)});
        SceneResult scene = run_sensing_scene(cfg, beams, scene_seed, /*noise_on=*/true);
        const SceneMetrics m = evaluate_scene(scene, gates);
        metrics_csv.row({static_cast<double>(i), static_cast<double>(m.true_count),
                         static_cast<double>(m.cs_detected_within_gates),
                         static_cast<double>(m.cs_matched_loose),
                         static_cast<double>(m.dft_matched_loose), m.rms_distance_cs,
                         m.rms_distance_dft, m.mean_speed_error, m.mean_u_error});
        mean_detected += m.cs_detected_within_gates;
        mean_speed_err += m.mean_speed_error;
        mean_u_err += m.mean_u_error;
        if (m.cs_matched_loose > 0 && m.dft_matched_loose > 0) {
            mean_rms_cs += m.rms_distance_cs;
            mean_rms_dft += m.rms_distance_dft;
            rms_seeds += 1;
        }
        if (i == 0) primary = std::move(scene);
    }
    report.files.push_back("metrics.csv");
    report.metrics["mean_cs_detected"] = mean_detected / seeds;
    report.metrics["mean_speed_error"] = mean_speed_err / seeds;
    report.metrics["mean_u_error"] = mean_u_err / seeds;
    if (rms_seeds > 0) {
        report.metrics["mean_rms_distance_cs"] = mean_rms_cs / rms_seeds;
        report.metrics["mean_rms_distance_dft"] = mean_rms_dft / rms_seeds;
    }

    // Primary-seed artifacts: scenario, frame/scan plan, measurements, maps
    // and estimates.
    {
        const RxScanPlan rx_plan = build_rx_scan_plan(
            beams.comm_direction_u, beams.scan_directions_u, beams.subbeam_width_u, frame.n_r);
        nlohmann::json plan_json;
        plan_json["frame"] = {{"n_t", frame.n_t},
                              {"n_r", frame.n_r},
                              {"n_d", frame.n_d},
                              {"symbols_per_packet", frame.symbols_per_packet},
                              {"packet_period_s", frame.packet_period_s},
                              {"symbol_period_s", frame.ofdm.symbol_period()},
                              {"cycle_duration_s", frame.cycle_duration()}};
        plan_json["tx_scan_directions_u"] = beams.scan_directions_u;
        plan_json["comm_direction_u"] = beams.comm_direction_u;
        plan_json["comm_slot"] = rx_plan.comm_slot();
        plan_json["rx_directions_u"] = rx_plan.directions;
        std::ofstream out(out_dir / "frame_plan.json", std::ios::binary);
        out << plan_json.dump(2) << "\n";
        report.files.push_back("frame_plan.json");
    }
    {
        nlohmann::json scenario_json;
        nlohmann::json paths = nlohmann::json::array();
        for (const Multipath& p : primary.truth) {
            paths.push_back({{"amplitude_real", p.amplitude.real()},
                             {"amplitude_imag", p.amplitude.imag()},
                             {"delay_s", p.delay_s},
                             {"doppler_hz", p.doppler_hz},
                             {"aod_rad", p.aod_rad},
                             {"aoa_rad", p.aoa_rad}});
        }
        scenario_json["paths"] = paths;
        scenario_json["tx_power_dbm"] = cfg.scenario.tx_power_dbm;
        scenario_json["noise_power_dbm"] = cfg.scenario.noise_power_dbm;
        scenario_json["pathloss_exponent"] = cfg.scenario.pathloss_exponent;
        scenario_json["carrier_hz"] = cfg.scenario.carrier_hz;
        std::ofstream out(out_dir / "scenario.json", std::ios::binary);
        out << scenario_json.dump(2) << "\n";
        report.files.push_back("scenario.json");
    }
    {
        // Re-synthesize the primary tensor for the measurement dump.
        const Scenario scenario =
            scenario_from(cfg, derive_seed(cfg.seed, {kSceneTag, 0}));
        const RxScanPlan rx_plan = build_rx_scan_plan(
            beams.comm_direction_u, beams.scan_directions_u, beams.subbeam_width_u, frame.n_r);
        const MeasurementTensor tensor = collect_measurements(
            scenario, frame, beams.array, beams.multibeams(cfg.combine.method), rx_plan, true);
        CsvWriter csv(out_dir / "measurements.csv");
        csv.header("n_t,n_r,n_d,n,real,imag");
        for (int p = 1; p <= tensor.n_t; ++p)
            for (int s = 1; s <= tensor.n_r; ++s)
                for (int d = 1; d <= tensor.n_d; ++d)
                    for (int n = 0; n < tensor.subcarriers; ++n) {
                        const cd v = tensor.slice(p, s)(n, d - 1);
                        csv.row({static_cast<double>(p), static_cast<double>(s),
                                 static_cast<double>(d), static_cast<double>(n), v.real(),
                                 v.imag()});
                    }
        report.files.push_back("measurements.csv");
    }
    {
        CsvWriter raw(out_dir / "dft_map_raw.csv");
        CsvWriter post(out_dir / "dft_map_post.csv");
        std::string header = "distance_m";
        for (double u : primary.map_slot_directions) header += ",u_" + csv_number(u);
        raw.header(header);
        post.header(header);
        for (Eigen::Index r = 0; r < primary.dft_map.rows(); ++r) {
            std::vector<double> row_raw{primary.map_distances[static_cast<std::size_t>(r)]};
            std::vector<double> row_post{primary.map_distances[static_cast<std::size_t>(r)]};
            for (Eigen::Index c = 0; c < primary.dft_map.cols(); ++c) {
                row_raw.push_back(primary.dft_map(r, c));
                row_post.push_back(primary.dft_map_post(r, c));
            }
            raw.row(row_raw);
            post.row(row_post);
        }
        report.files.push_back("dft_map_raw.csv");
        report.files.push_back("dft_map_post.csv");
    }
    {
        CsvWriter csv(out_dir / "delay_doppler.csv");
        csv.header("delay_bin,doppler_bin,magnitude");
        for (Eigen::Index r = 0; r < primary.delay_doppler.rows(); ++r)
            for (Eigen::Index c = 0; c < primary.delay_doppler.cols(); ++c)
                csv.row({static_cast<double>(r), static_cast<double>(c), primary.delay_doppler(r, c)});
        report.files.push_back("delay_doppler.csv");
    }
    {
        CsvWriter csv(out_dir / "estimates.csv");
        csv.header("distance_m,speed_mps,aoa_deg,power_db,source");
        for (const TargetEstimate& e : primary.cs_estimates)
            csv.raw_row(csv_number(e.distance_m) + "," + csv_number(e.speed_mps) + "," +
                        csv_number(rad_to_deg(e.aoa_rad)) + "," + csv_number(e.power_db) + ",cs");
        for (const TargetEstimate& e : primary.dft_estimates)
            csv.raw_row(csv_number(e.distance_m) + "," + csv_number(e.speed_mps) + "," +
                        csv_number(rad_to_deg(e.aoa_rad)) + "," + csv_number(e.power_db) + ",dft");
        report.files.push_back("estimates.csv");
    }

    if (plots) {
        SvgPlot plot(-90.0, 90.0, 0.0, cfg.sensing.max_range_m);
        std::vector<double> tx, ty;
        for (const Multipath& p : primary.truth) {
            tx.push_back(rad_to_deg(p.aoa_rad));
            ty.push_back(p.delay_s * kSpeedOfLight / 2.0);
        }
        plot.scatter(tx, ty, "red");
        std::vector<double> ex, ey;
        for (const TargetEstimate& e : primary.cs_estimates) {
            ex.push_back(rad_to_deg(e.aoa_rad));
            ey.push_back(e.distance_m);
        }
        plot.scatter(ex, ey, "steelblue");
        plot.save(out_dir / "estimates.svg", "distance vs AoA: truth (red), estimates (blue)");
        report.files.push_back("estimates.svg");
    }

    std::sort(report.files.begin(), report.files.end());
    write_report(report, out_dir / "report.json");
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

RunReport run_capacity_sweep(const RootConfig& cfg, const std::filesystem::path& out_dir,
                             bool plots) {
    const auto start = std::chrono::steady_clock::now();
    ensure_dir(out_dir);
    RunReport report;
    report.name = "capacity";
    report.seed = cfg.seed;
    report.config_hash = config_hash(cfg);

    const int grid = cfg.experiment.capacity_grid;
    double min_ratio = std::numeric_limits<double>::infinity();
    {
        CsvWriter csv(out_dir / "capacity.csv");
        csv.header("a,snr,c_mb,c_td,ratio");
        for (int i = 0; i < grid; ++i) {
            const double a = (i + 1) / static_cast<double>(grid); // (0, 1]
            for (int j = 0; j < grid; ++j) {
                const double snr =
                    std::pow(10.0, -2.0 + 8.0 * j / static_cast<double>(grid - 1)); // 1e-2..1e6
                const CapacityPoint p = capacity_ratio(a, snr);
                csv.row({a, snr, p.c_mb, p.c_td, p.ratio});
                min_ratio = std::min(min_ratio, p.ratio);
            }
        }
        report.files.push_back("capacity.csv");
    }
    report.metrics["min_ratio"] = min_ratio;
    // The two operating points quoted for a = 1/2; kept for reference, the
    // formulas above give different values than the quoted 1.88 and 1.94.
    report.metrics["ratio_a05_snr5db"] = capacity_ratio(0.5, db_to_linear(5.0)).ratio;
    report.metrics["ratio_a05_snr10db"] = capacity_ratio(0.5, db_to_linear(10.0)).ratio;

    if (plots) {
        SvgPlot plot(-2.0, 6.0, 1.0, 3.0);
        for (double a : {0.25, 0.5, 0.75}) {
            std::vector<double> xs, ys;
            for (int j = 0; j < 200; ++j) {
                const double e = -2.0 + 8.0 * j / 199.0;
                xs.push_back(e);
                ys.push_back(capacity_ratio(a, std::pow(10.0, e)).ratio);
            }
            plot.polyline(xs, ys, "steelblue");
        }
        plot.save(out_dir / "capacity.svg", "C_MB / C_TD vs log10 snr");
        report.files.push_back("capacity.svg");
    }

    std::sort(report.files.begin(), report.files.end());
    write_report(report, out_dir / "report.json");
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<RunReport> run_all(const RootConfig& cfg, const std::filesystem::path& out_dir,
                               bool plots) {
    ensure_dir(out_dir);
    std::vector<RunReport> reports;
    reports.push_back(run_beams_experiment(cfg, out_dir / "beams", plots));
    reports.push_back(run_sensing_experiment(cfg, out_dir / "sense", plots));
    reports.push_back(run_capacity_sweep(cfg, out_dir / "capacity", plots));
    return reports;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
    nlohmann::json j;
    j["name"] = report.name;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    j["metrics"] = report.metrics;
    j["files"] = report.files;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write report: " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace mbjcas
