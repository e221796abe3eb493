#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mbjcas/beamforming.hpp"
#include "mbjcas/config.hpp"
#include "mbjcas/protocol.hpp"
#include "mbjcas/sensing.hpp"

namespace mbjcas {

/// Outcome of one experiment run. Wall time is printed by the CLI but never
/// serialized, so output trees stay byte-identical across runs.
struct RunReport {
    std::string name;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::map<std::string, double> metrics;
    std::vector<std::string> files;
    double wall_seconds = 0.0;
};

/// Every beam the runners need, derived once from the configuration.
struct BeamSet {
    ArrayConfig array;
    DirectionGrid grid;
    ResponseMatrix response;
    double comm_direction_u = 0.0;        // grid-quantized communication direction
    double subbeam_width_u = 0.0;         // sensing subbeam 3 dB width in the sin-domain
    BeamVector comm_reference;            // shaped communication beam at u = 0
    BeamVector sensing_reference;         // shaped sensing beam at u = 0
    BeamVector comm_subbeam;              // displaced to the communication direction
    std::vector<int> scan_deltas;
    std::vector<double> scan_directions_u;
    std::vector<BeamVector> sensing_subbeams;
    std::vector<BeamVector> multibeams_method1;
    std::vector<BeamVector> multibeams_method2;

    const std::vector<BeamVector>& multibeams(int method) const {
        return method == 2 ? multibeams_method2 : multibeams_method1;
    }
};

BeamSet build_beam_set(const RootConfig& config);

/// Communication multipath ensemble: one line-of-sight path plus Gaussian
/// non-LOS paths confined to a sector, scaled to the configured power ratio.
std::vector<Multipath> generate_comm_channel(std::uint64_t seed, double comm_aod_rad,
                                             int nlos_paths, double spread_rad,
                                             double power_ratio_db);

/// Received power after maximal-ratio combining at the receive array.
double received_power_mrc(const std::vector<Multipath>& paths, const BeamVector& w_t,
                          const ArrayConfig& array);

/// One synthesized scene pushed through both estimation pipelines.
struct SceneResult {
    std::vector<Multipath> truth;
    std::vector<TargetEstimate> cs_estimates;
    std::vector<TargetEstimate> dft_estimates;
    Eigen::MatrixXd dft_map;       // delay power profile per receive slot (raw)
    Eigen::MatrixXd dft_map_post;  // post-processed
    Eigen::MatrixXd delay_doppler; // aggregated 2D map
    std::vector<double> map_slot_directions;
    std::vector<double> map_distances;
    double carrier_hz = 24e9;
    double element_spacing = 0.5;
};

SceneResult run_sensing_scene(const RootConfig& config, const BeamSet& beams,
                              std::uint64_t scene_seed, bool noise_on,
                              Exec exec = Exec::Parallel);

struct MatchGates {
    double distance_m = 0.75;
    double u_sin = 0.05;
    double speed_mps = 2.0;
};

struct SceneMetrics {
    int true_count = 0;
    int cs_detected_within_gates = 0; // truths matched by CS inside all tight gates
    int cs_matched_loose = 0;
    int dft_matched_loose = 0;
    double rms_distance_cs = 0.0;  // over loosely matched truths
    double rms_distance_dft = 0.0;
    double mean_speed_error = 0.0; // over tight CS matches
    double mean_u_error = 0.0;
};

SceneMetrics evaluate_scene(const SceneResult& scene, const MatchGates& tight_gates);

RunReport run_beams_experiment(const RootConfig& config, const std::filesystem::path& out_dir,
                               bool plots = false);
RunReport run_sensing_experiment(const RootConfig& config, const std::filesystem::path& out_dir,
                                 bool plots = false);
RunReport run_capacity_sweep(const RootConfig& config, const std::filesystem::path& out_dir,
                             bool plots = false);
std::vector<RunReport> run_all(const RootConfig& config, const std::filesystem::path& out_dir,
                               bool plots = false);

void write_report(const RunReport& report, const std::filesystem::path& path);

} // namespace mbjcas
