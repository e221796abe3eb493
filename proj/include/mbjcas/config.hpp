#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mbjcas/types.hpp"

namespace mbjcas {

// All boundary units are human-facing: degrees, dBm, Hz, meters, seconds.
// Conversion to radians and linear power happens once, in the consumers.

struct ArraySection {
    int num_elements = 16;
    double element_spacing = 0.5;
    int grid_points_per_element = 10; // direction grid size K = this * num_elements
};

struct OfdmSection {
    int subcarriers = 128;
    double bandwidth_hz = 1e8;
    double cp_fraction = 0.25; // cyclic prefix duration as a fraction of the block
};

struct FrameSection {
    int n_t = 8;
    int n_r = 5;
    int n_d = 12;
    int symbols_per_packet = 60;
    double packet_period_s = 0.0; // 0 selects back-to-back packets
};

struct PathSpec {
    double distance_m = 10.0;
    double aoa_deg = 0.0;
    double speed_mps = 0.0;
    double phase_rad = 0.0;
};

struct ScenarioSection {
    int scatterer_count = 12;
    double min_distance_m = 1.0;
    double max_distance_m = 30.0;
    double aoa_range_deg = 60.0; // scatterers uniform in [-range, range]
    double speed_min_mps = -40.0;
    double speed_max_mps = 40.0;
    double pathloss_exponent = 4.0;
    double tx_power_dbm = 25.0;
    double noise_power_dbm = -94.0;
    double carrier_hz = 24e9;
    std::vector<PathSpec> explicit_paths; // overrides the generator when non-empty
};

struct CombineSection {
    double rho = 0.5;
    int method = 1; // 1 separated, 2 joint
    double comm_direction_deg = 0.0;
    int comm_shape_elements = 16;
    int sensing_shape_elements = 12;
    double scan_min_deg = -60.0;
    double scan_max_deg = 60.0;
    std::string reference_weighting = "identity"; // or "exp_taper"
    double taper_decay = 15.0;
};

struct SensingSection {
    int interpolation_factor = 2;
    int max_sparsity = 16;
    double residual_tol = 3e-4;
    double threshold_margin = 0.5;
    double floor_db = -10.0;
    double max_range_m = 35.0;
};

struct ExperimentSection {
    int monte_carlo_seeds = 20;
    int nlos_paths = 4;
    double nlos_power_ratio_db = 10.0; // LOS power over total NLOS power
    double comm_spread_deg = 33.0;     // full width of the comm multipath sector
    int capacity_grid = 100;
};

struct RootConfig {
    ArraySection array;
    OfdmSection ofdm;
    FrameSection frame;
    ScenarioSection scenario;
    CombineSection combine;
    SensingSection sensing;
    ExperimentSection experiment;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Parses and validates a config file; missing fields take the defaults above.
RootConfig load_config(const std::filesystem::path& path);

RootConfig config_from_json_text(const std::string& text);

/// Canonical serialization: sorted keys, two-space indent, exact doubles.
std::string config_to_json_text(const RootConfig& config);

void save_config(const RootConfig& config, const std::filesystem::path& path);

/// FNV-1a of the canonical serialization; stable across runs and platforms.
std::uint64_t config_hash(const RootConfig& config);

/// Applies the MBJCAS_SEED environment override, when set.
void apply_seed_env_override(RootConfig& config);

} // namespace mbjcas
