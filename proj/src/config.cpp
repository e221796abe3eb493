#include "mbjcas/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mbjcas/types.hpp"

namespace mbjcas {

namespace {

using nlohmann::json;

// Reads a field if present, leaving the default otherwise. Type errors are
// reported with the full field path.
template <typename T>
void get_field(const json& obj, const std::string& section, const char* key, T& value) {
    if (!obj.contains(key)) return;
    try {
        value = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(section + "." + key + ": " + e.what());
    }
}

json paths_to_json(const std::vector<PathSpec>& paths) {
    json arr = json::array();
    for (const PathSpec& p : paths) {
        arr.push_back(json{{"aoa_deg", p.aoa_deg},
                           {"distance_m", p.distance_m},
                           {"phase_rad", p.phase_rad},
                           {"speed_mps", p.speed_mps}});
    }
    return arr;
}

std::vector<PathSpec> paths_from_json(const json& arr) {
    std::vector<PathSpec> out;
    for (const json& item : arr) {
        PathSpec p;
        get_field(item, "scenario.explicit_paths", "distance_m", p.distance_m);
        get_field(item, "scenario.explicit_paths", "aoa_deg", p.aoa_deg);
        get_field(item, "scenario.explicit_paths", "speed_mps", p.speed_mps);
        get_field(item, "scenario.explicit_paths", "phase_rad", p.phase_rad);
        out.push_back(p);
    }
    return out;
}

} // namespace

void RootConfig::validate() const {
    if (array.num_elements < 2) throw ValidationError("array.num_elements must be >= 2");
    if (array.element_spacing <= 0.0) throw ValidationError("array.element_spacing must be positive");
    if (array.grid_points_per_element < 2)
        throw ValidationError("array.grid_points_per_element must be >= 2");
    if (ofdm.subcarriers < 2 || (ofdm.subcarriers & (ofdm.subcarriers - 1)) != 0)
        throw ValidationError("ofdm.subcarriers must be a power of two >= 2");
    if (ofdm.bandwidth_hz <= 0.0) throw ValidationError("ofdm.bandwidth_hz must be positive");
    if (ofdm.cp_fraction < 0.0 || ofdm.cp_fraction > 1.0)
        throw ValidationError("ofdm.cp_fraction must lie in [0, 1]");
    if (frame.n_t < 1 || frame.n_r < 2 || frame.n_d < 2)
        throw ValidationError("frame requires n_t >= 1, n_r >= 2, n_d >= 2");
    if (frame.n_r * frame.n_d > frame.symbols_per_packet)
        throw ValidationError("frame.symbols_per_packet smaller than n_r * n_d");
    const double symbol_period =
        ofdm.subcarriers / ofdm.bandwidth_hz * (1.0 + ofdm.cp_fraction);
    if (frame.packet_period_s != 0.0 &&
        frame.packet_period_s + 1e-15 < frame.symbols_per_packet * symbol_period)
        throw ValidationError("frame.packet_period_s shorter than the scheduled symbols");
    if (scenario.scatterer_count < 1) throw ValidationError("scenario.scatterer_count must be >= 1");
    if (!(0.0 < scenario.min_distance_m && scenario.min_distance_m <= scenario.max_distance_m))
        throw ValidationError("scenario distance range is invalid");
    if (scenario.pathloss_exponent <= 0.0)
        throw ValidationError("scenario.pathloss_exponent must be positive");
    if (scenario.carrier_hz <= 0.0) throw ValidationError("scenario.carrier_hz must be positive");
    const double cp_duration = ofdm.cp_fraction * ofdm.subcarriers / ofdm.bandwidth_hz;
    const double max_delay = 2.0 * scenario.max_distance_m / kSpeedOfLight;
    if (max_delay > cp_duration)
        throw ValidationError(
            "scenario.max_distance_m: round-trip delay exceeds the cyclic prefix; the "
            "frequency-domain model would be invalid");
    if (combine.rho < 0.0 || combine.rho > 1.0) throw ValidationError("combine.rho must lie in [0, 1]");
    if (combine.method != 1 && combine.method != 2)
        throw ValidationError("combine.method must be 1 or 2");
    if (std::abs(combine.comm_direction_deg) > 90.0)
        throw ValidationError("combine.comm_direction_deg outside [-90, 90]");
    if (combine.comm_shape_elements < 2 || combine.comm_shape_elements > array.num_elements)
        throw ValidationError("combine.comm_shape_elements outside [2, num_elements]");
    if (combine.sensing_shape_elements < 2 || combine.sensing_shape_elements > array.num_elements)
        throw ValidationError("combine.sensing_shape_elements outside [2, num_elements]");
    if (!(combine.scan_min_deg < combine.scan_max_deg) || combine.scan_min_deg < -90.0 ||
        combine.scan_max_deg > 90.0)
        throw ValidationError("combine scan range must be a sub-interval of [-90, 90]");
    if (combine.reference_weighting != "identity" && combine.reference_weighting != "exp_taper")
        throw ValidationError("combine.reference_weighting must be 'identity' or 'exp_taper'");
    if (combine.taper_decay <= 0.0) throw ValidationError("combine.taper_decay must be positive");
    if (sensing.interpolation_factor < 1)
        throw ValidationError("sensing.interpolation_factor must be >= 1");
    if (sensing.max_sparsity < 1) throw ValidationError("sensing.max_sparsity must be >= 1");
    if (sensing.residual_tol <= 0.0) throw ValidationError("sensing.residual_tol must be positive");
    if (sensing.threshold_margin <= 0.0)
        throw ValidationError("sensing.threshold_margin must be positive");
    if (sensing.floor_db >= 0.0) throw ValidationError("sensing.floor_db must be negative");
    if (sensing.max_range_m <= 0.0) throw ValidationError("sensing.max_range_m must be positive");
    if (experiment.monte_carlo_seeds < 1)
        throw ValidationError("experiment.monte_carlo_seeds must be >= 1");
    if (experiment.nlos_paths < 0) throw ValidationError("experiment.nlos_paths must be >= 0");
    if (experiment.comm_spread_deg <= 0.0 || experiment.comm_spread_deg > 180.0)
        throw ValidationError("experiment.comm_spread_deg outside (0, 180]");
    if (experiment.capacity_grid < 2) throw ValidationError("experiment.capacity_grid must be >= 2");
}

RootConfig config_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    if (!root.is_object()) throw ValidationError("config root must be a JSON object");

    RootConfig cfg;
    if (root.contains("array")) {
        const json& s = root.at("array");
        get_field(s, "array", "num_elements", cfg.array.num_elements);
        get_field(s, "array", "element_spacing", cfg.array.element_spacing);
        get_field(s, "array", "grid_points_per_element", cfg.array.grid_points_per_element);
    }
    if (root.contains("ofdm")) {
        const json& s = root.at("ofdm");
        get_field(s, "ofdm", "subcarriers", cfg.ofdm.subcarriers);
        get_field(s, "ofdm", "bandwidth_hz", cfg.ofdm.bandwidth_hz);
        get_field(s, "ofdm", "cp_fraction", cfg.ofdm.cp_fraction);
    }
    if (root.contains("frame")) {
        const json& s = root.at("frame");
        get_field(s, "frame", "n_t", cfg.frame.n_t);
        get_field(s, "frame", "n_r", cfg.frame.n_r);
        get_field(s, "frame", "n_d", cfg.frame.n_d);
        cfg.frame.symbols_per_packet = cfg.frame.n_r * cfg.frame.n_d;
        get_field(s, "frame", "symbols_per_packet", cfg.frame.symbols_per_packet);
        get_field(s, "frame", "packet_period_s", cfg.frame.packet_period_s);
    }
    if (root.contains("scenario")) {
        const json& s = root.at("scenario");
        get_field(s, "scenario", "scatterer_count", cfg.scenario.scatterer_count);
        get_field(s, "scenario", "min_distance_m", cfg.scenario.min_distance_m);
        get_field(s, "scenario", "max_distance_m", cfg.scenario.max_distance_m);
        get_field(s, "scenario", "aoa_range_deg", cfg.scenario.aoa_range_deg);
        get_field(s, "scenario", "speed_min_mps", cfg.scenario.speed_min_mps);
        get_field(s, "scenario", "speed_max_mps", cfg.scenario.speed_max_mps);
        get_field(s, "scenario", "pathloss_exponent", cfg.scenario.pathloss_exponent);
        get_field(s, "scenario", "tx_power_dbm", cfg.scenario.tx_power_dbm);
        get_field(s, "scenario", "noise_power_dbm", cfg.scenario.noise_power_dbm);
        get_field(s, "scenario", "carrier_hz", cfg.scenario.carrier_hz);
        if (s.contains("explicit_paths"))
            cfg.scenario.explicit_paths = paths_from_json(s.at("explicit_paths"));
    }
    if (root.contains("combine")) {
        const json& s = root.at("combine");
        get_field(s, "combine", "rho", cfg.combine.rho);
        get_field(s, "combine", "method", cfg.combine.method);
        get_field(s, "combine", "comm_direction_deg", cfg.combine.comm_direction_deg);
        get_field(s, "combine", "comm_shape_elements", cfg.combine.comm_shape_elements);
        get_field(s, "combine", "sensing_shape_elements", cfg.combine.sensing_shape_elements);
        get_field(s, "combine", "scan_min_deg", cfg.combine.scan_min_deg);
        get_field(s, "combine", "scan_max_deg", cfg.combine.scan_max_deg);
        get_field(s, "combine", "reference_weighting", cfg.combine.reference_weighting);
        get_field(s, "combine", "taper_decay", cfg.combine.taper_decay);
    }
    if (root.contains("sensing")) {
        const json& s = root.at("sensing");
        get_field(s, "sensing", "interpolation_factor", cfg.sensing.interpolation_factor);
        get_field(s, "sensing", "max_sparsity", cfg.sensing.max_sparsity);
        get_field(s, "sensing", "residual_tol", cfg.sensing.residual_tol);
        get_field(s, "sensing", "threshold_margin", cfg.sensing.threshold_margin);
        get_field(s, "sensing", "floor_db", cfg.sensing.floor_db);
        get_field(s, "sensing", "max_range_m", cfg.sensing.max_range_m);
    }
    if (root.contains("experiment")) {
        const json& s = root.at("experiment");
        get_field(s, "experiment", "monte_carlo_seeds", cfg.experiment.monte_carlo_seeds);
        get_field(s, "experiment", "nlos_paths", cfg.experiment.nlos_paths);
        get_field(s, "experiment", "nlos_power_ratio_db", cfg.experiment.nlos_power_ratio_db);
        get_field(s, "experiment", "comm_spread_deg", cfg.experiment.comm_spread_deg);
        get_field(s, "experiment", "capacity_grid", cfg.experiment.capacity_grid);
    }
    get_field(root, "", "seed", cfg.seed);

    cfg.validate();
    return cfg;
}

RootConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str());
}

std::string config_to_json_text(const RootConfig& config) {
    // json keeps keys sorted, which makes the output canonical.
    json root;
    root["array"] = {{"element_spacing", config.array.element_spacing},
                     {"grid_points_per_element", config.array.grid_points_per_element},
                     {"num_elements", config.array.num_elements}};
    root["ofdm"] = {{"bandwidth_hz", config.ofdm.bandwidth_hz},
                    {"cp_fraction", config.ofdm.cp_fraction},
                    {"subcarriers", config.ofdm.subcarriers}};
    root["frame"] = {{"n_d", config.frame.n_d},
                     {"n_r", config.frame.n_r},
                     {"n_t", config.frame.n_t},
                     {"packet_period_s", config.frame.packet_period_s},
                     {"symbols_per_packet", config.frame.symbols_per_packet}};
    root["scenario"] = {{"aoa_range_deg", config.scenario.aoa_range_deg},
                        {"carrier_hz", config.scenario.carrier_hz},
                        {"explicit_paths", paths_to_json(config.scenario.explicit_paths)},
                        {"max_distance_m", config.scenario.max_distance_m},
                        {"min_distance_m", config.scenario.min_distance_m},
                        {"noise_power_dbm", config.scenario.noise_power_dbm},
                        {"pathloss_exponent", config.scenario.pathloss_exponent},
                        {"scatterer_count", config.scenario.scatterer_count},
                        {"speed_max_mps", config.scenario.speed_max_mps},
                        {"speed_min_mps", config.scenario.speed_min_mps},
                        {"tx_power_dbm", config.scenario.tx_power_dbm}};
    root["combine"] = {{"comm_direction_deg", config.combine.comm_direction_deg},
                       {"comm_shape_elements", config.combine.comm_shape_elements},
                       {"method", config.combine.method},
                       {"reference_weighting", config.combine.reference_weighting},
                       {"rho", config.combine.rho},
                       {"scan_max_deg", config.combine.scan_max_deg},
                       {"scan_min_deg", config.combine.scan_min_deg},
                       {"sensing_shape_elements", config.combine.sensing_shape_elements},
                       {"taper_decay", config.combine.taper_decay}};
    root["sensing"] = {{"floor_db", config.sensing.floor_db},
                       {"interpolation_factor", config.sensing.interpolation_factor},
                       {"max_range_m", config.sensing.max_range_m},
                       {"max_sparsity", config.sensing.max_sparsity},
                       {"residual_tol", config.sensing.residual_tol},
                       {"threshold_margin", config.sensing.threshold_margin}};
    root["experiment"] = {{"capacity_grid", config.experiment.capacity_grid},
                          {"comm_spread_deg", config.experiment.comm_spread_deg},
                          {"monte_carlo_seeds", config.experiment.monte_carlo_seeds},
                          {"nlos_paths", config.experiment.nlos_paths},
                          {"nlos_power_ratio_db", config.experiment.nlos_power_ratio_db}};
    root["seed"] = config.seed;
    return root.dump(2) + "\n";
}

void save_config(const RootConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write config file: " + path.string());
    out << config_to_json_text(config);
}

std::uint64_t config_hash(const RootConfig& config) {
    const std::string text = config_to_json_text(config);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

void apply_seed_env_override(RootConfig& config) {
    if (const char* env = std::getenv("MBJCAS_SEED")) {
        try {
            config.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ValidationError("MBJCAS_SEED must be an unsigned integer");
        }
    }
}

} // namespace mbjcas
