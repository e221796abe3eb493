#include "mbjcas/channel.hpp"

#include <cmath>

#include "mbjcas/dsp.hpp"

namespace mbjcas {

void OfdmParams::validate() const {
    if (subcarriers < 2 || !is_power_of_two(static_cast<std::size_t>(subcarriers)))
        throw ValidationError("ofdm.subcarriers must be a power of two >= 2");
    if (bandwidth_hz <= 0.0) throw ValidationError("ofdm.bandwidth_hz must be positive");
    if (cp_duration_s < 0.0) throw ValidationError("ofdm.cp_duration_s must be non-negative");
}

void Scenario::validate(const OfdmParams& ofdm) const {
    ofdm.validate();
    if (paths.empty()) throw ValidationError("scenario.paths must contain at least one path");
    if (pathloss_exponent <= 0.0) throw ValidationError("scenario.pathloss_exponent must be positive");
    if (carrier_hz <= 0.0) throw ValidationError("scenario.carrier_hz must be positive");
    const double f0 = ofdm.subcarrier_spacing();
    for (const Multipath& p : paths) {
        if (p.delay_s < 0.0 || p.delay_s >= 1.0 / f0)
            throw ValidationError("path delay outside the unambiguous range [0, 1/f0)");
        if (std::abs(p.doppler_hz) >= f0)
            throw ValidationError("path Doppler outside the unambiguous range (-f0, f0)");
    }
}

double doppler_from_speed(double speed_mps, double carrier_hz) {
    return 1e-8 * speed_mps * carrier_hz / 3.0;
}

double speed_from_doppler(double doppler_hz, double carrier_hz) {
    return doppler_hz * kSpeedOfLight / carrier_hz;
}

double pathloss(double distance_m, double exponent) {
    if (distance_m <= 0.0) throw ValidationError("pathloss distance must be positive");
    return std::pow(distance_m, -exponent);
}

std::vector<Multipath> generate_scatterers(std::uint64_t seed, int count, double min_distance_m,
                                           double max_distance_m, double angle_range_rad,
                                           double speed_min_mps, double speed_max_mps,
                                           double pathloss_exponent, double carrier_hz) {
    if (count < 1) throw ValidationError("scatterer count must be >= 1");
    if (!(0.0 < min_distance_m && min_distance_m <= max_distance_m))
        throw ValidationError("scatterer distance range is invalid");
    Rng rng(derive_seed(seed, {0x5343415454ULL}));
    std::vector<Multipath> paths;
    paths.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double distance = rng.uniform(min_distance_m, max_distance_m);
        const double angle = rng.uniform(-angle_range_rad, angle_range_rad);
        const double speed = rng.uniform(speed_min_mps, speed_max_mps);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        Multipath p;
        p.amplitude = std::polar(std::sqrt(pathloss(distance, pathloss_exponent)), phase);
        p.delay_s = 2.0 * distance / kSpeedOfLight;
        p.doppler_hz = doppler_from_speed(speed, carrier_hz);
        p.aod_rad = angle;
        p.aoa_rad = angle;
        paths.push_back(p);
    }
    return paths;
}

namespace {

// sqrt(P_t) b (w_t^T a(aod)) (w_r^T a(aoa)) per path.
std::vector<cd> path_gains(const Scenario& scenario, const ArrayConfig& array,
                           const BeamVector& w_t, const BeamVector& w_r) {
    const double amp = std::sqrt(dbm_to_mw(scenario.tx_power_dbm));
    std::vector<cd> gains;
    gains.reserve(scenario.paths.size());
    for (const Multipath& p : scenario.paths) {
        const cd tx = steering_vector(array, p.aod_rad).transpose() * w_t.coeffs();
        const cd rx = steering_vector(array, p.aoa_rad).transpose() * w_r.coeffs();
        gains.push_back(amp * p.amplitude * tx * rx);
    }
    return gains;
}

} // namespace

std::vector<cd> freq_channel_estimate(const Scenario& scenario, const OfdmParams& ofdm,
                                      const ArrayConfig& array, double packet_period_s,
                                      int packet_index, int symbol_index, const BeamVector& w_t,
                                      const BeamVector& w_r, bool noise_on, Rng& noise_stream) {
    scenario.validate(ofdm);
    if (packet_index < 1 || symbol_index < 1)
        throw ValidationError("packet and symbol indices are 1-based");

    const double f0 = ofdm.subcarrier_spacing();
    const double t = symbol_index * ofdm.symbol_period() + (packet_index - 1) * packet_period_s;
    const std::vector<cd> gains = path_gains(scenario, array, w_t, w_r);

    std::vector<cd> h(static_cast<std::size_t>(ofdm.subcarriers), cd{0.0, 0.0});
    for (std::size_t l = 0; l < scenario.paths.size(); ++l) {
        const cd g = gains[l] * std::polar(1.0, 2.0 * kPi * scenario.paths[l].doppler_hz * t);
        const double ramp = -2.0 * kPi * scenario.paths[l].delay_s * f0;
        for (int n = 0; n < ofdm.subcarriers; ++n)
            h[static_cast<std::size_t>(n)] += g * std::polar(1.0, ramp * n);
    }
    if (noise_on) {
        const double noise_mw = dbm_to_mw(scenario.noise_power_dbm);
        for (auto& v : h) v += noise_stream.complex_gaussian(noise_mw);
    }
    return h;
}

std::vector<cd> ofdm_modulate(std::span<const cd> symbols, int cp_samples) {
    const std::size_t n = symbols.size();
    if (!is_power_of_two(n)) throw ValidationError("ofdm block length must be a power of two");
    if (cp_samples < 0 || static_cast<std::size_t>(cp_samples) > n)
        throw ValidationError("cyclic prefix longer than the block");
    std::vector<cd> block(symbols.begin(), symbols.end());
    fft_pow2(block, true);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : block) v *= scale;

    std::vector<cd> out;
    out.reserve(n + static_cast<std::size_t>(cp_samples));
    out.insert(out.end(), block.end() - cp_samples, block.end());
    out.insert(out.end(), block.begin(), block.end());
    return out;
}

std::vector<cd> ofdm_demodulate(std::span<const cd> samples, int subcarriers, int cp_samples) {
    if (samples.size() != static_cast<std::size_t>(subcarriers + cp_samples))
        throw ValidationError("sample count does not match block plus prefix");
    std::vector<cd> block(samples.begin() + cp_samples, samples.end());
    fft_pow2(block, false);
    const double scale = 1.0 / std::sqrt(static_cast<double>(subcarriers));
    for (auto& v : block) v *= scale;
    return block;
}

TimeDomainResult time_domain_receive(const Scenario& scenario, const OfdmParams& ofdm,
                                     const ArrayConfig& array, std::span<const cd> tx_samples,
                                     const BeamVector& w_t, const BeamVector& w_r, bool noise_on,
                                     Rng& noise_stream) {
    scenario.validate(ofdm);
    const double sample_period = 1.0 / ofdm.bandwidth_hz;
    const std::vector<cd> gains = path_gains(scenario, array, w_t, w_r);

    TimeDomainResult result;
    result.samples.assign(tx_samples.size(), cd{0.0, 0.0});
    for (std::size_t l = 0; l < scenario.paths.size(); ++l) {
        const long delay = std::lround(scenario.paths[l].delay_s * ofdm.bandwidth_hz);
        if (std::abs(scenario.paths[l].delay_s - delay * sample_period) > 1e-12 * sample_period)
            throw ValidationError("time-domain path delays must be integer samples");
        if (delay > ofdm.cp_samples()) result.delay_exceeds_cp = true;
        const double omega = 2.0 * kPi * scenario.paths[l].doppler_hz * sample_period;
        for (std::size_t i = 0; i < tx_samples.size(); ++i) {
            const long src = static_cast<long>(i) - delay;
            if (src < 0) continue;
            result.samples[i] += gains[l] * std::polar(1.0, omega * static_cast<double>(i)) *
                                 tx_samples[static_cast<std::size_t>(src)];
        }
    }
    if (noise_on) {
        const double noise_mw = dbm_to_mw(scenario.noise_power_dbm);
        for (auto& v : result.samples) v += noise_stream.complex_gaussian(noise_mw);
    }
    return result;
}

} // namespace mbjcas
