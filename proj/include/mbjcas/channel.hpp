#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbjcas/array.hpp"
#include "mbjcas/beamforming.hpp"
#include "mbjcas/rng.hpp"
#include "mbjcas/types.hpp"

namespace mbjcas {

/// One propagation path.
struct Multipath {
    cd amplitude;      // linear, includes pathloss and initial phase
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    double aod_rad = 0.0;
    double aoa_rad = 0.0;
};

struct OfdmParams {
    int subcarriers = 128;       // power of two
    double bandwidth_hz = 1e8;
    double cp_duration_s = 128.0 / (4.0 * 1e8);

    double subcarrier_spacing() const { return bandwidth_hz / subcarriers; }
    double block_duration() const { return subcarriers / bandwidth_hz; }
    double symbol_period() const { return block_duration() + cp_duration_s; }
    int cp_samples() const { return static_cast<int>(std::lround(cp_duration_s * bandwidth_hz)); }
    void validate() const;
};

/// Propagation environment plus the radio context shared by all measurements.
struct Scenario {
    std::vector<Multipath> paths;
    double tx_power_dbm = 25.0;
    double noise_power_dbm = -94.0;
    double pathloss_exponent = 4.0;
    double carrier_hz = 24e9;
    std::uint64_t rng_seed = 1; // noise streams only; path draws carry their own seed

    void validate(const OfdmParams& ofdm) const;
};

/// f_D = 1e-8 * v * f_c / 3, i.e. v * f_c / c with c = 3e8 m/s.
double doppler_from_speed(double speed_mps, double carrier_hz);
double speed_from_doppler(double doppler_hz, double carrier_hz);

/// Power gain distance^(-exponent), normalized to 1 at 1 m. Throws for d <= 0.
double pathloss(double distance_m, double exponent);

/**
 * @brief Draws `count` point scatterers with continuous (off-grid) parameters.
 *
 * Distance, angle and speed are uniform over their ranges; the amplitude
 * magnitude follows the pathloss model (exponent over the one-way distance
 * models the round trip) with a uniform initial phase. Monostatic active
 * sensing: AoD equals AoA and the delay is the round trip 2 d / c.
 * A pure function of the seed.
 */
std::vector<Multipath> generate_scatterers(std::uint64_t seed, int count, double min_distance_m,
                                           double max_distance_m, double angle_range_rad,
                                           double speed_min_mps, double speed_max_mps,
                                           double pathloss_exponent, double carrier_hz);

/**
 * @brief Frequency-domain channel estimate for one OFDM symbol.
 *
 * h_n = sum_l g_l exp(-j 2 pi n tau_l f0) exp(j 2 pi f_D,l (k T_s + (n_t-1) T_f))
 * with g_l = sqrt(P_t) b_l (w_t^T a(aod)) (w_r^T a(aoa)). Noise is drawn from
 * the provided stream; data symbols are unit-modulus so the equalized noise
 * stays white at the configured power. Indices n_t and k are 1-based.
 */
std::vector<cd> freq_channel_estimate(const Scenario& scenario, const OfdmParams& ofdm,
                                      const ArrayConfig& array, double packet_period_s,
                                      int packet_index, int symbol_index, const BeamVector& w_t,
                                      const BeamVector& w_r, bool noise_on, Rng& noise_stream);

/// IFFT (unitary) plus cyclic prefix copied from the block tail.
std::vector<cd> ofdm_modulate(std::span<const cd> symbols, int cp_samples);

/// Strips the prefix and applies the unitary FFT; inverse of ofdm_modulate.
std::vector<cd> ofdm_demodulate(std::span<const cd> samples, int subcarriers, int cp_samples);

struct TimeDomainResult {
    std::vector<cd> samples;
    bool delay_exceeds_cp = false; // frequency-domain model is invalid in that case
};

/**
 * @brief Time-domain multipath receive chain for validating the FD model.
 *
 * Delays must be integer multiples of the sample period 1/B. Doppler is
 * applied per sample; with zero Doppler and delays inside the cyclic prefix
 * this chain matches freq_channel_estimate exactly.
 */
TimeDomainResult time_domain_receive(const Scenario& scenario, const OfdmParams& ofdm,
                                     const ArrayConfig& array, std::span<const cd> tx_samples,
                                     const BeamVector& w_t, const BeamVector& w_r, bool noise_on,
                                     Rng& noise_stream);

} // namespace mbjcas
