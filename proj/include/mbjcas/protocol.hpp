#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mbjcas/channel.hpp"
#include "mbjcas/types.hpp"

namespace mbjcas {

/// Packet structure of one scanning cycle: N_t packets of N_r * N_d symbols.
struct FramePlan {
    int n_t = 8;
    int n_r = 5;
    int n_d = 12;
    int symbols_per_packet = 60;
    double packet_period_s = 0.0; // filled to back-to-back packets by defaults()
    OfdmParams ofdm;

    static FramePlan defaults(const OfdmParams& ofdm);
    void validate() const;
    double cycle_duration() const { return n_t * packet_period_s; }
};

/// k = (n_d - 1) N_r + n_r, the 1-based OFDM symbol index within a packet.
int symbol_index(int n_d_index, int n_r_index, int n_r_total);

/**
 * @brief Receive-beam schedule: N_r directions per packet.
 *
 * Slots 1..N_r-1 cover the packet's transmit sensing subbeam; the last slot
 * always points at the communication direction.
 */
struct RxScanPlan {
    int n_r = 0;
    std::vector<std::vector<double>> directions; // [packet][slot], equivalent directions

    int comm_slot() const { return n_r; } // 1-based slot index of the comm direction
    void validate() const;
};

/// Spreads N_r-1 sensing slots uniformly inside each subbeam's 3 dB width
/// (subbeam_width_u in the sin-domain) and appends the comm-direction slot.
RxScanPlan build_rx_scan_plan(double comm_direction_u, const std::vector<double>& tx_sensing_u,
                              double subbeam_width_u, int n_r);

/// Stacked frequency-domain measurements Y(n_t, n_r), each slice N x N_d.
struct MeasurementTensor {
    int n_t = 0;
    int n_r = 0;
    int n_d = 0;
    int subcarriers = 0;
    std::vector<Eigen::MatrixXcd> slices; // n_t * n_r entries, packet-major

    Eigen::MatrixXcd& slice(int packet, int slot); // 1-based indices
    const Eigen::MatrixXcd& slice(int packet, int slot) const;
};

/**
 * @brief Fills Y(n_t, n_r) from the channel model over a full scanning cycle.
 *
 * The transmit vector is fixed within each packet and the receive vector
 * within each symbol. Each (packet, slot) slice draws its noise from a
 * substream of (scenario seed, packet, slot), so the parallel and serial
 * paths produce bit-identical tensors.
 */
MeasurementTensor collect_measurements(const Scenario& scenario, const FramePlan& frame,
                                       const ArrayConfig& array,
                                       const std::vector<BeamVector>& tx_beams,
                                       const RxScanPlan& rx_plan, bool noise_on,
                                       Exec exec = Exec::Parallel);

struct CapacityPoint {
    double c_mb = 0.0;  // bits/s/Hz, multibeam
    double c_td = 0.0;  // bits/s/Hz, time division
    double ratio = 0.0; // c_mb / c_td, >= 1
};

/// Shannon-capacity comparison of multibeam against time division at
/// communication share `a` and composite SNR M |h|^2 P_t / sigma^2.
CapacityPoint capacity_ratio(double a, double snr_linear);

} // namespace mbjcas
