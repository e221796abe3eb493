#include "mbjcas/protocol.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mbjcas {

FramePlan FramePlan::defaults(const OfdmParams& params) {
    FramePlan plan;
    plan.ofdm = params;
    plan.symbols_per_packet = plan.n_r * plan.n_d;
    plan.packet_period_s = plan.symbols_per_packet * params.symbol_period();
    return plan;
}

void FramePlan::validate() const {
    ofdm.validate();
    if (n_t < 1 || n_r < 1 || n_d < 1)
        throw ValidationError("frame.n_t, frame.n_r, frame.n_d must be >= 1");
    if (n_r * n_d > symbols_per_packet)
        throw ValidationError("frame: n_r * n_d exceeds symbols_per_packet");
    if (packet_period_s + 1e-15 < n_r * n_d * ofdm.symbol_period())
        throw ValidationError("frame.packet_period_s shorter than the scheduled symbols");
}

int symbol_index(int n_d_index, int n_r_index, int n_r_total) {
    if (n_r_total < 1 || n_r_index < 1 || n_r_index > n_r_total || n_d_index < 1)
        throw ValidationError("symbol_index arguments out of range");
    return (n_d_index - 1) * n_r_total + n_r_index;
}

void RxScanPlan::validate() const {
    if (n_r < 2) throw ValidationError("rx plan needs at least 2 slots per packet");
    if (directions.empty()) throw ValidationError("rx plan has no packets");
    for (const auto& packet : directions) {
        if (static_cast<int>(packet.size()) != n_r)
            throw ValidationError("rx plan packet with wrong slot count");
        for (double u : packet)
            if (std::abs(u) > 1.0) throw ValidationError("rx direction outside visible space");
    }
}

RxScanPlan build_rx_scan_plan(double comm_direction_u, const std::vector<double>& tx_sensing_u,
                              double subbeam_width_u, int n_r) {
    if (n_r < 2) throw ValidationError("rx plan needs at least 2 slots per packet");
    if (subbeam_width_u <= 0.0) throw ValidationError("subbeam width must be positive");
    RxScanPlan plan;
    plan.n_r = n_r;
    plan.directions.reserve(tx_sensing_u.size());
    const int sensing_slots = n_r - 1;
    for (double center : tx_sensing_u) {
        std::vector<double> slots;
        slots.reserve(static_cast<std::size_t>(n_r));
        for (int i = 0; i < sensing_slots; ++i) {
            const double frac = (i + 0.5) / sensing_slots - 0.5;
            slots.push_back(center + subbeam_width_u * frac);
        }
        slots.push_back(comm_direction_u);
        plan.directions.push_back(std::move(slots));
    }
    plan.validate();
    return plan;
}

Eigen::MatrixXcd& MeasurementTensor::slice(int packet, int slot) {
    return slices[static_cast<std::size_t>((packet - 1) * n_r + (slot - 1))];
}

const Eigen::MatrixXcd& MeasurementTensor::slice(int packet, int slot) const {
    return slices[static_cast<std::size_t>((packet - 1) * n_r + (slot - 1))];
}

namespace {

constexpr std::uint64_t kMeasurementTag = 0x6d6561737572ULL;

void fill_slice(MeasurementTensor& tensor, const Scenario& scenario, const FramePlan& frame,
                const ArrayConfig& array, const std::vector<BeamVector>& tx_beams,
                const RxScanPlan& rx_plan, bool noise_on, int packet, int slot) {
    const double u = rx_plan.directions[static_cast<std::size_t>(packet - 1)]
                                       [static_cast<std::size_t>(slot - 1)];
    const BeamVector w_r(equivalent_response(array.num_elements, u).conjugate());
    Rng stream(derive_seed(scenario.rng_seed, {kMeasurementTag, static_cast<std::uint64_t>(packet),
                                               static_cast<std::uint64_t>(slot)}));
    Eigen::MatrixXcd& y = tensor.slice(packet, slot);
    for (int d = 1; d <= frame.n_d; ++d) {
        const int k = symbol_index(d, slot, frame.n_r);
        const std::vector<cd> h = freq_channel_estimate(
            scenario, frame.ofdm, array, frame.packet_period_s, packet, k,
            tx_beams[static_cast<std::size_t>(packet - 1)], w_r, noise_on, stream);
        for (int n = 0; n < frame.ofdm.subcarriers; ++n) y(n, d - 1) = h[static_cast<std::size_t>(n)];
    }
}

} // namespace

MeasurementTensor collect_measurements(const Scenario& scenario, const FramePlan& frame,
                                       const ArrayConfig& array,
                                       const std::vector<BeamVector>& tx_beams,
                                       const RxScanPlan& rx_plan, bool noise_on, Exec exec) {
    frame.validate();
    rx_plan.validate();
    scenario.validate(frame.ofdm);
    if (static_cast<int>(tx_beams.size()) != frame.n_t)
        throw ValidationError("one transmit beam per packet is required");
    if (static_cast<int>(rx_plan.directions.size()) != frame.n_t || rx_plan.n_r != frame.n_r)
        throw ValidationError("rx plan does not match the frame plan");

    MeasurementTensor tensor;
    tensor.n_t = frame.n_t;
    tensor.n_r = frame.n_r;
    tensor.n_d = frame.n_d;
    tensor.subcarriers = frame.ofdm.subcarriers;
    tensor.slices.assign(static_cast<std::size_t>(frame.n_t * frame.n_r),
                         Eigen::MatrixXcd::Zero(frame.ofdm.subcarriers, frame.n_d));

    const int total = frame.n_t * frame.n_r;
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int s = 0; s < total; ++s)
            fill_slice(tensor, scenario, frame, array, tx_beams, rx_plan, noise_on,
                       s / frame.n_r + 1, s % frame.n_r + 1);
    } else {
        for (int s = 0; s < total; ++s)
            fill_slice(tensor, scenario, frame, array, tx_beams, rx_plan, noise_on,
                       s / frame.n_r + 1, s % frame.n_r + 1);
    }
    return tensor;
}

CapacityPoint capacity_ratio(double a, double snr_linear) {
    if (!(a > 0.0 && a <= 1.0)) throw ValidationError("capacity share a must lie in (0, 1]");
    if (snr_linear < 0.0) throw ValidationError("snr must be non-negative");
    constexpr double ln2 = 0.6931471805599453;
    CapacityPoint point;
    point.c_mb = std::log1p(a * snr_linear) / ln2;
    point.c_td = a * std::log1p(snr_linear) / ln2;
    point.ratio = snr_linear > 0.0 ? point.c_mb / point.c_td : 1.0;
    return point;
}

} // namespace mbjcas
