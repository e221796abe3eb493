#include <doctest.h>

#include <cmath>
#include <set>

#include "mbjcas/protocol.hpp"

using namespace mbjcas;

namespace {

OfdmParams default_ofdm() { return OfdmParams{128, 1e8, 128.0 / (4.0 * 1e8)}; }

} // namespace

TEST_CASE("symbol index formula and bijection") {
    CHECK(symbol_index(1, 1, 5) == 1);
    CHECK(symbol_index(3, 2, 5) == 12);
    CHECK(symbol_index(12, 5, 5) == 60);
    CHECK_THROWS_AS(symbol_index(1, 6, 5), ValidationError);
    CHECK_THROWS_AS(symbol_index(0, 1, 5), ValidationError);

    std::set<int> seen;
    for (int d = 1; d <= 12; ++d)
        for (int r = 1; r <= 5; ++r) seen.insert(symbol_index(d, r, 5));
    CHECK(seen.size() == 60);
    CHECK(*seen.begin() == 1);
    CHECK(*seen.rbegin() == 60);
}

TEST_CASE("frame defaults give the expected cycle duration") {
    const FramePlan frame = FramePlan::defaults(default_ofdm());
    CHECK(frame.symbols_per_packet == 60);
    CHECK(frame.ofdm.symbol_period() == doctest::Approx(1.6e-6).epsilon(1e-12));
    CHECK(frame.cycle_duration() == doctest::Approx(0.768e-3).epsilon(1e-12));
    FramePlan bad = frame;
    bad.n_d = 13; // 65 symbols > 60 per packet
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("rx scan plan layout") {
    const std::vector<double> centers = {-0.8, -0.6, -0.4, -0.2, 0.2, 0.4, 0.6, 0.8};
    const double width = 0.2;
    const RxScanPlan plan = build_rx_scan_plan(0.0, centers, width, 5);
    REQUIRE(plan.directions.size() == 8);
    CHECK(plan.comm_slot() == 5);

    int sensing_count = 0, comm_count = 0;
    for (std::size_t p = 0; p < plan.directions.size(); ++p) {
        REQUIRE(plan.directions[p].size() == 5);
        CHECK(plan.directions[p].back() == 0.0);
        comm_count += 1;
        for (int s = 0; s < 4; ++s) {
            sensing_count += 1;
            // slots sit strictly inside the subbeam's half-power width
            CHECK(std::abs(plan.directions[p][static_cast<std::size_t>(s)] - centers[p]) <
                  width / 2.0);
        }
    }
    CHECK(sensing_count == 32);
    CHECK(comm_count == 8);

    const RxScanPlan two = build_rx_scan_plan(0.0, {0.4}, width, 2);
    REQUIRE(two.directions[0].size() == 2);
    CHECK(two.directions[0][0] == doctest::Approx(0.4).epsilon(1e-12)); // single slot at the center
    CHECK(two.directions[0][1] == 0.0);
}

TEST_CASE("rx slots stay within the subbeam half-power width in angle") {
    // containment in the sin-domain implies containment in actual angle
    const double width = 2.0 * std::sin(half_power_beamwidth(12) / 2.0);
    const std::vector<double> centers = {0.8};
    const RxScanPlan plan = build_rx_scan_plan(0.0, centers, width, 5);
    const double lo = equivalent_to_actual(0.8 - width / 2.0);
    const double hi = equivalent_to_actual(0.8 + width / 2.0);
    for (int s = 0; s < 4; ++s) {
        const double angle = equivalent_to_actual(plan.directions[0][static_cast<std::size_t>(s)]);
        CHECK(angle > lo);
        CHECK(angle < hi);
    }
}

TEST_CASE("collect_measurements structure for a static boresight path") {
    const ArrayConfig array{16, 0.5};
    FramePlan frame = FramePlan::defaults(default_ofdm());
    frame.n_t = 2;
    frame.n_r = 3;
    frame.n_d = 4;
    frame.symbols_per_packet = 12;
    frame.packet_period_s = 12 * frame.ofdm.symbol_period();

    Scenario scenario;
    scenario.paths.push_back({cd{1.0, 0.0}, 0.0, 0.0, 0.0, 0.0});
    scenario.tx_power_dbm = 0.0;
    scenario.rng_seed = 9;

    const std::vector<BeamVector> tx(2, BeamVector(steering_vector(array, 0.0).conjugate()));
    const RxScanPlan plan = build_rx_scan_plan(0.0, {0.0, 0.1}, 0.2, 3);
    const MeasurementTensor tensor =
        collect_measurements(scenario, frame, array, tx, plan, false, Exec::Serial);

    // zero delay and zero Doppler: every slice is rank one with constant columns
    for (int p = 1; p <= 2; ++p)
        for (int s = 1; s <= 3; ++s) {
            const Eigen::MatrixXcd& y = tensor.slice(p, s);
            for (int c = 0; c < 4; ++c) {
                CHECK((y.col(c) - y.col(0)).norm() < 1e-9);
                CHECK((y.col(c).array() - y(0, c)).matrix().norm() < 1e-9);
            }
        }
}

TEST_CASE("doppler shows up as a fixed column ratio") {
    const ArrayConfig array{8, 0.5};
    FramePlan frame = FramePlan::defaults(default_ofdm());
    frame.n_t = 1;
    frame.n_r = 2;
    frame.n_d = 6;
    frame.symbols_per_packet = 12;
    frame.packet_period_s = 12 * frame.ofdm.symbol_period();

    const double f_d = 2000.0;
    Scenario scenario;
    scenario.paths.push_back({cd{1.0, 0.0}, 8.0 / frame.ofdm.bandwidth_hz, f_d, 0.0, 0.0});
    scenario.tx_power_dbm = 0.0;
    scenario.rng_seed = 4;

    const std::vector<BeamVector> tx(1, BeamVector(steering_vector(array, 0.0).conjugate()));
    const RxScanPlan plan = build_rx_scan_plan(0.0, {0.0}, 0.2, 2);
    const MeasurementTensor tensor =
        collect_measurements(scenario, frame, array, tx, plan, false, Exec::Serial);

    const cd expected = std::polar(1.0, 2.0 * kPi * frame.n_r * f_d * frame.ofdm.symbol_period());
    const Eigen::MatrixXcd& y = tensor.slice(1, 1);
    for (int c = 1; c < 6; ++c)
        for (int n = 0; n < 128; n += 31)
            CHECK(std::abs(y(n, c) / y(n, c - 1) - expected) < 1e-9);
}

TEST_CASE("capacity comparison") {
    CHECK(capacity_ratio(1.0, 10.0).ratio == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(capacity_ratio(0.0, 10.0), ValidationError);

    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double snr = std::pow(10.0, -2.0 + 6.0 * i / 49.0);
        const CapacityPoint p = capacity_ratio(0.5, snr);
        CHECK(p.ratio >= 1.0 - 1e-12);
        if (i > 0) CHECK(p.ratio >= prev - 1e-12); // monotone in snr
        prev = p.ratio;
    }

    // vanishing-snr limit: ratio -> 1 with leading term (1 - a) snr / 2
    for (double a : {0.25, 0.5, 0.9}) {
        const double snr = 1e-6;
        const double ratio = capacity_ratio(a, snr).ratio;
        CHECK(std::abs(ratio - 1.0) < 1e-6);
        CHECK(ratio - 1.0 == doctest::Approx((1.0 - a) * snr / 2.0).epsilon(1e-3));
    }
}
