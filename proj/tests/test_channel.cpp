#include <doctest.h>

#include <cmath>

#include "mbjcas/channel.hpp"
#include "mbjcas/dsp.hpp"

using namespace mbjcas;

namespace {

OfdmParams default_ofdm() { return OfdmParams{128, 1e8, 128.0 / (4.0 * 1e8)}; }

Scenario single_path(double delay_s, double doppler_hz, double theta, cd amplitude) {
    Scenario s;
    s.paths.push_back({amplitude, delay_s, doppler_hz, theta, theta});
    s.tx_power_dbm = 0.0; // unit transmit amplitude
    s.noise_power_dbm = -94.0;
    return s;
}

std::vector<cd> random_qpsk(Rng& rng, int n) {
    std::vector<cd> s(static_cast<std::size_t>(n));
    const double inv = 1.0 / std::sqrt(2.0);
    for (auto& v : s) {
        v = cd{rng.uniform() < 0.5 ? inv : -inv, rng.uniform() < 0.5 ? inv : -inv};
    }
    return s;
}

} // namespace

TEST_CASE("doppler from speed") {
    CHECK(doppler_from_speed(0.0, 24e9) == 0.0);
    CHECK(doppler_from_speed(55.56, 24e9) == doctest::Approx(4444.8).epsilon(1e-12));
    CHECK(doppler_from_speed(40.0, 24e9) == doctest::Approx(3200.0).epsilon(1e-12));
    CHECK(speed_from_doppler(doppler_from_speed(12.5, 24e9), 24e9) ==
          doctest::Approx(12.5).epsilon(1e-12));
}

TEST_CASE("pathloss values") {
    CHECK(linear_to_db(pathloss(2.0, 2.0) / pathloss(1.0, 2.0)) ==
          doctest::Approx(-6.020599913279624).epsilon(1e-12));
    CHECK(linear_to_db(pathloss(2.0, 4.0) / pathloss(1.0, 4.0)) ==
          doctest::Approx(-12.041199826559248).epsilon(1e-12));
    CHECK(linear_to_db(pathloss(30.0, 4.0)) == doctest::Approx(-59.0848501887865).epsilon(1e-12));
    CHECK_THROWS_AS(pathloss(0.0, 4.0), ValidationError);
}

TEST_CASE("scatterer generation is a pure function of the seed") {
    const auto a = generate_scatterers(42, 12, 1.0, 30.0, deg_to_rad(60.0), -40.0, 40.0, 4.0, 24e9);
    const auto b = generate_scatterers(42, 12, 1.0, 30.0, deg_to_rad(60.0), -40.0, 40.0, 4.0, 24e9);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].amplitude == b[i].amplitude);
        CHECK(a[i].delay_s == b[i].delay_s);
        CHECK(a[i].doppler_hz == b[i].doppler_hz);
        CHECK(a[i].aod_rad == b[i].aod_rad);
        CHECK(a[i].aoa_rad == a[i].aod_rad); // monostatic
        const double distance = a[i].delay_s * kSpeedOfLight / 2.0;
        CHECK(distance >= 1.0);
        CHECK(distance <= 30.0);
        CHECK(std::abs(a[i].aod_rad) <= deg_to_rad(60.0));
        CHECK(std::abs(std::abs(a[i].amplitude) -
                       std::sqrt(pathloss(distance, 4.0))) < 1e-12);
    }
    const auto still = generate_scatterers(7, 5, 1.0, 30.0, 1.0, 0.0, 0.0, 4.0, 24e9);
    for (const auto& p : still) CHECK(p.doppler_hz == 0.0);
}

TEST_CASE("flat response for a boresight path with matched beams") {
    const OfdmParams ofdm = default_ofdm();
    const ArrayConfig array{16, 0.5};
    const Scenario scenario = single_path(0.0, 0.0, 0.0, cd{0.5, 0.0});
    const BeamVector w(steering_vector(array, 0.0).conjugate());
    Rng noise(1);
    const std::vector<cd> h = freq_channel_estimate(scenario, ofdm, array, 96e-6, 1, 1, w, w,
                                                    false, noise);
    // g = b * sqrt(M) * sqrt(M) = 0.5 * 16 = 8 on every subcarrier
    for (const cd& v : h) CHECK(std::abs(v - cd{8.0, 0.0}) < 1e-9);
}

TEST_CASE("integer-sample delay produces the expected phase ramp") {
    const OfdmParams ofdm = default_ofdm();
    const ArrayConfig array{4, 0.5};
    const int p = 5;
    const Scenario scenario = single_path(p / ofdm.bandwidth_hz, 0.0, 0.0, cd{1.0, 0.0});
    const BeamVector w(steering_vector(array, 0.0).conjugate());
    Rng noise(1);
    const std::vector<cd> h =
        freq_channel_estimate(scenario, ofdm, array, 96e-6, 1, 1, w, w, false, noise);
    for (int n = 0; n < ofdm.subcarriers; ++n) {
        const cd expected = 4.0 * std::polar(1.0, -2.0 * kPi * n * p / 128.0);
        CHECK(std::abs(h[static_cast<std::size_t>(n)] - expected) < 1e-9);
    }
}

TEST_CASE("ofdm round trip and impulse response") {
    Rng rng(5);
    const std::vector<cd> symbols = random_qpsk(rng, 128);
    const std::vector<cd> tx = ofdm_modulate(symbols, 32);
    REQUIRE(tx.size() == 160);
    // prefix equals the block tail
    for (int i = 0; i < 32; ++i) CHECK(tx[static_cast<std::size_t>(i)] == tx[static_cast<std::size_t>(i + 128)]);
    const std::vector<cd> back = ofdm_demodulate(tx, 128, 32);
    for (int n = 0; n < 128; ++n)
        CHECK(std::abs(back[static_cast<std::size_t>(n)] - symbols[static_cast<std::size_t>(n)]) < 1e-12);

    std::vector<cd> impulse(128, cd{0.0, 0.0});
    impulse[0] = cd{1.0, 0.0};
    const std::vector<cd> flat = ofdm_modulate(impulse, 0);
    for (const cd& v : flat) CHECK(std::abs(v - flat[0]) < 1e-12);
}

TEST_CASE("frequency-domain estimate matches the time-domain chain") {
    const OfdmParams ofdm = default_ofdm();
    const ArrayConfig array{16, 0.5};
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        Scenario scenario;
        scenario.tx_power_dbm = 10.0;
        const int paths = 1 + static_cast<int>(rng.uniform() * 3);
        for (int l = 0; l < paths; ++l) {
            const int delay_samples = static_cast<int>(rng.uniform() * 32);
            scenario.paths.push_back({rng.complex_gaussian(1.0), delay_samples / ofdm.bandwidth_hz,
                                      0.0, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        }
        Eigen::VectorXcd wt_raw(16), wr_raw(16);
        for (int m = 0; m < 16; ++m) {
            wt_raw(m) = rng.complex_gaussian(1.0);
            wr_raw(m) = rng.complex_gaussian(1.0);
        }
        const BeamVector w_t(wt_raw), w_r(wr_raw);

        Rng noise(1);
        const std::vector<cd> fd =
            freq_channel_estimate(scenario, ofdm, array, 96e-6, 1, 1, w_t, w_r, false, noise);

        const std::vector<cd> symbols = random_qpsk(rng, ofdm.subcarriers);
        const std::vector<cd> tx = ofdm_modulate(symbols, ofdm.cp_samples());
        const TimeDomainResult rx =
            time_domain_receive(scenario, ofdm, array, tx, w_t, w_r, false, noise);
        CHECK_FALSE(rx.delay_exceeds_cp);
        const std::vector<cd> demod = ofdm_demodulate(rx.samples, ofdm.subcarriers, ofdm.cp_samples());

        double max_rel = 0.0;
        for (int n = 0; n < ofdm.subcarriers; ++n) {
            const cd td = demod[static_cast<std::size_t>(n)] / symbols[static_cast<std::size_t>(n)];
            max_rel = std::max(max_rel, std::abs(td - fd[static_cast<std::size_t>(n)]) /
                                            std::abs(fd[static_cast<std::size_t>(n)]));
        }
        CHECK(max_rel < 1e-9);
    }
}

TEST_CASE("time-domain chain basics") {
    const OfdmParams ofdm = default_ofdm();
    const ArrayConfig array{4, 0.5};
    const BeamVector w(steering_vector(array, 0.0).conjugate());
    Rng rng(2);
    const std::vector<cd> tx = ofdm_modulate(random_qpsk(rng, 128), 32);
    Rng noise(1);

    // single zero-delay path: scaled copy
    const Scenario direct = single_path(0.0, 0.0, 0.0, cd{0.25, 0.0});
    const TimeDomainResult copy = time_domain_receive(direct, ofdm, array, tx, w, w, false, noise);
    for (std::size_t i = 0; i < tx.size(); ++i)
        CHECK(std::abs(copy.samples[i] - tx[i] * cd{1.0, 0.0}) < 1e-12);

    // two equal opposite-phase paths cancel
    Scenario opposing = single_path(0.0, 0.0, 0.0, cd{0.25, 0.0});
    opposing.paths.push_back({cd{-0.25, 0.0}, 0.0, 0.0, 0.0, 0.0});
    const TimeDomainResult out = time_domain_receive(opposing, ofdm, array, tx, w, w, false, noise);
    for (const cd& v : out.samples) CHECK(std::abs(v) < 1e-12);

    // delay beyond the prefix raises the mismatch flag
    const Scenario late = single_path(40.0 / ofdm.bandwidth_hz, 0.0, 0.0, cd{1.0, 0.0});
    CHECK(time_domain_receive(late, ofdm, array, tx, w, w, false, noise).delay_exceeds_cp);
}

TEST_CASE("doppler advances the phase by 2 pi f_D N_r T_s between same-slot symbols") {
    const OfdmParams ofdm = default_ofdm();
    const ArrayConfig array{8, 0.5};
    const double f_d = 1500.0;
    const Scenario scenario = single_path(10.0 / ofdm.bandwidth_hz, f_d, 0.2, cd{1.0, 0.0});
    const BeamVector w(steering_vector(array, 0.2).conjugate());
    Rng noise(1);
    const int n_r = 5;
    const std::vector<cd> h1 =
        freq_channel_estimate(scenario, ofdm, array, 96e-6, 1, 3, w, w, false, noise);
    const std::vector<cd> h2 =
        freq_channel_estimate(scenario, ofdm, array, 96e-6, 1, 3 + n_r, w, w, false, noise);
    const cd expected = std::polar(1.0, 2.0 * kPi * f_d * n_r * ofdm.symbol_period());
    for (int n = 0; n < ofdm.subcarriers; n += 17)
        CHECK(std::abs(h2[static_cast<std::size_t>(n)] / h1[static_cast<std::size_t>(n)] - expected) < 1e-9);
}

TEST_CASE("scenario validation rejects out-of-range parameters") {
    const OfdmParams ofdm = default_ofdm();
    Scenario s = single_path(2e-6, 0.0, 0.0, cd{1.0, 0.0}); // beyond 1/f0 = 1.28 us
    CHECK_THROWS_AS(s.validate(ofdm), ValidationError);
    Scenario d = single_path(0.0, 1e6, 0.0, cd{1.0, 0.0}); // beyond f0
    CHECK_THROWS_AS(d.validate(ofdm), ValidationError);
    OfdmParams bad = default_ofdm();
    bad.subcarriers = 100;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
