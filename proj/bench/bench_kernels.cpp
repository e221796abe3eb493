#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mbjcas/experiments.hpp"

using namespace mbjcas;

namespace {

template <typename F>
double time_ms(F&& f, int repeats) {
    // one warmup, then best-of timing
    f();
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-24s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled\n");
#endif
    std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    const RootConfig cfg = config_from_json_text("{}");
    const BeamSet beams = build_beam_set(cfg);

    OfdmParams ofdm{cfg.ofdm.subcarriers, cfg.ofdm.bandwidth_hz,
                    cfg.ofdm.cp_fraction * cfg.ofdm.subcarriers / cfg.ofdm.bandwidth_hz};
    FramePlan frame = FramePlan::defaults(ofdm);
    Scenario scenario;
    scenario.paths = generate_scatterers(1, 12, 1.0, 30.0, deg_to_rad(60.0), -40.0, 40.0, 4.0, 24e9);
    scenario.rng_seed = 1;
    const RxScanPlan plan = build_rx_scan_plan(beams.comm_direction_u, beams.scan_directions_u,
                                               beams.subbeam_width_u, frame.n_r);

    report("collect_measurements",
           time_ms([&] { collect_measurements(scenario, frame, beams.array,
                                              beams.multibeams_method1, plan, true, Exec::Serial); },
                   5),
           time_ms([&] { collect_measurements(scenario, frame, beams.array,
                                              beams.multibeams_method1, plan, true, Exec::Parallel); },
                   5));

    const MeasurementTensor tensor = collect_measurements(
        scenario, frame, beams.array, beams.multibeams_method1, plan, true, Exec::Parallel);
    const DelayDictionary dict = build_dictionary(frame.ofdm.subcarriers, 2);
    const MmvProblem problem = mmv_stack_sensing(tensor, 4, plan);
    report("mmv_omp",
           time_ms([&] { mmv_omp(problem, dict, {16, 3e-4, Exec::Serial}); }, 5),
           time_ms([&] { mmv_omp(problem, dict, {16, 3e-4, Exec::Parallel}); }, 5));

    report("sensing_scene",
           time_ms([&] { run_sensing_scene(cfg, beams, 1, true, Exec::Serial); }, 3),
           time_ms([&] { run_sensing_scene(cfg, beams, 1, true, Exec::Parallel); }, 3));
    return 0;
}
