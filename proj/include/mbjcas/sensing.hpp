#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mbjcas/protocol.hpp"
#include "mbjcas/types.hpp"

namespace mbjcas {

/**
 * @brief Interpolated delay dictionary with entries exp(-j 2 pi n q / L_p).
 *
 * Column q corresponds to the quantized delay q N / (B L_p). Adjoint products
 * are evaluated through a zero-padded length-L_p fast transform when L_p is a
 * power of two.
 */
struct DelayDictionary {
    int subcarriers = 0;  // N, dictionary row count
    int columns = 0;      // L_p >= N

    cd entry(int n, int q) const {
        return std::polar(1.0, -2.0 * kPi * static_cast<double>(n) * static_cast<double>(q) /
                                   static_cast<double>(columns));
    }
    Eigen::VectorXcd column(int q) const;
    double delay_at(int q, double bandwidth_hz) const {
        return static_cast<double>(q) * subcarriers / (bandwidth_hz * columns);
    }
    double distance_at(int q, double bandwidth_hz) const {
        return delay_at(q, bandwidth_hz) * kSpeedOfLight / 2.0;
    }
};

DelayDictionary build_dictionary(int subcarriers, int interpolation_factor);

/// C^H x for one measurement column (length N), returning all L_p correlations.
Eigen::VectorXcd dictionary_adjoint(const DelayDictionary& dict, std::span<const cd> column);

/**
 * @brief Magnitude of the 2D transform of one measurement slice.
 *
 * Inverse DFT along subcarriers gives the delay axis; forward DFT along the
 * symbol axis gives Doppler bins of width 1 / (N_d N_r T_s).
 */
Eigen::MatrixXd dft_delay_doppler(const Eigen::MatrixXcd& slice);

/// Coherent average of groups of consecutive symbol columns; groups of more
/// than 4 columns are rejected because the Doppler phase decorrelates beyond that.
Eigen::MatrixXcd coherent_column_average(const Eigen::MatrixXcd& slice, int group_size);

/// Element-wise sum of magnitude maps of equal shape.
Eigen::MatrixXd aggregate_maps(std::span<const Eigen::MatrixXd> maps);

enum class MmvCombination { SensingSlots, CommSlots };

/**
 * @brief One multiple-measurement-vector problem: stacked columns sharing a
 * delay support, with the receive direction recorded per slice.
 */
struct MmvProblem {
    Eigen::MatrixXcd measurements;      // N x J
    int cols_per_slice = 0;             // N_d
    std::vector<double> slot_directions; // one receive direction per slice
    std::vector<int> packet_of_slice;    // source packet per slice (1-based)
    MmvCombination combination = MmvCombination::SensingSlots;

    int slice_count() const { return static_cast<int>(slot_directions.size()); }
};

/// Combination 1: the N_r - 1 sensing-slot slices of one packet.
MmvProblem mmv_stack_sensing(const MeasurementTensor& tensor, int packet, const RxScanPlan& plan);

/**
 * @brief Combination 2: the comm-direction slices across packets.
 *
 * Packets whose sensing subbeam lies within exclusion_width_u of the comm
 * direction are dropped; their comm-slot amplitudes are dominated by the
 * sensing subbeam and break the common-support assumption.
 */
MmvProblem mmv_stack_comm(const MeasurementTensor& tensor, const RxScanPlan& plan,
                          const std::vector<double>& tx_sensing_u, double comm_direction_u,
                          double exclusion_width_u);

struct MmvOmpOptions {
    int max_sparsity = 16;
    double residual_tol = 3e-4; // relative Frobenius norm
    Exec exec = Exec::Parallel;
};

struct SparseSolution {
    Eigen::MatrixXcd amplitudes;          // L_p x J, zero outside the support
    std::vector<int> support;             // selected delay bins, in selection order
    std::vector<double> residual_history; // relative Frobenius residual per iteration
    bool converged = false;               // false when max_sparsity stopped the loop
};

/**
 * @brief Greedy multiple-measurement-vector orthogonal matching pursuit.
 *
 * Each iteration selects the dictionary column with the largest summed
 * correlation energy over all measurement columns, then re-fits all selected
 * rows jointly by least squares. The residual norm is strictly decreasing.
 */
SparseSolution mmv_omp(const MmvProblem& problem, const DelayDictionary& dict,
                       const MmvOmpOptions& options = {});

struct LambdaStats {
    cd mean;          // lag-1 cross-correlation mean over the row
    double variance;  // mean squared modulus of deviations
};

/// Lag-1 statistics of one recovered amplitude row segment (length >= 2).
LambdaStats lambda_stats(std::span<const cd> row_segment);

/// arg(lambda) / (2 pi N_r T_s); unambiguous because the phase advance is small.
double estimate_doppler(cd lambda_mean, int n_r, double symbol_period_s);

/// Per-slice lambda statistics for every support bin of a solution.
struct ProblemLambda {
    std::vector<int> bins;      // support bins, ascending
    Eigen::MatrixXcd mean;      // |bins| x slices
    Eigen::MatrixXd variance;   // |bins| x slices
};

ProblemLambda per_slice_lambda(const SparseSolution& solution, int slice_count, int cols_per_slice);

/// Delay-dependent thresholds: margin times the reference lambda scaled by the
/// pathloss ratio, +inf beyond max_range_m. Distances below 1 m are clamped.
std::vector<double> delay_thresholds(const DelayDictionary& dict, double bandwidth_hz,
                                     double reference_lambda, double reference_distance_m,
                                     double pathloss_exponent, double margin, double max_range_m);

/// Bins whose best per-slice |lambda| reaches the threshold.
std::vector<int> detect_delays(const ProblemLambda& lambda, const std::vector<double>& thresholds);

struct TargetEstimate {
    double distance_m = 0.0;
    double speed_mps = 0.0;
    double aoa_rad = 0.0;
    double power = 0.0;    // linear, uncompensated
    double power_db = 0.0; // filled by postprocess_estimates
    int bin = -1;
};

/**
 * @brief Turns detected bins into target estimates.
 *
 * AoA is the |lambda|-weighted mean of the receive directions whose slices
 * exceed the threshold, converted from the equivalent direction through
 * u = 2 * spacing * sin(theta); Doppler comes from the argument of the summed
 * lambda over those slices, converted to speed through the Doppler relation.
 */
std::vector<TargetEstimate> associate_aoa(const ProblemLambda& lambda,
                                          const std::vector<int>& detected_bins,
                                          const MmvProblem& problem, const DelayDictionary& dict,
                                          double bandwidth_hz, int n_r, double symbol_period_s,
                                          double carrier_hz, const std::vector<double>& thresholds,
                                          double element_spacing = 0.5);

/// Pathloss compensation, normalization to the maximum and clipping at floor_db.
void postprocess_estimates(std::vector<TargetEstimate>& estimates, double pathloss_exponent,
                           double floor_db);

/// Same post-processing for a dense map of POWER values whose rows carry the
/// given distances; rows beyond max_range_m are pushed to the floor.
Eigen::MatrixXd postprocess_map(const Eigen::MatrixXd& map, const std::vector<double>& row_distances_m,
                                double pathloss_exponent, double floor_db, double max_range_m);

} // namespace mbjcas
