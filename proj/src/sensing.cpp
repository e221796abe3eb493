#include "mbjcas/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbjcas/dsp.hpp"

namespace mbjcas {

Eigen::VectorXcd DelayDictionary::column(int q) const {
    Eigen::VectorXcd c(subcarriers);
    for (int n = 0; n < subcarriers; ++n) c(n) = entry(n, q);
    return c;
}

DelayDictionary build_dictionary(int subcarriers, int interpolation_factor) {
    if (subcarriers < 2) throw ValidationError("dictionary needs at least 2 subcarriers");
    if (interpolation_factor < 1) throw ValidationError("interpolation factor must be >= 1");
    return {subcarriers, subcarriers * interpolation_factor};
}

Eigen::VectorXcd dictionary_adjoint(const DelayDictionary& dict, std::span<const cd> column) {
    if (column.size() != static_cast<std::size_t>(dict.subcarriers))
        throw ValidationError("adjoint input length does not match the dictionary rows");
    // C^H x equals the unnormalized inverse transform of the zero-padded column.
    std::vector<cd> padded(static_cast<std::size_t>(dict.columns), cd{0.0, 0.0});
    std::copy(column.begin(), column.end(), padded.begin());
    std::vector<cd> spectrum = dft(padded, true);
    return Eigen::Map<Eigen::VectorXcd>(spectrum.data(), dict.columns);
}

Eigen::MatrixXd dft_delay_doppler(const Eigen::MatrixXcd& slice) {
    const int n = static_cast<int>(slice.rows());
    const int n_d = static_cast<int>(slice.cols());
    Eigen::MatrixXcd delay_time(n, n_d);
    for (int c = 0; c < n_d; ++c) {
        std::vector<cd> col(slice.col(c).data(), slice.col(c).data() + n);
        std::vector<cd> profile = dft(col, true); // inverse DFT: delay axis
        for (int r = 0; r < n; ++r) delay_time(r, c) = profile[static_cast<std::size_t>(r)];
    }
    Eigen::MatrixXd map(n, n_d);
    for (int r = 0; r < n; ++r) {
        std::vector<cd> row(static_cast<std::size_t>(n_d));
        for (int c = 0; c < n_d; ++c) row[static_cast<std::size_t>(c)] = delay_time(r, c);
        std::vector<cd> doppler = dft(row, false); // forward DFT: Doppler axis
        for (int c = 0; c < n_d; ++c) map(r, c) = std::abs(doppler[static_cast<std::size_t>(c)]);
    }
    return map;
}

Eigen::MatrixXcd coherent_column_average(const Eigen::MatrixXcd& slice, int group_size) {
    if (group_size < 1 || group_size > 4)
        throw ValidationError("coherent averaging is limited to at most 4 consecutive columns");
    const int n_d = static_cast<int>(slice.cols());
    const int groups = (n_d + group_size - 1) / group_size;
    Eigen::MatrixXcd out(slice.rows(), groups);
    for (int g = 0; g < groups; ++g) {
        const int begin = g * group_size;
        const int count = std::min(group_size, n_d - begin);
        out.col(g) = slice.middleCols(begin, count).rowwise().sum() / static_cast<double>(count);
    }
    return out;
}

Eigen::MatrixXd aggregate_maps(std::span<const Eigen::MatrixXd> maps) {
    if (maps.empty()) throw ValidationError("no maps to aggregate");
    Eigen::MatrixXd sum = maps[0];
    for (std::size_t i = 1; i < maps.size(); ++i) {
        if (maps[i].rows() != sum.rows() || maps[i].cols() != sum.cols())
            throw ValidationError("aggregate_maps: shape mismatch");
        sum += maps[i];
    }
    return sum;
}

MmvProblem mmv_stack_sensing(const MeasurementTensor& tensor, int packet, const RxScanPlan& plan) {
    if (packet < 1 || packet > tensor.n_t) throw ValidationError("packet index out of range");
    const int slices = tensor.n_r - 1;
    if (slices < 1) throw ValidationError("combination 1 needs at least 2 receive slots");
    MmvProblem problem;
    problem.combination = MmvCombination::SensingSlots;
    problem.cols_per_slice = tensor.n_d;
    problem.measurements.resize(tensor.subcarriers, slices * tensor.n_d);
    for (int s = 0; s < slices; ++s) {
        problem.measurements.middleCols(s * tensor.n_d, tensor.n_d) = tensor.slice(packet, s + 1);
        problem.slot_directions.push_back(
            plan.directions[static_cast<std::size_t>(packet - 1)][static_cast<std::size_t>(s)]);
        problem.packet_of_slice.push_back(packet);
    }
    return problem;
}

MmvProblem mmv_stack_comm(const MeasurementTensor& tensor, const RxScanPlan& plan,
                          const std::vector<double>& tx_sensing_u, double comm_direction_u,
                          double exclusion_width_u) {
    if (static_cast<int>(tx_sensing_u.size()) != tensor.n_t)
        throw ValidationError("one sensing direction per packet is required");
    std::vector<int> keep;
    for (int p = 1; p <= tensor.n_t; ++p)
        if (std::abs(tx_sensing_u[static_cast<std::size_t>(p - 1)] - comm_direction_u) >
            exclusion_width_u)
            keep.push_back(p);
    if (keep.empty()) throw ValidationError("combination 2: every packet was excluded");

    MmvProblem problem;
    problem.combination = MmvCombination::CommSlots;
    problem.cols_per_slice = tensor.n_d;
    problem.measurements.resize(tensor.subcarriers, static_cast<int>(keep.size()) * tensor.n_d);
    int s = 0;
    for (int p : keep) {
        problem.measurements.middleCols(s * tensor.n_d, tensor.n_d) = tensor.slice(p, tensor.n_r);
        problem.slot_directions.push_back(
            plan.directions[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(tensor.n_r - 1)]);
        problem.packet_of_slice.push_back(p);
        ++s;
    }
    return problem;
}

namespace {

// Correlation energies per dictionary bin, summed over measurement columns in
// fixed order so the parallel path stays bit-identical to the serial one.
Eigen::VectorXd correlation_energy(const DelayDictionary& dict, const Eigen::MatrixXcd& residual,
                                   Exec exec) {
    const int cols = static_cast<int>(residual.cols());
    Eigen::MatrixXcd correlations(dict.columns, cols);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < cols; ++j)
            correlations.col(j) = dictionary_adjoint(
                dict, std::span<const cd>(residual.col(j).data(), residual.rows()));
    } else {
        for (int j = 0; j < cols; ++j)
            correlations.col(j) = dictionary_adjoint(
                dict, std::span<const cd>(residual.col(j).data(), residual.rows()));
    }
    Eigen::VectorXd energy = Eigen::VectorXd::Zero(dict.columns);
    for (int q = 0; q < dict.columns; ++q) {
        double acc = 0.0;
        for (int j = 0; j < cols; ++j) acc += std::norm(correlations(q, j));
        energy(q) = acc;
    }
    return energy;
}

} // namespace

SparseSolution mmv_omp(const MmvProblem& problem, const DelayDictionary& dict,
                       const MmvOmpOptions& options) {
    if (options.max_sparsity < 1) throw ValidationError("max_sparsity must be >= 1");
    if (problem.measurements.rows() != dict.subcarriers)
        throw ValidationError("measurement rows do not match the dictionary");

    const double total_norm = problem.measurements.norm();
    SparseSolution solution;
    solution.amplitudes =
        Eigen::MatrixXcd::Zero(dict.columns, problem.measurements.cols());
    if (total_norm == 0.0) {
        solution.converged = true;
        return solution;
    }

    Eigen::MatrixXcd residual = problem.measurements;
    Eigen::MatrixXcd subdict(dict.subcarriers, 0);
    Eigen::MatrixXcd fitted;
    while (static_cast<int>(solution.support.size()) < options.max_sparsity) {
        const Eigen::VectorXd energy = correlation_energy(dict, residual, options.exec);
        int best = -1;
        double best_energy = -1.0;
        for (int q = 0; q < dict.columns; ++q) {
            if (std::find(solution.support.begin(), solution.support.end(), q) !=
                solution.support.end())
                continue;
            if (energy(q) > best_energy) {
                best_energy = energy(q);
                best = q;
            }
        }
        if (best < 0) break;
        solution.support.push_back(best);

        subdict.conservativeResize(Eigen::NoChange, solution.support.size());
        subdict.col(static_cast<Eigen::Index>(solution.support.size()) - 1) = dict.column(best);
        fitted = subdict.colPivHouseholderQr().solve(problem.measurements);
        residual = problem.measurements - subdict * fitted;

        const double rel = residual.norm() / total_norm;
        solution.residual_history.push_back(rel);
        if (rel <= options.residual_tol) {
            solution.converged = true;
            break;
        }
    }
    for (std::size_t i = 0; i < solution.support.size(); ++i)
        solution.amplitudes.row(solution.support[i]) = fitted.row(static_cast<Eigen::Index>(i));
    return solution;
}

LambdaStats lambda_stats(std::span<const cd> row_segment) {
    if (row_segment.size() < 2)
        throw ValidationError("lambda statistics need at least 2 row entries");
    const std::size_t lags = row_segment.size() - 1;
    cd mean{0.0, 0.0};
    for (std::size_t i = 0; i < lags; ++i) mean += std::conj(row_segment[i]) * row_segment[i + 1];
    mean /= static_cast<double>(lags);
    double variance = 0.0;
    for (std::size_t i = 0; i < lags; ++i) {
        const cd lag = std::conj(row_segment[i]) * row_segment[i + 1];
        variance += std::norm(lag - mean);
    }
    variance /= static_cast<double>(lags);
    return {mean, variance};
}

double estimate_doppler(cd lambda_mean, int n_r, double symbol_period_s) {
    if (std::abs(lambda_mean) == 0.0) throw NumericalError("zero lambda: Doppler undefined");
    if (n_r < 1 || symbol_period_s <= 0.0) throw ValidationError("bad Doppler scaling arguments");
    return std::arg(lambda_mean) / (2.0 * kPi * n_r * symbol_period_s);
}

ProblemLambda per_slice_lambda(const SparseSolution& solution, int slice_count, int cols_per_slice) {
    if (slice_count < 1 || cols_per_slice < 2)
        throw ValidationError("lambda extraction needs slices with at least 2 columns");
    ProblemLambda out;
    out.bins = solution.support;
    std::sort(out.bins.begin(), out.bins.end());
    out.mean.resize(static_cast<Eigen::Index>(out.bins.size()), slice_count);
    out.variance.resize(static_cast<Eigen::Index>(out.bins.size()), slice_count);
    for (std::size_t b = 0; b < out.bins.size(); ++b) {
        for (int s = 0; s < slice_count; ++s) {
            const Eigen::Index offset = static_cast<Eigen::Index>(s) * cols_per_slice;
            std::vector<cd> segment(static_cast<std::size_t>(cols_per_slice));
            for (int c = 0; c < cols_per_slice; ++c)
                segment[static_cast<std::size_t>(c)] = solution.amplitudes(out.bins[b], offset + c);
            const LambdaStats stats = lambda_stats(segment);
            out.mean(static_cast<Eigen::Index>(b), s) = stats.mean;
            out.variance(static_cast<Eigen::Index>(b), s) = stats.variance;
        }
    }
    return out;
}

std::vector<double> delay_thresholds(const DelayDictionary& dict, double bandwidth_hz,
                                     double reference_lambda, double reference_distance_m,
                                     double pathloss_exponent, double margin, double max_range_m) {
    if (margin <= 0.0) throw ValidationError("threshold margin must be positive");
    if (reference_lambda <= 0.0) throw ValidationError("reference lambda must be positive");
    const double ref_loss = pathloss(std::max(reference_distance_m, 1.0), pathloss_exponent);
    std::vector<double> eta(static_cast<std::size_t>(dict.columns));
    for (int q = 0; q < dict.columns; ++q) {
        const double d = dict.distance_at(q, bandwidth_hz);
        if (d > max_range_m) {
            eta[static_cast<std::size_t>(q)] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double loss = pathloss(std::max(d, 1.0), pathloss_exponent);
        eta[static_cast<std::size_t>(q)] = margin * reference_lambda * loss / ref_loss;
    }
    return eta;
}

std::vector<int> detect_delays(const ProblemLambda& lambda, const std::vector<double>& thresholds) {
    std::vector<int> detected;
    for (std::size_t b = 0; b < lambda.bins.size(); ++b) {
        const int bin = lambda.bins[b];
        if (bin < 0 || static_cast<std::size_t>(bin) >= thresholds.size())
            throw ValidationError("detection bin outside the threshold table");
        const double best = lambda.mean.row(static_cast<Eigen::Index>(b)).cwiseAbs().maxCoeff();
        if (best >= thresholds[static_cast<std::size_t>(bin)]) detected.push_back(bin);
    }
    return detected;
}

std::vector<TargetEstimate> associate_aoa(const ProblemLambda& lambda,
                                          const std::vector<int>& detected_bins,
                                          const MmvProblem& problem, const DelayDictionary& dict,
                                          double bandwidth_hz, int n_r, double symbol_period_s,
                                          double carrier_hz, const std::vector<double>& thresholds,
                                          double element_spacing) {
    if (element_spacing <= 0.0) throw ValidationError("element spacing must be positive");
    std::vector<TargetEstimate> estimates;
    for (int bin : detected_bins) {
        const auto it = std::find(lambda.bins.begin(), lambda.bins.end(), bin);
        if (it == lambda.bins.end())
            throw ValidationError("detected bin has no lambda statistics");
        const Eigen::Index row = std::distance(lambda.bins.begin(), it);

        double weight_sum = 0.0;
        double direction_sum = 0.0;
        cd lambda_sum{0.0, 0.0};
        for (int s = 0; s < lambda.mean.cols(); ++s) {
            const double magnitude = std::abs(lambda.mean(row, s));
            if (magnitude < thresholds[static_cast<std::size_t>(bin)]) continue;
            weight_sum += magnitude;
            direction_sum += magnitude * problem.slot_directions[static_cast<std::size_t>(s)];
            lambda_sum += lambda.mean(row, s);
        }
        if (weight_sum <= 0.0)
            throw NumericalError("detected bin has no contributing receive slice");

        TargetEstimate est;
        est.bin = bin;
        est.distance_m = dict.distance_at(bin, bandwidth_hz);
        est.aoa_rad = equivalent_to_actual(direction_sum / weight_sum / (2.0 * element_spacing));
        est.speed_mps =
            speed_from_doppler(estimate_doppler(lambda_sum, n_r, symbol_period_s), carrier_hz);
        est.power = weight_sum;
        estimates.push_back(est);
    }
    return estimates;
}

void postprocess_estimates(std::vector<TargetEstimate>& estimates, double pathloss_exponent,
                           double floor_db) {
    if (floor_db >= 0.0) throw ValidationError("floor_db must be negative");
    if (estimates.empty()) throw ValidationError("no estimates to post-process");
    double peak = 0.0;
    std::vector<double> compensated(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double loss = pathloss(std::max(estimates[i].distance_m, 1.0), pathloss_exponent);
        compensated[i] = estimates[i].power / loss;
        peak = std::max(peak, compensated[i]);
    }
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double db = linear_to_db(compensated[i] / peak);
        estimates[i].power_db = std::max(db, floor_db);
    }
}

Eigen::MatrixXd postprocess_map(const Eigen::MatrixXd& map, const std::vector<double>& row_distances_m,
                                double pathloss_exponent, double floor_db, double max_range_m) {
    if (floor_db >= 0.0) throw ValidationError("floor_db must be negative");
    if (map.size() == 0) throw ValidationError("empty map");
    if (static_cast<Eigen::Index>(row_distances_m.size()) != map.rows())
        throw ValidationError("one distance per map row is required");

    Eigen::MatrixXd compensated = Eigen::MatrixXd::Zero(map.rows(), map.cols());
    double peak = 0.0;
    for (Eigen::Index r = 0; r < map.rows(); ++r) {
        const double d = row_distances_m[static_cast<std::size_t>(r)];
        if (d > max_range_m) continue;
        const double loss = pathloss(std::max(d, 1.0), pathloss_exponent);
        compensated.row(r) = map.row(r) / loss;
        peak = std::max(peak, compensated.row(r).maxCoeff());
    }
    if (peak <= 0.0) throw NumericalError("post-processing found no in-range energy");

    Eigen::MatrixXd out(map.rows(), map.cols());
    for (Eigen::Index r = 0; r < map.rows(); ++r)
        for (Eigen::Index c = 0; c < map.cols(); ++c) {
            const double v = compensated(r, c);
            out(r, c) = v > 0.0 ? std::max(linear_to_db(v / peak), floor_db) : floor_db;
        }
    return out;
}

} // namespace mbjcas
