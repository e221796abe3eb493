#include "mbjcas/beamforming.hpp"

#include <algorithm>
#include <cmath>

namespace mbjcas {

namespace {

constexpr double kRankCutoff = 1e-12;
constexpr double kNullLevel = 0.0316227766016838; // -30 dB in amplitude

Eigen::VectorXcd phase_of(const Eigen::VectorXcd& x) {
    Eigen::VectorXcd p(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x(i));
        p(i) = mag > 1e-300 ? x(i) / mag : cd{1.0, 0.0};
    }
    return p;
}

} // namespace

BeamVector::BeamVector(Eigen::VectorXcd coeffs) : coeffs_(std::move(coeffs)) {
    const double n = coeffs_.norm();
    if (!(n > 1e-300)) throw NumericalError("beam vector has (near) zero norm");
    coeffs_ /= n;
}

void DesiredMagnitude::validate() const {
    if (values.size() == 0) throw ValidationError("desired magnitude is empty");
    if ((values.array() < 0.0).any()) throw ValidationError("desired magnitude has negative entries");
    if (values.maxCoeff() <= 0.0) throw ValidationError("desired magnitude is all zero");
}

PhaseVector PhaseVector::ones(int size) {
    PhaseVector p;
    p.phases = Eigen::VectorXcd::Ones(size);
    return p;
}

void PhaseVector::validate() const {
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        if (std::abs(std::abs(phases(i)) - 1.0) > 1e-12)
            throw ValidationError("phase vector entries must have unit modulus");
}

WeightMatrix::WeightMatrix(Eigen::VectorXd diagonal) : diag_(std::move(diagonal)) {
    if (diag_.size() == 0) throw ValidationError("weighting diagonal is empty");
    if ((diag_.array() <= 0.0).any()) throw ValidationError("weighting diagonal must be positive");
    diag_ /= std::sqrt(diag_.squaredNorm() / static_cast<double>(diag_.size()));
}

WeightMatrix WeightMatrix::identity(int size) {
    return WeightMatrix(Eigen::VectorXd::Ones(size));
}

WeightMatrix WeightMatrix::exponential_taper(int size, double decay) {
    if (decay <= 0.0) throw ValidationError("taper decay must be positive");
    Eigen::VectorXd d(size);
    const int center = size / 2;
    for (int q = 0; q < size; ++q) d(q) = std::exp(std::abs(q - center) / decay);
    return WeightMatrix(std::move(d));
}

void CombineSpec::validate() const {
    if (rho < 0.0 || rho > 1.0) throw ValidationError("combine.rho must lie in [0, 1]");
    if (std::abs(comm_direction) > 1.0)
        throw ValidationError("combine.comm_direction outside visible space");
}

GeneralizedLsSolver::GeneralizedLsSolver(const ResponseMatrix& response,
                                         const WeightMatrix& weighting)
    : weight_diag_(weighting.diagonal()) {
    if (weighting.size() != response.directions())
        throw ValidationError("weighting size does not match response directions");
    weighted_response_ = weight_diag_.asDiagonal() * response.values;
    svd_.compute(weighted_response_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd_.setThreshold(kRankCutoff);
    const auto& sv = svd_.singularValues();
    if (sv(sv.size() - 1) <= kRankCutoff * sv(0))
        throw NumericalError("singular design: weighted response matrix is rank deficient");
}

GeneralizedLsResult GeneralizedLsSolver::solve(const Eigen::VectorXcd& target) const {
    if (target.size() != weighted_response_.rows())
        throw ValidationError("target length does not match response directions");
    const Eigen::VectorXcd weighted_target = weight_diag_.asDiagonal() * target;
    BeamVector weights(svd_.solve(weighted_target));
    // Stationary value of the complex gain from the Wirtinger derivative.
    const Eigen::VectorXcd fit = weighted_response_ * weights.coeffs();
    const cd scale = fit.dot(weighted_target) / fit.squaredNorm();
    return {std::move(weights), scale};
}

double GeneralizedLsSolver::weighted_residual(const Eigen::VectorXcd& weights, cd scale,
                                              const Eigen::VectorXcd& target) const {
    const Eigen::VectorXcd err =
        scale * (weighted_response_ * weights) - weight_diag_.asDiagonal() * target;
    return err.norm();
}

GeneralizedLsResult generalized_ls(const ResponseMatrix& response, const Eigen::VectorXcd& target,
                                   const WeightMatrix& weighting) {
    return GeneralizedLsSolver(response, weighting).solve(target);
}

IlsResult ils_design(const ResponseMatrix& response, const DesiredMagnitude& target,
                     const WeightMatrix& weighting, const PhaseVector& init_phase,
                     const IlsOptions& options) {
    target.validate();
    init_phase.validate();
    if (options.max_iter < 1) throw ValidationError("ils max_iter must be >= 1");
    if (target.values.size() != response.directions() ||
        init_phase.phases.size() != response.directions())
        throw ValidationError("ils target/phase length does not match response directions");

    GeneralizedLsSolver solver(response, weighting);

    PhaseVector phase = init_phase;
    IlsResult result{BeamVector(Eigen::VectorXcd::Ones(response.elements())), phase, {}, false};
    double prev_residual = 0.0;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        const Eigen::VectorXcd phased_target =
            target.values.array() * phase.phases.array();
        GeneralizedLsResult ls = solver.solve(phased_target);
        const double residual =
            solver.weighted_residual(ls.weights.coeffs(), ls.scale, phased_target);
        result.weights = ls.weights;
        result.final_phase = phase;
        result.residual_history.push_back(residual);
        if (iter > 0 && std::abs(prev_residual - residual) < options.tol) {
            result.converged = true;
            break;
        }
        prev_residual = residual;
        phase.phases = phase_of(response.values * ls.weights.coeffs());
    }
    return result;
}

namespace {

// First local minimum of |pattern| below -30 dB of the peak, walking from
// the peak in the given direction. The target mainlobe is taken strictly
// between the two minima.
int walk_to_null(const Eigen::VectorXd& magnitude, int peak, int step) {
    const double cutoff = magnitude(peak) * kNullLevel;
    int i = peak + step;
    while (i + step >= 0 && i + step < magnitude.size()) {
        const bool local_min = magnitude(i) <= magnitude(i - step) && magnitude(i) <= magnitude(i + step);
        if (local_min && magnitude(i) <= cutoff) return i;
        i += step;
    }
    throw NumericalError("mainlobe null not found within the direction grid");
}

} // namespace

BeamVector reference_subbeam(const ArrayConfig& config, const DirectionGrid& grid,
                             int shape_source_elements, const WeightMatrix& weighting,
                             const IlsOptions& options) {
    if (shape_source_elements < 2 || shape_source_elements > config.num_elements)
        throw ValidationError("shape_source_elements must lie in [2, num_elements]");

    ArrayConfig shape_config{shape_source_elements, config.element_spacing};
    const ResponseMatrix shape_response = equivalent_response_matrix(shape_config, grid);
    const Eigen::VectorXcd uniform =
        Eigen::VectorXcd::Ones(shape_source_elements) / std::sqrt(double(shape_source_elements));
    const Eigen::VectorXd magnitude = radiation_pattern(uniform, shape_response).cwiseAbs();

    int peak = 0;
    magnitude.maxCoeff(&peak);
    const int left = walk_to_null(magnitude, peak, -1);
    const int right = walk_to_null(magnitude, peak, +1);

    DesiredMagnitude target;
    target.values = Eigen::VectorXd::Zero(grid.size);
    for (int q = left + 1; q < right; ++q) target.values(q) = magnitude(q);

    const ResponseMatrix response = equivalent_response_matrix(config, grid);
    return ils_design(response, target, weighting, PhaseVector::ones(grid.size), options).weights;
}

BeamVector displace(const BeamVector& beam, int delta_steps, const DirectionGrid& grid) {
    grid.validate();
    Eigen::VectorXcd shifted = beam.coeffs();
    for (int m = 0; m < shifted.size(); ++m)
        shifted(m) *= std::polar(1.0, -kPi * m * delta_steps * grid.step);
    return BeamVector(std::move(shifted));
}

BeamVector combine_method1(const BeamVector& comm_beam, const BeamVector& sensing_beam,
                           const CombineSpec& spec) {
    spec.validate();
    if (spec.method != CombineMethod::Separated)
        throw ValidationError("combine_method1 requires the Separated method");
    if (comm_beam.size() != sensing_beam.size())
        throw ValidationError("subbeam sizes differ");

    const Eigen::VectorXcd a = equivalent_response(comm_beam.size(), spec.comm_direction);
    const cd g_c = a.transpose() * comm_beam.coeffs();
    const cd g_s = a.transpose() * sensing_beam.coeffs();
    const double mag = std::abs(g_c * g_s);
    if (mag < 1e-12)
        throw NumericalError("degenerate alignment: sensing beam has a null at the comm direction");

    const cd align = g_c * std::conj(g_s) / mag;
    const Eigen::VectorXcd combined = std::sqrt(spec.rho) * comm_beam.coeffs() +
                                      std::sqrt(1.0 - spec.rho) * align * sensing_beam.coeffs();
    return BeamVector(combined);
}

DesiredMagnitude joint_target(const BeamVector& comm_beam, const BeamVector& sensing_beam,
                              double rho, const ResponseMatrix& response) {
    const Eigen::VectorXd d_c = radiation_pattern(comm_beam.coeffs(), response).cwiseAbs();
    const Eigen::VectorXd d_s = radiation_pattern(sensing_beam.coeffs(), response).cwiseAbs();
    DesiredMagnitude target;
    target.values = (std::sqrt(rho) * d_c).cwiseMax(std::sqrt(1.0 - rho) * d_s);
    return target;
}

IlsResult combine_method2(const BeamVector& comm_beam, const BeamVector& sensing_beam,
                          const CombineSpec& spec, const ResponseMatrix& response,
                          const WeightMatrix& weighting, const IlsOptions& options) {
    spec.validate();
    if (spec.method != CombineMethod::Joint)
        throw ValidationError("combine_method2 requires the Joint method");
    const DesiredMagnitude target = joint_target(comm_beam, sensing_beam, spec.rho, response);
    return ils_design(response, target, weighting, PhaseVector::ones(response.directions()), options);
}

std::vector<int> scan_schedule(double u_min, double u_max, int beamwidth_elements, int n_t,
                               const DirectionGrid& grid) {
    if (n_t < 1) throw ValidationError("scan schedule needs n_t >= 1");
    if (!(u_min < u_max)) throw ValidationError("scan coverage is empty");
    if (u_min < -1.0 || u_max > 1.0) throw ValidationError("scan coverage outside [-1, 1]");
    if (beamwidth_elements < 2) throw ValidationError("beamwidth_elements must be >= 2");
    grid.validate();

    const double mid = 0.5 * (u_min + u_max);
    const int mid_steps = static_cast<int>(std::lround(mid / grid.step));
    if (n_t == 1) return {mid_steps};

    // 3 dB width in the sin-domain, widened when it cannot span the coverage.
    const double width = 2.0 * std::sin(half_power_beamwidth(beamwidth_elements) / 2.0);
    const double span = u_max - u_min;
    const double spacing_u = std::max(width, (span - width) / n_t);
    const int spacing = std::max(1, static_cast<int>(std::lround(spacing_u / grid.step)));

    std::vector<int> deltas;
    deltas.reserve(static_cast<std::size_t>(n_t));
    if (n_t % 2 == 0) {
        for (int k = -n_t / 2; k <= n_t / 2; ++k) {
            if (k == 0) continue; // midpoint slot belongs to the communication subbeam
            deltas.push_back(mid_steps + k * spacing);
        }
    } else {
        for (int k = -(n_t - 1) / 2; k <= (n_t - 1) / 2; ++k) deltas.push_back(mid_steps + k * spacing);
    }
    for (int d : deltas)
        if (std::abs(d * grid.step) > 1.0)
            throw ValidationError("scan schedule leaves the visible space; reduce n_t or coverage");
    return deltas;
}

} // namespace mbjcas
