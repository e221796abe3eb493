#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mbjcas/array.hpp"
#include "mbjcas/types.hpp"

namespace mbjcas {

/// Unit-power antenna weight vector; construction normalizes to ||w|| = 1.
class BeamVector {
public:
    explicit BeamVector(Eigen::VectorXcd coeffs);

    const Eigen::VectorXcd& coeffs() const { return coeffs_; }
    int size() const { return static_cast<int>(coeffs_.size()); }

private:
    Eigen::VectorXcd coeffs_;
};

/// Magnitude-only pattern target, the diagonal of D_v.
struct DesiredMagnitude {
    Eigen::VectorXd values;

    void validate() const;
};

/// Unit-modulus phase vector paired with a DesiredMagnitude.
struct PhaseVector {
    Eigen::VectorXcd phases;

    static PhaseVector ones(int size);
    void validate() const;
};

/// Positive diagonal weighting with mean squared diagonal normalized to 1.
class WeightMatrix {
public:
    explicit WeightMatrix(Eigen::VectorXd diagonal);

    static WeightMatrix identity(int size);
    /// Diagonal proportional to exp(|q - center| / decay); heavy weight on the
    /// far pattern samples pushes the fit error out of the sidelobe region.
    static WeightMatrix exponential_taper(int size, double decay);

    const Eigen::VectorXd& diagonal() const { return diag_; }
    int size() const { return static_cast<int>(diag_.size()); }

private:
    Eigen::VectorXd diag_;
};

enum class CombineMethod { Separated, Joint };

/// How to merge the communication and sensing subbeams into one transmit vector.
struct CombineSpec {
    double rho = 0.5;            // energy fraction assigned to the communication subbeam
    double comm_direction = 0.0; // equivalent direction (sin-domain) of the communication node
    CombineMethod method = CombineMethod::Separated;

    void validate() const;
};

struct GeneralizedLsResult {
    BeamVector weights;
    cd scale; // the optimal complex gain c_s at the solution
};

/**
 * @brief Unit-power weighted least squares pattern fit.
 *
 * Solves min over (w, c_s) of ||D (c_s A w - v)||^2 subject to ||w|| = 1.
 * The solution is the normalized R2^{-1} (DA)^H D v with R2 = (DA)^H (DA),
 * computed here through an SVD of DA with relative cutoff 1e-12. The SVD is
 * factored once so the iterative magnitude-only fit can reuse it.
 */
class GeneralizedLsSolver {
public:
    GeneralizedLsSolver(const ResponseMatrix& response, const WeightMatrix& weighting);

    GeneralizedLsResult solve(const Eigen::VectorXcd& target) const;

    /// ||D (c_s A w - v)||_2 for a candidate solution.
    double weighted_residual(const Eigen::VectorXcd& weights, cd scale,
                             const Eigen::VectorXcd& target) const;

    const Eigen::MatrixXcd& weighted_response() const { return weighted_response_; }

private:
    Eigen::MatrixXcd weighted_response_; // D * A
    Eigen::VectorXd weight_diag_;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd_;
};

GeneralizedLsResult generalized_ls(const ResponseMatrix& response, const Eigen::VectorXcd& target,
                                   const WeightMatrix& weighting);

struct IlsOptions {
    double tol = 1e-8; // stop when the weighted residual changes less than this
    int max_iter = 200;
};

struct IlsResult {
    BeamVector weights;
    PhaseVector final_phase;
    std::vector<double> residual_history; // one weighted residual per iteration, non-increasing
    bool converged = false;
};

/**
 * @brief Two-step iterative least squares fit to a magnitude-only target.
 *
 * Alternates (i) the unit-power LS fit for the current phased target and
 * (ii) re-extraction of the target phase from the achieved pattern.
 * Convergence is not guaranteed in theory, hence the iteration cap and the
 * exposed residual history.
 */
IlsResult ils_design(const ResponseMatrix& response, const DesiredMagnitude& target,
                     const WeightMatrix& weighting, const PhaseVector& init_phase,
                     const IlsOptions& options = {});

/**
 * @brief Reference subbeam pointing at equivalent direction 0.
 *
 * The magnitude target is the mainlobe of a uniform shape_source_elements
 * pattern (samples between the first nulls around u = 0, zeros elsewhere),
 * fitted on the full array with the iterative LS design.
 */
BeamVector reference_subbeam(const ArrayConfig& config, const DirectionGrid& grid,
                             int shape_source_elements, const WeightMatrix& weighting,
                             const IlsOptions& options = {});

/// Shifts the pattern by delta grid steps in the sin-domain:
/// coeffs[m] *= exp(-j*pi*m*delta*step). Exact on grid indices.
BeamVector displace(const BeamVector& beam, int delta_steps, const DirectionGrid& grid);

/**
 * @brief Separated design: phase-align the sensing beam at the communication
 * direction, then combine sqrt(rho) w_c + sqrt(1-rho) w_s and renormalize.
 *
 * Throws NumericalError when the sensing beam has a null at the communication
 * direction (nothing to align against).
 */
BeamVector combine_method1(const BeamVector& comm_beam, const BeamVector& sensing_beam,
                           const CombineSpec& spec);

/// Element-wise max of the two scaled subbeam magnitudes; the joint design's target.
DesiredMagnitude joint_target(const BeamVector& comm_beam, const BeamVector& sensing_beam,
                              double rho, const ResponseMatrix& response);

/// Joint design: one ILS run on the max-combined magnitude target.
IlsResult combine_method2(const BeamVector& comm_beam, const BeamVector& sensing_beam,
                          const CombineSpec& spec, const ResponseMatrix& response,
                          const WeightMatrix& weighting, const IlsOptions& options = {});

/**
 * @brief Scanning lattice for the sensing subbeam, as displacement steps.
 *
 * Directions are spaced at the subbeam's 3 dB sin-domain width (widened if
 * needed to cover the span), symmetric around the coverage midpoint. With an
 * even beam count the midpoint slot is left out: the communication subbeam
 * already senses that direction.
 */
std::vector<int> scan_schedule(double u_min, double u_max, int beamwidth_elements, int n_t,
                               const DirectionGrid& grid);

} // namespace mbjcas
