#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mbjcas/types.hpp"

namespace mbjcas {

/// Uniform linear array: M isotropic elements spaced in wavelengths.
struct ArrayConfig {
    int num_elements = 16;
    double element_spacing = 0.5; // wavelengths

    void validate() const;
};

/**
 * @brief Equally spaced grid of equivalent directions u = offset + q * step.
 *
 * An equivalent direction corresponds to sin(theta) at half-wavelength
 * spacing; patterns shift uniformly on this axis, which is what makes
 * integer-step beam displacement exact.
 */
struct DirectionGrid {
    int size = 0;
    double step = 0.0;
    double offset = 0.0;

    /// K points uniform over [-1, 1): step 2/K, offset -1.
    static DirectionGrid full_view(int points);

    double direction(int q) const { return offset + q * step; }
    std::vector<double> directions() const;
    int nearest_index(double u) const;
    void validate() const;
};

/// Array response evaluated over a direction grid; rows are a_q^T.
struct ResponseMatrix {
    Eigen::MatrixXcd values; // K x M, unit-modulus entries, first column all ones

    int directions() const { return static_cast<int>(values.rows()); }
    int elements() const { return static_cast<int>(values.cols()); }
};

/// a(theta): element m is exp(j*pi*2*spacing*m*sin(theta)). Throws for |theta| > pi/2.
Eigen::VectorXcd steering_vector(const ArrayConfig& config, double theta_rad);

/// Response at one equivalent direction: element m is exp(j*pi*m*u).
Eigen::VectorXcd equivalent_response(int num_elements, double u);

ResponseMatrix equivalent_response_matrix(const ArrayConfig& config, const DirectionGrid& grid);

/// Pattern A*w over the grid.
Eigen::VectorXcd radiation_pattern(const Eigen::VectorXcd& weights, const ResponseMatrix& response);

/// 3 dB beamwidth approximation 2*arcsin(1.2/M) in radians.
double half_power_beamwidth(int num_elements);

/// arcsin(u); throws when |u| > 1 (scan direction outside visible space).
double equivalent_to_actual(double u);

} // namespace mbjcas
