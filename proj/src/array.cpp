#include "mbjcas/array.hpp"

#include <cmath>

namespace mbjcas {

void ArrayConfig::validate() const {
    if (num_elements < 2) throw ValidationError("array.num_elements must be >= 2");
    if (element_spacing <= 0.0) throw ValidationError("array.element_spacing must be positive");
}

DirectionGrid DirectionGrid::full_view(int points) {
    if (points < 2) throw ValidationError("direction grid needs at least 2 points");
    DirectionGrid g;
    g.size = points;
    g.step = 2.0 / points;
    g.offset = -1.0;
    return g;
}

std::vector<double> DirectionGrid::directions() const {
    std::vector<double> out(static_cast<std::size_t>(size));
    for (int q = 0; q < size; ++q) out[static_cast<std::size_t>(q)] = direction(q);
    return out;
}

int DirectionGrid::nearest_index(double u) const {
    int q = static_cast<int>(std::lround((u - offset) / step));
    if (q < 0) q = 0;
    if (q >= size) q = size - 1;
    return q;
}

void DirectionGrid::validate() const {
    if (size < 2) throw ValidationError("direction grid needs at least 2 points");
    if (step <= 0.0) throw ValidationError("direction grid step must be positive");
}

Eigen::VectorXcd steering_vector(const ArrayConfig& config, double theta_rad) {
    config.validate();
    if (std::abs(theta_rad) > kPi / 2.0 + 1e-15)
        throw ValidationError("steering angle outside [-pi/2, pi/2]");
    const double u = 2.0 * config.element_spacing * std::sin(theta_rad);
    Eigen::VectorXcd a(config.num_elements);
    for (int m = 0; m < config.num_elements; ++m) a(m) = std::polar(1.0, kPi * m * u);
    return a;
}

Eigen::VectorXcd equivalent_response(int num_elements, double u) {
    Eigen::VectorXcd a(num_elements);
    for (int m = 0; m < num_elements; ++m) a(m) = std::polar(1.0, kPi * m * u);
    return a;
}

ResponseMatrix equivalent_response_matrix(const ArrayConfig& config, const DirectionGrid& grid) {
    config.validate();
    grid.validate();
    ResponseMatrix response;
    response.values.resize(grid.size, config.num_elements);
    for (int q = 0; q < grid.size; ++q)
        response.values.row(q) = equivalent_response(config.num_elements, grid.direction(q)).transpose();
    return response;
}

Eigen::VectorXcd radiation_pattern(const Eigen::VectorXcd& weights, const ResponseMatrix& response) {
    if (weights.size() != response.values.cols())
        throw ValidationError("radiation_pattern: weight length does not match response columns");
    return response.values * weights;
}

double half_power_beamwidth(int num_elements) {
    if (num_elements < 2) throw ValidationError("half_power_beamwidth needs M >= 2");
    return 2.0 * std::asin(1.2 / num_elements);
}

double equivalent_to_actual(double u) {
    if (std::abs(u) > 1.0) throw ValidationError("equivalent direction outside visible space (|u| > 1)");
    return std::asin(u);
}

} // namespace mbjcas
