#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace mbjcas {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Propagation speed used throughout; the Doppler convention f_D = v * f_c / 3e8
// assumes exactly this value, so do not "improve" it to the CODATA constant.
inline constexpr double kSpeedOfLight = 3.0e8;

/// Bad inputs or configuration (CLI exit code 2).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failures such as singular designs (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Execution policy for the data-parallel kernels. Serial is the reference
/// path kept for testing; Parallel uses OpenMP and is bit-identical to it.
enum class Exec { Serial, Parallel };

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

} // namespace mbjcas
