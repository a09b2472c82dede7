#pragma once

// Central tolerance table. Every numeric gate in the library, the CLI
// checks, and the test suite reads from here, so a tolerance is pinned in
// exactly one place.
//
// Check records are oriented so that pass <=> value <= max_value; "value" is
// a violation magnitude (often a normalized negative slack), never a raw
// quantity whose sign convention the reader has to remember.

#include <cstring>
#include <limits>

namespace sqg::tol {

// Oracle agreement bounds used by the unit tests.
inline constexpr double kSpectralOracleRel = 1e-11;   // vs direct DFT sum
inline constexpr double kParsevalRel = 1e-12;
inline constexpr double kRoundTripRel = 1e-12;
inline constexpr double kBesselClosedFormRel = 1e-10;  // vs nu = 1/2 formula
inline constexpr double kRescaleResimRel = 1e-8;       // linear single mode
inline constexpr double kExtensionEnergyRel = 1e-4;    // vs seminorm oracle
inline constexpr double kMethodAgreementAbs = 1e-6;    // Bessel vs quadrature
inline constexpr double kNormalDerivativeRel = 1e-3;   // vs multiplier route

struct CheckTolerance {
  const char* check;
  double max_value;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr CheckTolerance kCheckTable[] = {
    {"run_completed", 0.0},            // 1 when the run aborted
    {"energy_balance", 1e-6},          // residual per unit time / ||theta0||_2^2
    {"monotone_l2", 1e-4},             // max relative increase across snapshots
    {"monotone_sup", 1e-4},
    {"decay_bound", kInf},             // empirical decay constant, informational
    {"level_set_slack", 1e-5},         // max(0, -slack) / ||theta0||_2^2
    {"level_set_monotone", 0.0},       // count of U_k monotonicity violations
    {"level_bound_margin", 0.0},       // (sup theta(t0) - M*) / sup theta(t0)
    {"cordoba_slack", 1e-8},           // max(0, -min slack) / scale
    {"interpolation_bound", kInf},     // max space-time ratio, informational
    {"local_energy_identity", 0.05},   // u = 0 case: |slack| / rhs
    {"local_energy_bound", kInf},      // fitted factor, informational
    {"extension_identity", 1e-3},      // normal derivative vs multiplier, rel
    {"extension_agreement", 1e-6},     // Bessel vs quadrature profile
    {"isoperimetric_variation", 0.2},  // implied-constant spread over r sweep
    {"change_of_variables", 1e-4},     // measure mismatch, relative
    {"barrier_beta0", 0.02},           // |beta0 / pi - 1| at b = 0
    {"barrier_lambda", 0.0},           // -lambda (margin must be positive)
    {"rescale_residual_ratio", 10.0},  // rescaled vs original PDE residual
    {"rescale_linear", 1e-8},          // vs re-simulation, single mode
    {"holder_delta_error", 0.03},      // |delta - delta0| on prototypes
    {"holder_positive", 0.0},          // -delta on simulation output
    {"holder_r2", 0.1},                // 1 - r^2 of the log-log fit
    {"zoom_contraction", 0.0},         // 3 - #levels with factor < 1
    {"roundtrip", 0.0},                // 1 when the round trip is not bitwise
};

/// Table lookup; returns NaN for unknown names (callers treat that as a
/// violation rather than guessing).
inline double check_tolerance(const char* check) {
  for (const CheckTolerance& t : kCheckTable)
    if (std::strcmp(t.check, check) == 0) return t.max_value;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace sqg::tol
