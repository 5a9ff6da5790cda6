#pragma once

// Thermal contact features for one window:
//   power_per_temp  mean flux times estimated contact area over core temperature
//   flux_slope      least-squares slope of flux against time
//   flux_err        RMS residual of that fit
//
// The contact area is a sum of per-electrode discs pi r_i^2, each weighted
// by how far the electrode's mean impedance dropped below its resting
// level (full weight at e_m counts below resting or deeper).

#include "tactile/sensor_stream.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace tactile {

inline constexpr double kDefaultContactThreshold = -400.0;  // e_m, counts
inline constexpr double kDefaultTemperatureFloor = 1.0;     // counts

struct ContactConfig {
    double e_m = kDefaultContactThreshold;
    std::vector<double> radii;    // mm
    std::vector<double> resting;  // counts

    static ContactConfig from_header(const RecordingHeader& header, double e_m = kDefaultContactThreshold);
    void validate() const;
};

struct ThermalFeature {
    double power_per_temp = 0.0;
    double flux_slope = 0.0;
    double flux_err = 0.0;

    Eigen::Vector3d as_vector() const { return {power_per_temp, flux_slope, flux_err}; }
};

struct FluxFit {
    double slope = 0.0;      // counts / s
    double rms_error = 0.0;  // counts
};

// Piecewise-linear contact weight in [0, 1]: 0 at or above resting, 1 at
// or below resting + e_m, linear in between. Requires e_m < 0.
double contact_scale(double e_avg, double resting, double e_m);

double contact_area(std::span<const double> e_avgs, const ContactConfig& cfg);

// OLS line through (k / sample_rate, flux_k).
FluxFit flux_regression(std::span<const double> flux, double sample_rate);

ThermalFeature thermal_feature(const SensorWindow& window, const ContactConfig& cfg,
                               double temperature_floor = kDefaultTemperatureFloor);

}  // namespace tactile
