#include "tactile/thermal_features.hpp"

#include "tactile/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tactile {

namespace {

constexpr std::string_view kModule = "thermal_features";

}  // namespace

ContactConfig ContactConfig::from_header(const RecordingHeader& header, double e_m)
{
    ContactConfig cfg;
    cfg.e_m = e_m;
    cfg.radii = header.electrode_radii;
    cfg.resting = header.electrode_resting;
    cfg.validate();
    return cfg;
}

void ContactConfig::validate() const
{
    if (!(e_m < 0.0)) {
        throw ParameterError(kModule, "contact threshold e_m must be negative, got " + format_double(e_m));
    }
    if (radii.size() != resting.size()) {
        throw ParameterError(kModule, "contact config has " + std::to_string(radii.size()) + " radii but " +
                                          std::to_string(resting.size()) + " resting levels");
    }
    for (double r : radii) {
        if (!(r > 0.0)) {
            throw ParameterError(kModule, "electrode radii must be positive");
        }
    }
}

double contact_scale(double e_avg, double resting, double e_m)
{
    const double delta = e_avg - resting;
    if (delta >= 0.0) {
        return 0.0;
    }
    if (delta <= e_m) {
        return 1.0;
    }
    return delta / e_m;
}

double contact_area(std::span<const double> e_avgs, const ContactConfig& cfg)
{
    if (e_avgs.size() != cfg.radii.size() || e_avgs.size() != cfg.resting.size()) {
        throw ParameterError(kModule, "contact_area given " + std::to_string(e_avgs.size()) +
                                          " electrode values for " + std::to_string(cfg.radii.size()) +
                                          " electrodes");
    }
    double area = 0.0;
    for (std::size_t i = 0; i < e_avgs.size(); ++i) {
        const double lambda = contact_scale(e_avgs[i], cfg.resting[i], cfg.e_m);
        area += lambda * std::numbers::pi * cfg.radii[i] * cfg.radii[i];
    }
    return area;
}

FluxFit flux_regression(std::span<const double> flux, double sample_rate)
{
    const std::size_t n = flux.size();
    if (n < 2) {
        throw ParameterError(kModule, "flux regression needs at least 2 samples, got " + std::to_string(n));
    }
    if (!(sample_rate > 0.0)) {
        throw ParameterError(kModule, "flux sample rate must be positive");
    }
    const double count = static_cast<double>(n);
    const double t_mean = (count - 1.0) / (2.0 * sample_rate);
    double f_mean = 0.0;
    double f_abs = 0.0;
    for (double f : flux) {
        f_mean += f;
        f_abs += std::abs(f);
    }
    f_mean /= count;
    f_abs /= count;

    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dt = static_cast<double>(k) / sample_rate - t_mean;
        sxx += dt * dt;
        sxy += dt * (flux[k] - f_mean);
    }
    FluxFit fit;
    fit.slope = sxy / sxx;

    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dt = static_cast<double>(k) / sample_rate - t_mean;
        const double r = flux[k] - (f_mean + fit.slope * dt);
        ss += r * r;
    }
    fit.rms_error = std::sqrt(ss / count);

    // Residuals at the rounding level of the inputs are reported as an exact fit.
    const double span = static_cast<double>(n - 1) / sample_rate;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (f_abs + std::abs(fit.slope) * span);
    if (fit.rms_error <= floor) {
        fit.rms_error = 0.0;
    }
    return fit;
}

ThermalFeature thermal_feature(const SensorWindow& window, const ContactConfig& cfg, double temperature_floor)
{
    const auto ticks = window.ticks();
    if (ticks.size() < 2) {
        throw ParameterError(kModule, "thermal features need at least 2 ticks per window");
    }
    const std::size_t ne = cfg.radii.size();
    const double n = static_cast<double>(ticks.size());

    double flux_mean = 0.0;
    double temp_mean = 0.0;
    std::vector<double> e_mean(ne, 0.0);
    std::vector<double> flux;
    flux.reserve(ticks.size());
    for (const Tick& t : ticks) {
        if (t.electrodes.size() != ne) {
            throw ParameterError(kModule, "tick has " + std::to_string(t.electrodes.size()) +
                                              " electrode values, contact config has " + std::to_string(ne));
        }
        flux_mean += t.flux;
        temp_mean += t.core_temp;
        flux.push_back(t.flux);
        for (std::size_t i = 0; i < ne; ++i) {
            e_mean[i] += t.electrodes[i];
        }
    }
    flux_mean /= n;
    temp_mean /= n;
    for (double& e : e_mean) {
        e /= n;
    }
    if (!(temp_mean >= temperature_floor)) {
        throw SensorFault(kModule, "temperature underflow: mean core temperature " + format_double(temp_mean) +
                                       " is below the floor " + format_double(temperature_floor));
    }

    const FluxFit fit = flux_regression(flux, window.header().lowrate);
    ThermalFeature out;
    out.power_per_temp = flux_mean * contact_area(e_mean, cfg) / temp_mean;
    out.flux_slope = fit.slope;
    out.flux_err = fit.rms_error;
    return out;
}

}  // namespace tactile
