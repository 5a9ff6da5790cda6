#include "tactile/recursive_classifier.hpp"

#include "tactile/errors.hpp"
#include "tactile/numeric.hpp"

#include <cmath>
#include <string>

namespace tactile {

namespace {

constexpr std::string_view kModule = "recursive_classifier";

// Raises every entry below `floor` to exactly `floor` and rescales the rest
// so the vector still sums to one.
void apply_floor(std::vector<double>& p, double floor)
{
    if (floor <= 0.0) {
        return;
    }
    double clamped_mass = 0.0;
    double free_mass = 0.0;
    for (double v : p) {
        if (v < floor) {
            clamped_mass += floor;
        } else {
            free_mass += v;
        }
    }
    if (clamped_mass == 0.0) {
        return;
    }
    const double scale = (1.0 - clamped_mass) / free_mass;
    for (double& v : p) {
        v = v < floor ? floor : v * scale;
    }
}

}  // namespace

PosteriorState init_uniform(std::size_t n)
{
    if (n < 2) {
        throw ParameterError(kModule, "classification needs at least 2 materials, got " + std::to_string(n));
    }
    return {std::vector<double>(n, 1.0 / static_cast<double>(n)), 0};
}

PosteriorState update_log(const PosteriorState& state, std::span<const double> log_likelihoods, double floor)
{
    const std::size_t n = state.probs.size();
    if (log_likelihoods.size() != n) {
        throw ParameterError(kModule, "got " + std::to_string(log_likelihoods.size()) +
                                          " likelihoods for " + std::to_string(n) + " materials");
    }
    if (floor < 0.0 || floor * static_cast<double>(n) >= 1.0) {
        throw ParameterError(kModule, "posterior floor must lie in [0, 1/N)");
    }
    std::vector<double> score(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(log_likelihoods[j])) {
            throw NumericError(kModule, "non-finite log-likelihood for material " + std::to_string(j));
        }
        score[j] = log_likelihoods[j] + std::log(state.probs[j]);
    }
    const double norm = log_sum_exp(score);
    if (!std::isfinite(norm)) {
        throw NumericError(kModule, "posterior normalizer is not finite");
    }
    PosteriorState next;
    next.probs.resize(n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        next.probs[j] = std::exp(score[j] - norm);
        sum += next.probs[j];
    }
    for (double& p : next.probs) {
        p /= sum;
    }
    apply_floor(next.probs, floor);
    next.step = state.step + 1;
    return next;
}

std::vector<double> material_log_likelihoods(const VibrationFeature& rho, const ThermalFeature* theta,
                                             std::span<const MaterialModel> models)
{
    std::vector<double> out(models.size());
    const Eigen::Vector3d thermal = theta != nullptr ? theta->as_vector() : Eigen::Vector3d::Zero();
    for (std::size_t j = 0; j < models.size(); ++j) {
        const MaterialModel& m = models[j];
        if (static_cast<std::size_t>(rho.rho_bar.size()) != m.vibration.dim()) {
            throw ShapeError(kModule, "vibration feature of length " + std::to_string(rho.rho_bar.size()) +
                                          " for a model over R^" + std::to_string(m.vibration.dim()));
        }
        const double lv = m.vibration.log_likelihood(rho.rho_bar);
        if (!std::isfinite(lv)) {
            throw NumericError(kModule, "non-finite vibration likelihood for material '" + m.name + "'");
        }
        double total = lv;
        if (theta != nullptr) {
            if (!m.thermal) {
                throw ShapeError(kModule, "material '" + m.name + "' has no thermal model");
            }
            const double lt = m.thermal->log_likelihood(thermal);
            if (!std::isfinite(lt)) {
                throw NumericError(kModule, "non-finite thermal likelihood for material '" + m.name + "'");
            }
            total += lt;
        }
        out[j] = total;
    }
    return out;
}

PosteriorState update(const PosteriorState& state, const VibrationFeature& rho, const ThermalFeature* theta,
                      std::span<const MaterialModel> models, double floor)
{
    if (models.size() != state.probs.size()) {
        throw ParameterError(kModule, std::to_string(models.size()) + " models for a posterior over " +
                                          std::to_string(state.probs.size()) + " materials");
    }
    const auto ll = material_log_likelihoods(rho, theta, models);
    return update_log(state, ll, floor);
}

Decision classify(const PosteriorState& state, std::optional<double> threshold)
{
    Decision d;
    if (state.probs.empty()) {
        return d;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < state.probs.size(); ++j) {
        if (state.probs[j] > state.probs[best]) {
            best = j;
        }
    }
    d.confidence = state.probs[best];
    for (std::size_t j = 0; j < state.probs.size(); ++j) {
        if (j != best && state.probs[j] == d.confidence) {
            d.tie = true;
        }
    }
    if (!threshold || d.confidence >= *threshold) {
        d.material_index = best;
    }
    return d;
}

}  // namespace tactile
