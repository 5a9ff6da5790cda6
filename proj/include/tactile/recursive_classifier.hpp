#pragma once

// Recursive Bayesian material estimation. Each window's posterior becomes
// the next window's prior; vibration and thermal likelihoods are fused
// assuming conditional independence given the material.

#include "tactile/material_models.hpp"
#include "tactile/thermal_features.hpp"
#include "tactile/vibration_features.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tactile {

inline constexpr double kDefaultPosteriorFloor = 1e-12;

struct PosteriorState {
    std::vector<double> probs;
    std::size_t step = 0;
};

struct Decision {
    std::optional<std::size_t> material_index;  // empty when undecided
    double confidence = 0.0;                    // max posterior
    bool tie = false;

    bool undecided() const { return !material_index.has_value(); }
};

PosteriorState init_uniform(std::size_t n);

// Core update on per-material log-likelihoods of the current window.
// floor = 0 reproduces the unclamped update exactly.
PosteriorState update_log(const PosteriorState& state, std::span<const double> log_likelihoods,
                          double floor = kDefaultPosteriorFloor);

// Per-material log p(rho|m) [+ log p(theta|m)]; theta == nullptr skips the
// thermal term. Throws NumericError naming material and modality when a
// likelihood is not finite.
std::vector<double> material_log_likelihoods(const VibrationFeature& rho, const ThermalFeature* theta,
                                             std::span<const MaterialModel> models);

PosteriorState update(const PosteriorState& state, const VibrationFeature& rho, const ThermalFeature* theta,
                      std::span<const MaterialModel> models, double floor = kDefaultPosteriorFloor);

// Argmax with lowest-index tie break; undecided below the threshold.
Decision classify(const PosteriorState& state, std::optional<double> threshold = std::nullopt);

}  // namespace tactile
