#pragma once

// Feature extraction over whole recordings and fitting of the shared
// projection plus per-material mixtures. Used by both the CLI trainer and
// the cross-validation harness.

#include "tactile/material_models.hpp"
#include "tactile/recursive_classifier.hpp"
#include "tactile/sensor_stream.hpp"
#include "tactile/thermal_features.hpp"
#include "tactile/vibration_features.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tactile {

enum class Modality { Vibration, MultiModal };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

struct PipelineConfig {
    double dt = kDefaultWindowSeconds;
    Band band;
    double pca_variance = kDefaultVarianceTarget;
    KneeSettings vibration_knee;
    KneeSettings thermal_knee;
    EmSettings em;
    double e_m = kDefaultContactThreshold;
    double temperature_floor = kDefaultTemperatureFloor;
    double posterior_floor = kDefaultPosteriorFloor;
    std::uint64_t seed = 0;

    void validate() const;
};

struct WindowFeatures {
    Spectrum spectrum;
    std::optional<ThermalFeature> thermal;  // empty when not computed or sensor fault
};

// Features of every full window in `ticks`. Thermal features are only
// computed when `with_thermal` is set; windows with a sensor fault get none.
std::vector<WindowFeatures> extract_features(std::span<const Tick> ticks, const RecordingHeader& header,
                                             const PipelineConfig& config, bool with_thermal);

// Training windows of one material, possibly gathered from several
// recordings or segments.
struct MaterialWindows {
    std::string label;
    std::vector<WindowFeatures> windows;
};

struct SensorLayout {
    int vibration_rate = kDefaultVibrationRate;
    int lowrate = kDefaultLowRate;
    int electrode_count = kDefaultElectrodeCount;

    bool operator==(const SensorLayout&) const = default;
};

struct TrainedModel {
    SensorLayout layout;
    PipelineConfig config;
    ProjectionModel projection;
    std::vector<MaterialModel> materials;
    bool has_thermal = false;

    std::size_t size() const { return materials.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;
};

// Fits the projection on every training spectrum, then one vibration (and,
// when with_thermal, one thermal) mixture per material.
TrainedModel train_model(std::span<const MaterialWindows> data, const SensorLayout& layout,
                         const PipelineConfig& config, bool with_thermal);

// Per-material log-likelihoods of each window under the model.
std::vector<std::vector<double>> window_log_likelihoods(const TrainedModel& model,
                                                        std::span<const WindowFeatures> windows,
                                                        Modality modality);

}  // namespace tactile
