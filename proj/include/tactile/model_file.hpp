#pragma once

// Versioned JSON model file. Doubles are written in shortest round-trip
// form, so write -> read -> write reproduces the same bytes.

#include "tactile/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace tactile {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

std::string model_to_json(const TrainedModel& model);
// Throws FormatError on unknown versions or inconsistent dimensions.
TrainedModel model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace tactile
