#include "support.hpp"

#include "tactile/errors.hpp"
#include "tactile/model_file.hpp"
#include "tactile/synth_bench.hpp"
#include "tactile/training.hpp"

#include <doctest.h>

using namespace tactile;

namespace {

std::vector<MaterialWindows> training_windows(const std::vector<LabeledRecording>& data, const PipelineConfig& cfg)
{
    std::vector<MaterialWindows> out;
    for (const auto& r : data) {
        out.push_back({r.label, extract_features(r.recording.data_ticks(), r.recording.header, cfg, true)});
    }
    return out;
}

TrainedModel small_model(std::uint64_t seed)
{
    BenchSuite suite = default_suite(seed);
    suite.duration_per_material = 8.0;
    PipelineConfig cfg;
    cfg.seed = seed;
    return train_model(training_windows(synth_suite(suite), cfg), SensorLayout{}, cfg, true);
}

}  // namespace

TEST_CASE("modality names")
{
    CHECK(parse_modality("vibration") == Modality::Vibration);
    CHECK(parse_modality("multimodal") == Modality::MultiModal);
    CHECK(to_string(Modality::MultiModal) == "multimodal");
    CHECK_THROWS_AS(parse_modality("thermal"), ParameterError);
}

TEST_CASE("pipeline config validation")
{
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.pca_variance = 1.01;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = PipelineConfig{};
    cfg.band = {500.0, 4.0};
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = PipelineConfig{};
    cfg.vibration_knee.k_max = 0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("trained model invariants")
{
    const TrainedModel m = small_model(2);
    CHECK(m.size() == 8);
    CHECK(m.has_thermal);
    CHECK(m.projection.retained_variance >= 0.97);
    CHECK(m.projection.bins() == 124);
    for (const MaterialModel& mm : m.materials) {
        CHECK(mm.vibration.dim() == m.projection.dim());
        REQUIRE(mm.thermal);
        CHECK(mm.thermal->dim() == 3);
        CHECK(mm.vibration.components() >= 1);
        CHECK(mm.vibration.components() <= 4);
    }
    CHECK(m.index_of("wood") == 7u);
    CHECK_FALSE(m.index_of("glass"));
}

TEST_CASE("model file round trip is byte-exact")
{
    const TrainedModel m = small_model(3);
    const std::string a = model_to_json(m);
    const TrainedModel back = model_from_json(a);
    CHECK(model_to_json(back) == a);
    CHECK(back.layout == m.layout);
    CHECK(back.projection.basis == m.projection.basis);
    CHECK(back.materials[2].vibration.covariances()[0] == m.materials[2].vibration.covariances()[0]);
    CHECK(model_to_json(small_model(3)) == a);
}

TEST_CASE("model file rejects unknown versions and bad shapes")
{
    auto j = nlohmann::json::parse(model_to_json(small_model(4)));
    auto v = j;
    v["version"] = 2;
    CHECK_THROWS_AS(model_from_json(v.dump()), FormatError);
    auto d = j;
    d["projection"]["d"] = d["projection"]["d"].get<int>() + 1;
    CHECK_THROWS_AS(model_from_json(d.dump()), FormatError);
    CHECK_THROWS_AS(model_from_json("{"), FormatError);
}

TEST_CASE("window log-likelihoods need a thermal model for multi-modal use")
{
    TrainedModel m = small_model(5);
    const auto rec = synth_recording(default_suite(5).specs[1], 1.0, 99);
    const auto feats = extract_features(rec.ticks, rec.header, m.config, true);
    const auto ll = window_log_likelihoods(m, feats, Modality::MultiModal);
    REQUIRE(ll.size() == 4);
    CHECK(ll[0].size() == 8);
    for (auto& mm : m.materials) {
        mm.thermal.reset();
    }
    m.has_thermal = false;
    CHECK_THROWS_AS(window_log_likelihoods(m, feats, Modality::MultiModal), ShapeError);
    CHECK_NOTHROW(window_log_likelihoods(m, feats, Modality::Vibration));
}

TEST_CASE("a sensor fault drops only that window's thermal feature")
{
    Recording rec = synth_recording(default_suite(5).specs[0], 1.0, 3);
    for (std::size_t k = 25; k < 50; ++k) {
        rec.ticks[k].core_temp = 0.0;
    }
    const auto feats = extract_features(rec.ticks, rec.header, PipelineConfig{}, true);
    REQUIRE(feats.size() == 4);
    CHECK(feats[0].thermal.has_value());
    CHECK_FALSE(feats[1].thermal.has_value());
    CHECK(feats[2].thermal.has_value());
    CHECK_FALSE(extract_features(rec.ticks, rec.header, PipelineConfig{}, false)[0].thermal.has_value());
}
