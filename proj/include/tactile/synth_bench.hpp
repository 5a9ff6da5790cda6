#pragma once

// Synthetic multi-rate recordings for virtual materials. The generator is
// the ground truth for the test suite: texture peaks are recoverable from
// the spectrum and the conductivity from the thermal feature.

#include "tactile/sensor_stream.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tactile {

inline constexpr double kBaseFlux = 100.0;  // counts, flux level at unit conductivity

struct TexturePeak {
    double frequency = 0.0;  // Hz
    double amplitude = 0.0;  // counts
};

struct MaterialSpec {
    std::string name;
    std::vector<TexturePeak> texture_peaks;
    double vib_noise = 0.0;      // counts, per vibration sample
    double conductivity = 1.0;   // kappa, relative
    std::vector<double> contact_profile;  // mean impedance delta per electrode, counts
    double flux_drift = 0.0;     // counts / s
    double flux_noise = 0.0;     // counts
    double core_temp = 2500.0;   // counts
    double electrode_noise = 0.0;  // counts, per electrode reading

    // Throws ParameterError on the first violated invariant.
    void validate(double band_lo = 4.0, double band_hi = 500.0) const;
};

struct BenchSuite {
    std::vector<MaterialSpec> specs;
    double duration_per_material = 60.0;  // s
    int folds = 10;
    std::uint64_t seed = 0;
    // Index pairs whose texture peaks are near-identical.
    std::vector<std::pair<std::size_t, std::size_t>> confusable_pairs;

    // Recording seed for material i.
    std::uint64_t recording_seed(std::size_t i) const;
};

// Resting impedance levels written into every synthetic header.
std::vector<double> synth_resting_levels(int electrode_count = kDefaultElectrodeCount);

// Deterministic in (spec, duration, seed). Flux is centered on
// conductivity * kBaseFlux so that the mean power_per_temp over the whole
// recording is conductivity * kBaseFlux * A / core_temp, where A is the
// contact area of the profile.
Recording synth_recording(const MaterialSpec& spec, double duration, std::uint64_t seed);

// Contact area implied by a spec's mean profile against the default radii.
double profile_contact_area(const MaterialSpec& spec, double e_m = -400.0);

// Eight materials: two pairs share texture peaks (within a few percent in
// amplitude) but differ 2x in conductivity; the other four are spectrally
// distinct. 60 s per material, 10 folds.
BenchSuite default_suite(std::uint64_t seed);

struct LabeledRecording {
    std::string label;
    Recording recording;
};

std::vector<LabeledRecording> synth_suite(const BenchSuite& suite);

// Suite manifest: a JSON file listing recordings (paths relative to the
// manifest's directory) with their labels.
struct ManifestEntry {
    std::string label;
    std::filesystem::path path;
};

struct Manifest {
    std::vector<ManifestEntry> recordings;
    std::optional<std::uint64_t> seed;
    std::optional<int> folds;
    std::optional<double> duration_per_material;
    std::vector<std::pair<std::string, std::string>> confusable_pairs;
};

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);
// Loads every listed recording; paths resolve against the manifest's directory.
std::vector<LabeledRecording> load_dataset(const std::filesystem::path& manifest_path, const Manifest& manifest);

// Writes one recording per spec plus manifest.json into `dir` and returns
// the manifest path. File names are "<name>.rec".
std::filesystem::path write_suite(const BenchSuite& suite, const std::filesystem::path& dir);

// Material specs from a JSON document:
// {"duration": s, "folds": n, "materials": [{"name": ..., "texture_peaks": [[f, a], ...], ...}]}
BenchSuite suite_from_json(std::string_view text, std::uint64_t seed);

}  // namespace tactile
