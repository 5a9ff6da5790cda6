#pragma once

// Multi-rate tactile recordings: data model, text file format, and
// slicing into non-overlapping analysis windows.
//
// A recording is a header plus a list of low-rate ticks. Each tick
// carries the block of vibration samples acquired since the previous tick
// (vibration_rate / lowrate of them) together with one reading of heat
// flux, core temperature and every electrode impedance. All values are
// raw sensor counts.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tactile {

inline constexpr int kDefaultVibrationRate = 2200;
inline constexpr int kDefaultLowRate = 100;
inline constexpr int kDefaultElectrodeCount = 19;
inline constexpr double kDefaultElectrodeRadius = 2.0;  // mm
inline constexpr double kDefaultCalibrationSeconds = 0.5;
inline constexpr double kDefaultWindowSeconds = 0.25;  // dt
inline constexpr int kRecordingFormatVersion = 1;

struct RecordingHeader {
    int vibration_rate = kDefaultVibrationRate;  // Hz
    int lowrate = kDefaultLowRate;               // Hz
    int electrode_count = kDefaultElectrodeCount;
    std::optional<std::string> material_label;
    std::vector<double> electrode_radii;    // mm, one per electrode
    std::vector<double> electrode_resting;  // counts, one per electrode
    // When set, the first calibration_seconds of the recording were taken
    // without contact; the loader derives electrode_resting from them if
    // the file does not list resting levels explicitly.
    std::optional<double> calibration_seconds;

    // Header with default rates, 19 electrodes of 2 mm radius and the
    // given resting levels.
    static RecordingHeader with_defaults(std::vector<double> resting);

    int samples_per_tick() const { return vibration_rate / lowrate; }
    // Throws FormatError naming the first offending field.
    void validate() const;

    bool operator==(const RecordingHeader&) const = default;
};

struct Tick {
    std::vector<double> vibration;  // samples_per_tick() values
    double flux = 0.0;
    double core_temp = 0.0;
    std::vector<double> electrodes;  // electrode_count values

    bool operator==(const Tick&) const = default;
};

struct Recording {
    RecordingHeader header;
    std::vector<Tick> ticks;

    // Ticks after the calibration span (all ticks when there is none).
    std::span<const Tick> data_ticks() const;
    // Throws FormatError on the first tick that does not fit the header.
    void validate() const;

    bool operator==(const Recording&) const = default;
};

// Mean per-electrode impedance over the first `seconds` of ticks.
std::vector<double> calibrate_resting(std::span<const Tick> ticks, const RecordingHeader& header,
                                      double seconds = kDefaultCalibrationSeconds);

Recording read_recording(std::istream& in);
void write_recording(std::ostream& out, const Recording& recording);

// File wrappers; filesystem failures raise IoError.
Recording load_recording(const std::filesystem::path& path);
void save_recording(const std::filesystem::path& path, const Recording& recording);

// A non-owning view of dt * lowrate consecutive ticks.
class SensorWindow {
public:
    SensorWindow(std::span<const Tick> ticks, const RecordingHeader& header)
        : ticks_(ticks), header_(&header)
    {}

    std::span<const Tick> ticks() const { return ticks_; }
    const RecordingHeader& header() const { return *header_; }
    double duration() const { return static_cast<double>(ticks_.size()) / header_->lowrate; }

    // Concatenated vibration samples, in acquisition order.
    std::vector<double> vibration() const;
    std::vector<double> flux() const;

private:
    std::span<const Tick> ticks_;
    const RecordingHeader* header_;
};

// Number of ticks in one window; throws ParameterError unless dt * lowrate
// is a positive integer.
std::size_t ticks_per_window(const RecordingHeader& header, double dt);

// Contiguous non-overlapping windows in order; a trailing remainder shorter
// than one window is dropped.
std::vector<SensorWindow> windows(std::span<const Tick> ticks, const RecordingHeader& header,
                                  double dt);

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace tactile
