#include "tactile/sensor_stream.hpp"

#include "tactile/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tactile {

namespace {

constexpr std::string_view kModule = "sensor_stream";

using nlohmann::json;

template <typename T>
T required_field(const json& j, const char* name)
{
    if (!j.contains(name)) {
        throw FormatError(kModule, std::string("header: missing field '") + name + "'");
    }
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw FormatError(kModule, std::string("header: field '") + name + "' has the wrong type");
    }
}

RecordingHeader parse_header(const std::string& line)
{
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(kModule, std::string("header: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw FormatError(kModule, "header: expected a JSON object on line 1");
    }
    const int version = required_field<int>(j, "version");
    if (version != kRecordingFormatVersion) {
        throw FormatError(kModule, "header: field 'version' is " + std::to_string(version) +
                                       ", only version 1 is supported");
    }

    RecordingHeader h;
    h.vibration_rate = required_field<int>(j, "vibration_rate");
    h.lowrate = required_field<int>(j, "lowrate");
    h.electrode_count = required_field<int>(j, "electrode_count");
    h.electrode_radii = required_field<std::vector<double>>(j, "electrode_radii");
    if (j.contains("material_label") && !j["material_label"].is_null()) {
        h.material_label = required_field<std::string>(j, "material_label");
    }
    if (j.contains("calibration_seconds") && !j["calibration_seconds"].is_null()) {
        h.calibration_seconds = required_field<double>(j, "calibration_seconds");
    }
    if (j.contains("electrode_resting") && !j["electrode_resting"].is_null()) {
        h.electrode_resting = required_field<std::vector<double>>(j, "electrode_resting");
    } else if (!h.calibration_seconds) {
        throw FormatError(kModule,
                          "header: field 'electrode_resting' is required when no "
                          "'calibration_seconds' span is given");
    }
    return h;
}

json header_json(const RecordingHeader& h)
{
    json j;
    j["version"] = kRecordingFormatVersion;
    j["vibration_rate"] = h.vibration_rate;
    j["lowrate"] = h.lowrate;
    j["electrode_count"] = h.electrode_count;
    j["material_label"] = h.material_label ? json(*h.material_label) : json(nullptr);
    j["electrode_radii"] = h.electrode_radii;
    j["electrode_resting"] = h.electrode_resting;
    if (h.calibration_seconds) {
        j["calibration_seconds"] = *h.calibration_seconds;
    }
    return j;
}

double parse_number(std::string_view field, std::size_t tick_index)
{
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw FormatError(kModule, "tick " + std::to_string(tick_index) + ": invalid number '" +
                                       std::string(field) + "'");
    }
    return value;
}

std::size_t calibration_tick_count(const RecordingHeader& h, double seconds)
{
    return static_cast<std::size_t>(std::llround(seconds * h.lowrate));
}

}  // namespace

RecordingHeader RecordingHeader::with_defaults(std::vector<double> resting)
{
    RecordingHeader h;
    h.electrode_radii.assign(kDefaultElectrodeCount, kDefaultElectrodeRadius);
    h.electrode_resting = std::move(resting);
    return h;
}

void RecordingHeader::validate() const
{
    if (vibration_rate <= 0) {
        throw FormatError(kModule, "header: field 'vibration_rate' must be positive");
    }
    if (lowrate <= 0) {
        throw FormatError(kModule, "header: field 'lowrate' must be positive");
    }
    if (vibration_rate % lowrate != 0) {
        throw FormatError(kModule, "header: field 'vibration_rate' (" + std::to_string(vibration_rate) +
                                       ") must be an integer multiple of 'lowrate' (" +
                                       std::to_string(lowrate) + ")");
    }
    if (electrode_count <= 0) {
        throw FormatError(kModule, "header: field 'electrode_count' must be positive");
    }
    const auto count = static_cast<std::size_t>(electrode_count);
    if (electrode_radii.size() != count) {
        throw FormatError(kModule, "header: field 'electrode_radii' has " +
                                       std::to_string(electrode_radii.size()) + " entries, expected " +
                                       std::to_string(count));
    }
    for (double r : electrode_radii) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw FormatError(kModule, "header: field 'electrode_radii' entries must be positive");
        }
    }
    if (electrode_resting.size() != count) {
        throw FormatError(kModule, "header: field 'electrode_resting' has " +
                                       std::to_string(electrode_resting.size()) +
                                       " entries, expected " + std::to_string(count));
    }
    if (calibration_seconds && !(*calibration_seconds > 0.0)) {
        throw FormatError(kModule, "header: field 'calibration_seconds' must be positive");
    }
}

std::span<const Tick> Recording::data_ticks() const
{
    std::span<const Tick> all(ticks);
    if (!header.calibration_seconds) {
        return all;
    }
    const std::size_t skip = std::min(calibration_tick_count(header, *header.calibration_seconds), all.size());
    return all.subspan(skip);
}

void Recording::validate() const
{
    header.validate();
    const auto spt = static_cast<std::size_t>(header.samples_per_tick());
    const auto ne = static_cast<std::size_t>(header.electrode_count);
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const Tick& t = ticks[i];
        if (t.vibration.size() != spt) {
            throw FormatError(kModule, "tick " + std::to_string(i) + ": expected " + std::to_string(spt) +
                                           " vibration samples, got " + std::to_string(t.vibration.size()));
        }
        if (t.electrodes.size() != ne) {
            throw FormatError(kModule, "tick " + std::to_string(i) + ": expected " + std::to_string(ne) +
                                           " electrode values, got " + std::to_string(t.electrodes.size()));
        }
    }
}

std::vector<double> calibrate_resting(std::span<const Tick> ticks, const RecordingHeader& header,
                                      double seconds)
{
    const std::size_t n = calibration_tick_count(header, seconds);
    if (n == 0 || n > ticks.size()) {
        throw ParameterError(kModule, "calibration span of " + format_double(seconds) +
                                          " s needs " + std::to_string(n) + " ticks, recording has " +
                                          std::to_string(ticks.size()));
    }
    std::vector<double> mean(static_cast<std::size_t>(header.electrode_count), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t e = 0; e < mean.size(); ++e) {
            mean[e] += ticks[i].electrodes.at(e);
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(n);
    }
    return mean;
}

Recording read_recording(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(kModule, "header: file is empty");
    }
    Recording rec;
    rec.header = parse_header(line);
    const bool needs_calibration = rec.header.electrode_resting.empty();
    if (needs_calibration) {
        // validate() checks resting length; fill a placeholder of the right size first.
        rec.header.electrode_resting.assign(static_cast<std::size_t>(std::max(rec.header.electrode_count, 0)), 0.0);
    }
    rec.header.validate();

    const auto spt = static_cast<std::size_t>(rec.header.samples_per_tick());
    const auto ne = static_cast<std::size_t>(rec.header.electrode_count);
    const std::size_t expected = spt + 2 + ne;

    std::vector<std::string_view> fields;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t index = rec.ticks.size();
        fields.clear();
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != expected) {
            const long vib = static_cast<long>(fields.size()) - static_cast<long>(2 + ne);
            throw FormatError(kModule, "tick " + std::to_string(index) + ": expected " + std::to_string(spt) +
                                           " vibration samples (" + std::to_string(expected) +
                                           " fields), got " + std::to_string(std::max(vib, 0L)) +
                                           " (" + std::to_string(fields.size()) + " fields)");
        }
        Tick t;
        t.vibration.reserve(spt);
        for (std::size_t k = 0; k < spt; ++k) {
            t.vibration.push_back(parse_number(fields[k], index));
        }
        t.flux = parse_number(fields[spt], index);
        t.core_temp = parse_number(fields[spt + 1], index);
        t.electrodes.reserve(ne);
        for (std::size_t k = 0; k < ne; ++k) {
            t.electrodes.push_back(parse_number(fields[spt + 2 + k], index));
        }
        rec.ticks.push_back(std::move(t));
    }
    if (needs_calibration) {
        rec.header.electrode_resting = calibrate_resting(rec.ticks, rec.header, *rec.header.calibration_seconds);
    }
    return rec;
}

void write_recording(std::ostream& out, const Recording& recording)
{
    recording.validate();
    out << header_json(recording.header).dump() << '\n';
    std::string line;
    for (const Tick& t : recording.ticks) {
        line.clear();
        for (double v : t.vibration) {
            line += format_double(v);
            line += ',';
        }
        line += format_double(t.flux);
        line += ',';
        line += format_double(t.core_temp);
        for (double e : t.electrodes) {
            line += ',';
            line += format_double(e);
        }
        line += '\n';
        out << line;
    }
}

Recording load_recording(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(kModule, "cannot open recording '" + path.string() + "'");
    }
    return read_recording(in);
}

void save_recording(const std::filesystem::path& path, const Recording& recording)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(kModule, "cannot write recording '" + path.string() + "'");
    }
    write_recording(out, recording);
    out.flush();
    if (!out) {
        throw IoError(kModule, "write failed for '" + path.string() + "'");
    }
}

std::vector<double> SensorWindow::vibration() const
{
    std::vector<double> out;
    out.reserve(ticks_.size() * static_cast<std::size_t>(header_->samples_per_tick()));
    for (const Tick& t : ticks_) {
        out.insert(out.end(), t.vibration.begin(), t.vibration.end());
    }
    return out;
}

std::vector<double> SensorWindow::flux() const
{
    std::vector<double> out;
    out.reserve(ticks_.size());
    for (const Tick& t : ticks_) {
        out.push_back(t.flux);
    }
    return out;
}

std::size_t ticks_per_window(const RecordingHeader& header, double dt)
{
    const double exact = dt * header.lowrate;
    const double rounded = std::round(exact);
    if (!(dt > 0.0) || rounded < 1.0 || std::abs(exact - rounded) > 1e-9 * std::max(1.0, rounded)) {
        throw ParameterError(kModule, "dt * lowrate must be a positive integer (dt=" + format_double(dt) +
                                          ", lowrate=" + std::to_string(header.lowrate) + ")");
    }
    return static_cast<std::size_t>(rounded);
}

std::vector<SensorWindow> windows(std::span<const Tick> ticks, const RecordingHeader& header, double dt)
{
    const std::size_t size = ticks_per_window(header, dt);
    std::vector<SensorWindow> out;
    out.reserve(ticks.size() / size);
    for (std::size_t start = 0; start + size <= ticks.size(); start += size) {
        out.emplace_back(ticks.subspan(start, size), header);
    }
    return out;
}

std::string format_double(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw FormatError(kModule, "cannot format number");
    }
    return std::string(buf, ptr);
}

}  // namespace tactile
