#include "tactile/training.hpp"

#include "tactile/errors.hpp"
#include "tactile/numeric.hpp"

#include <algorithm>

namespace tactile {

namespace {

constexpr std::string_view kModule = "training";

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return m;
}

// Component selection needs a holdout split; cap k_max to what the data allows.
Gmm fit_material_gmm(const Eigen::MatrixXd& data, KneeSettings knee, const EmSettings& em,
                     std::uint64_t seed, const std::string& what)
{
    const auto n = static_cast<int>(data.rows());
    if (n < 2) {
        throw ConfigError(kModule, what + ": needs at least 2 training windows, got " + std::to_string(n));
    }
    const int n_train = n - static_cast<int>(knee.holdout_fraction * n);
    knee.k_max = std::max(1, std::min(knee.k_max, n_train));
    const int k = select_components(data, knee, seed, em);
    return em_fit(data, k, seed, em);
}

}  // namespace

std::string_view to_string(Modality m)
{
    return m == Modality::Vibration ? "vibration" : "multimodal";
}

Modality parse_modality(std::string_view text)
{
    if (text == "vibration" || text == "vibration-only") {
        return Modality::Vibration;
    }
    if (text == "multimodal" || text == "multi-modal") {
        return Modality::MultiModal;
    }
    throw ParameterError(kModule, "unknown modality '" + std::string(text) + "'");
}

void PipelineConfig::validate() const
{
    if (!(dt > 0.0)) {
        throw ParameterError(kModule, "dt must be positive");
    }
    if (!(band.lo > 0.0) || !(band.lo < band.hi)) {
        throw ParameterError(kModule, "band must satisfy 0 < f_lo < f_hi");
    }
    if (!(pca_variance > 0.0) || pca_variance > 1.0) {
        throw ParameterError(kModule, "pca variance target must lie in (0, 1], got " + format_double(pca_variance));
    }
    if (vibration_knee.k_max < 1 || thermal_knee.k_max < 1) {
        throw ParameterError(kModule, "k_max must be at least 1");
    }
    if (!(e_m < 0.0)) {
        throw ParameterError(kModule, "contact threshold e_m must be negative");
    }
    if (posterior_floor < 0.0) {
        throw ParameterError(kModule, "posterior floor must be non-negative");
    }
}

std::vector<WindowFeatures> extract_features(std::span<const Tick> ticks, const RecordingHeader& header,
                                             const PipelineConfig& config, bool with_thermal)
{
    const auto wins = windows(ticks, header, config.dt);
    std::vector<WindowFeatures> out;
    out.reserve(wins.size());
    if (wins.empty()) {
        return out;
    }
    RealFft fft(wins.front().ticks().size() * static_cast<std::size_t>(header.samples_per_tick()));
    std::optional<ContactConfig> contact;
    if (with_thermal) {
        contact = ContactConfig::from_header(header, config.e_m);
    }
    for (const SensorWindow& w : wins) {
        WindowFeatures f;
        const auto samples = w.vibration();
        f.spectrum = compute_spectrum(fft, samples, header.vibration_rate, config.band);
        if (contact) {
            try {
                f.thermal = thermal_feature(w, *contact, config.temperature_floor);
            } catch (const SensorFault&) {
                f.thermal.reset();
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::optional<std::size_t> TrainedModel::index_of(std::string_view name) const
{
    for (std::size_t i = 0; i < materials.size(); ++i) {
        if (materials[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

TrainedModel train_model(std::span<const MaterialWindows> data, const SensorLayout& layout,
                         const PipelineConfig& config, bool with_thermal)
{
    config.validate();
    if (data.size() < 2) {
        throw ConfigError(kModule, "training needs at least 2 labeled materials, got " + std::to_string(data.size()));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            if (data[i].label == data[j].label) {
                throw ConfigError(kModule, "material '" + data[i].label + "' listed twice");
            }
        }
    }

    std::vector<Spectrum> all;
    for (const MaterialWindows& m : data) {
        for (const WindowFeatures& w : m.windows) {
            all.push_back(w.spectrum);
        }
    }

    TrainedModel model;
    model.layout = layout;
    model.config = config;
    model.has_thermal = with_thermal;
    model.projection = fit_projection(all, config.pca_variance);

    for (std::size_t j = 0; j < data.size(); ++j) {
        const MaterialWindows& m = data[j];
        std::vector<Eigen::VectorXd> vib;
        std::vector<Eigen::VectorXd> thermal;
        for (const WindowFeatures& w : m.windows) {
            vib.push_back(project(w.spectrum, model.projection).rho_bar);
            if (with_thermal && w.thermal) {
                thermal.push_back(w.thermal->as_vector());
            }
        }
        if (vib.empty()) {
            throw ConfigError(kModule, "material '" + m.label + "' has no training windows");
        }
        const auto seed_base = static_cast<std::uint64_t>(2 * j);
        Gmm vib_gmm = fit_material_gmm(stack_rows(vib), config.vibration_knee, config.em,
                                       mix_seed(config.seed, seed_base), "material '" + m.label + "' vibration");
        std::optional<Gmm> thermal_gmm;
        if (with_thermal) {
            if (thermal.empty()) {
                throw ConfigError(kModule, "material '" + m.label + "' has no usable thermal windows");
            }
            thermal_gmm = fit_material_gmm(stack_rows(thermal), config.thermal_knee, config.em,
                                           mix_seed(config.seed, seed_base + 1),
                                           "material '" + m.label + "' thermal");
        }
        model.materials.push_back({m.label, std::move(vib_gmm), std::move(thermal_gmm)});
    }
    return model;
}

std::vector<std::vector<double>> window_log_likelihoods(const TrainedModel& model,
                                                        std::span<const WindowFeatures> windows,
                                                        Modality modality)
{
    if (modality == Modality::MultiModal && !model.has_thermal) {
        throw ShapeError(kModule, "multi-modal classification needs a model with thermal mixtures");
    }
    std::vector<std::vector<double>> out;
    out.reserve(windows.size());
    for (const WindowFeatures& w : windows) {
        const VibrationFeature rho = project(w.spectrum, model.projection);
        const ThermalFeature* theta =
            (modality == Modality::MultiModal && w.thermal) ? &*w.thermal : nullptr;
        out.push_back(material_log_likelihoods(rho, theta, model.materials));
    }
    return out;
}

}  // namespace tactile
