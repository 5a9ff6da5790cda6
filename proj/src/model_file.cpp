#include "tactile/model_file.hpp"

#include "tactile/errors.hpp"

#include <fstream>
#include <sstream>

namespace tactile {

namespace {

constexpr std::string_view kModule = "model_file";

using nlohmann::json;

json knee_json(const KneeSettings& k)
{
    return {{"k_max", k.k_max}, {"holdout_fraction", k.holdout_fraction}, {"tau", k.tau}};
}

KneeSettings knee_from(const json& j)
{
    KneeSettings k;
    k.k_max = j.at("k_max").get<int>();
    k.holdout_fraction = j.at("holdout_fraction").get<double>();
    k.tau = j.at("tau").get<double>();
    return k;
}

json gmm_json(const Gmm& g)
{
    json j;
    const auto d = static_cast<Eigen::Index>(g.dim());
    j["k"] = g.components();
    j["dim"] = g.dim();
    j["weights"] = std::vector<double>(g.weights().data(), g.weights().data() + g.weights().size());
    std::vector<double> means;
    std::vector<double> covs;
    for (std::size_t c = 0; c < g.components(); ++c) {
        for (Eigen::Index i = 0; i < d; ++i) {
            means.push_back(g.means()[c][i]);
        }
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index col = 0; col < d; ++col) {
                covs.push_back(g.covariances()[c](r, col));
            }
        }
    }
    j["means"] = std::move(means);
    j["covariances"] = std::move(covs);
    return j;
}

Gmm gmm_from(const json& j, std::size_t expected_dim, const std::string& what)
{
    const auto k = j.at("k").get<std::size_t>();
    const auto d = j.at("dim").get<std::size_t>();
    if (d != expected_dim) {
        throw FormatError(kModule, what + ": mixture dimension " + std::to_string(d) + ", expected " +
                                       std::to_string(expected_dim));
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto m = j.at("means").get<std::vector<double>>();
    const auto cv = j.at("covariances").get<std::vector<double>>();
    if (k == 0 || w.size() != k || m.size() != k * d || cv.size() != k * d * d) {
        throw FormatError(kModule, what + ": mixture arrays do not match k=" + std::to_string(k) +
                                       ", dim=" + std::to_string(d));
    }
    const auto di = static_cast<Eigen::Index>(d);
    Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(k));
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;
    for (std::size_t c = 0; c < k; ++c) {
        means.emplace_back(Eigen::Map<const Eigen::VectorXd>(m.data() + c * d, di));
        covs.emplace_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            cv.data() + c * d * d, di, di));
    }
    return Gmm(std::move(weights), std::move(means), std::move(covs));
}

}  // namespace

json config_to_json(const PipelineConfig& c)
{
    json j;
    j["dt"] = c.dt;
    j["band"] = {c.band.lo, c.band.hi};
    j["pca_variance"] = c.pca_variance;
    j["knee"] = {{"vibration", knee_json(c.vibration_knee)}, {"thermal", knee_json(c.thermal_knee)}};
    j["em"] = {{"init", "kmeans++"},
               {"max_iterations", c.em.max_iterations},
               {"tolerance", c.em.tolerance},
               {"regularization", c.em.regularization},
               {"kmeans_iterations", c.em.kmeans_iterations}};
    j["e_m"] = c.e_m;
    j["temperature_floor"] = c.temperature_floor;
    j["posterior_floor"] = c.posterior_floor;
    j["seed"] = c.seed;
    return j;
}

PipelineConfig config_from_json(const json& j)
{
    PipelineConfig c;
    c.dt = j.at("dt").get<double>();
    const auto band = j.at("band").get<std::vector<double>>();
    if (band.size() != 2) {
        throw FormatError(kModule, "field 'band' must hold two frequencies");
    }
    c.band = {band[0], band[1]};
    c.pca_variance = j.at("pca_variance").get<double>();
    c.vibration_knee = knee_from(j.at("knee").at("vibration"));
    c.thermal_knee = knee_from(j.at("knee").at("thermal"));
    const json& em = j.at("em");
    c.em.max_iterations = em.at("max_iterations").get<int>();
    c.em.tolerance = em.at("tolerance").get<double>();
    c.em.regularization = em.at("regularization").get<double>();
    c.em.kmeans_iterations = em.at("kmeans_iterations").get<int>();
    c.e_m = j.at("e_m").get<double>();
    c.temperature_floor = j.at("temperature_floor").get<double>();
    c.posterior_floor = j.at("posterior_floor").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

std::string model_to_json(const TrainedModel& model)
{
    json j;
    j["version"] = kModelFormatVersion;
    j["dt"] = model.config.dt;
    j["band"] = {model.config.band.lo, model.config.band.hi};
    j["sensor"] = {{"vibration_rate", model.layout.vibration_rate},
                   {"lowrate", model.layout.lowrate},
                   {"electrode_count", model.layout.electrode_count}};
    j["spectrum"] = {{"transform", "dft"},
                     {"window", "rectangular"},
                     {"modulus", "magnitude"},
                     {"normalization", "none"},
                     {"band_upper", "exclusive"}};

    const ProjectionModel& p = model.projection;
    json proj;
    proj["bins"] = p.bins();
    proj["d"] = p.dim();
    proj["retained_variance"] = p.retained_variance;
    proj["variance_target"] = p.variance_target;
    json mean = json::array();
    for (const auto& c : p.complex_mean) {
        mean.push_back({c.real(), c.imag()});
    }
    proj["complex_mean"] = std::move(mean);
    std::vector<double> basis;
    for (Eigen::Index r = 0; r < p.basis.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.basis.cols(); ++c) {
            basis.push_back(p.basis(r, c));
        }
    }
    proj["basis"] = std::move(basis);
    j["projection"] = std::move(proj);

    j["thermal"] = {{"e_m", model.config.e_m},
                    {"regression_error", "rms"},
                    {"temperature_floor", model.config.temperature_floor},
                    {"enabled", model.has_thermal}};

    json mats = json::array();
    for (const MaterialModel& m : model.materials) {
        json jm;
        jm["name"] = m.name;
        jm["vibration"] = gmm_json(m.vibration);
        jm["thermal"] = m.thermal ? gmm_json(*m.thermal) : json(nullptr);
        mats.push_back(std::move(jm));
    }
    j["materials"] = std::move(mats);
    j["training"] = config_to_json(model.config);
    return j.dump(2) + "\n";
}

TrainedModel model_from_json(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(kModule, std::string("invalid JSON: ") + e.what());
    }
    try {
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw FormatError(kModule, "unsupported model version " + std::to_string(version));
        }
        TrainedModel model;
        model.config = config_from_json(j.at("training"));
        const json& sensor = j.at("sensor");
        model.layout = {sensor.at("vibration_rate").get<int>(), sensor.at("lowrate").get<int>(),
                        sensor.at("electrode_count").get<int>()};
        model.has_thermal = j.at("thermal").at("enabled").get<bool>();
        if (j.at("thermal").at("regression_error").get<std::string>() != "rms") {
            throw FormatError(kModule, "unsupported regression error definition");
        }

        const json& proj = j.at("projection");
        const auto bins = proj.at("bins").get<std::size_t>();
        const auto d = proj.at("d").get<std::size_t>();
        ProjectionModel& p = model.projection;
        p.retained_variance = proj.at("retained_variance").get<double>();
        p.variance_target = proj.at("variance_target").get<double>();
        for (const json& c : proj.at("complex_mean")) {
            p.complex_mean.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
        }
        const auto basis = proj.at("basis").get<std::vector<double>>();
        if (p.complex_mean.size() != bins || basis.size() != d * bins || d == 0) {
            throw FormatError(kModule, "projection arrays do not match bins=" + std::to_string(bins) +
                                           ", d=" + std::to_string(d));
        }
        p.basis = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            basis.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(bins));

        for (const json& jm : j.at("materials")) {
            const auto name = jm.at("name").get<std::string>();
            Gmm vib = gmm_from(jm.at("vibration"), d, "material '" + name + "' vibration");
            std::optional<Gmm> thermal;
            if (!jm.at("thermal").is_null()) {
                thermal = gmm_from(jm.at("thermal"), 3, "material '" + name + "' thermal");
            } else if (model.has_thermal) {
                throw FormatError(kModule, "material '" + name + "' lacks a thermal mixture");
            }
            model.materials.push_back({name, std::move(vib), std::move(thermal)});
        }
        if (model.materials.size() < 2) {
            throw FormatError(kModule, "model lists fewer than 2 materials");
        }
        return model;
    } catch (const json::exception& e) {
        throw FormatError(kModule, std::string("malformed model: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(kModule, "cannot write model '" + path.string() + "'");
    }
    out << model_to_json(model);
    if (!out) {
        throw IoError(kModule, "write failed for '" + path.string() + "'");
    }
}

TrainedModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(kModule, "cannot open model '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace tactile
