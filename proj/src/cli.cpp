#include "tactile/cli.hpp"

#include "tactile/errors.hpp"
#include "tactile/eval_harness.hpp"
#include "tactile/model_file.hpp"
#include "tactile/synth_bench.hpp"
#include "tactile/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace tactile {

namespace {

constexpr std::string_view kModule = "cli";

struct SynthArgs {
    std::uint64_t seed = 0;
    std::string out;
    std::optional<double> duration;
    std::string spec;
};

struct TrainArgs {
    std::string manifest;
    std::string out;
    double dt = kDefaultWindowSeconds;
    std::string band = "4:500";
    double pca_var = kDefaultVarianceTarget;
    int k_max = KneeSettings{}.k_max;
    std::uint64_t seed = 0;
};

struct ClassifyArgs {
    std::string model;
    std::string recording;
    std::string modality;
    std::optional<double> threshold;
    std::string format = "csv";
};

struct EvalArgs {
    std::string manifest;
    std::string out;
    int folds = 10;
    std::string modality = "multimodal";
    bool both = false;
    std::uint64_t seed = 0;
    std::string success = "stable-to-end";
    double dt = kDefaultWindowSeconds;
    double pca_var = kDefaultVarianceTarget;
};

Band parse_band(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ParameterError(kModule, "--band expects lo:hi, got '" + text + "'");
    }
    Band b;
    try {
        std::size_t used = 0;
        b.lo = std::stod(text.substr(0, colon), &used);
        b.hi = std::stod(text.substr(colon + 1), &used);
    } catch (const std::exception&) {
        throw ParameterError(kModule, "--band expects lo:hi, got '" + text + "'");
    }
    return b;
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(kModule, "cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(kModule, "cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw IoError(kModule, "write failed for '" + path.string() + "'");
    }
}

std::vector<LabeledRecording> load_manifest_dataset(const std::string& path)
{
    const Manifest m = load_manifest(path);
    auto data = load_dataset(path, m);
    if (data.empty()) {
        throw ConfigError(kModule, "manifest '" + path + "' lists no recordings");
    }
    return data;
}

SensorLayout layout_of(const RecordingHeader& h)
{
    return {h.vibration_rate, h.lowrate, h.electrode_count};
}

std::string describe(const SensorLayout& l)
{
    return std::to_string(l.vibration_rate) + " Hz vibration, " + std::to_string(l.lowrate) + " Hz low-rate, " +
           std::to_string(l.electrode_count) + " electrodes";
}

int cmd_synth(const SynthArgs& a, std::ostream& out)
{
    BenchSuite suite = a.spec.empty() ? default_suite(a.seed) : suite_from_json(read_text(a.spec), a.seed);
    if (a.duration) {
        suite.duration_per_material = *a.duration;
    }
    const auto manifest = write_suite(suite, a.out);
    out << manifest.string() << '\n';
    return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out)
{
    PipelineConfig cfg;
    cfg.dt = a.dt;
    cfg.band = parse_band(a.band);
    cfg.pca_variance = a.pca_var;
    cfg.vibration_knee.k_max = a.k_max;
    cfg.thermal_knee.k_max = a.k_max;
    cfg.seed = a.seed;
    cfg.validate();

    const auto dataset = load_manifest_dataset(a.manifest);
    const SensorLayout layout = layout_of(dataset.front().recording.header);
    std::vector<MaterialWindows> data;
    std::map<std::string, std::size_t> slot;
    for (const LabeledRecording& r : dataset) {
        if (layout_of(r.recording.header) != layout) {
            throw ShapeError(kModule, "recording '" + r.label + "' has " + describe(layout_of(r.recording.header)) +
                                          "; first recording has " + describe(layout));
        }
        auto [it, fresh] = slot.try_emplace(r.label, data.size());
        if (fresh) {
            data.push_back({r.label, {}});
        }
        auto w = extract_features(r.recording.data_ticks(), r.recording.header, cfg, true);
        auto& dst = data[it->second].windows;
        dst.insert(dst.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
    if (data.size() < 2) {
        throw ConfigError(kModule, "training needs at least 2 labeled materials");
    }
    const TrainedModel model = train_model(data, layout, cfg, true);
    save_model(a.out, model);
    out << "projection d=" << model.projection.dim() << " retained_variance="
        << format_double(model.projection.retained_variance) << '\n';
    for (const MaterialModel& m : model.materials) {
        out << m.name << ": vibration K=" << m.vibration.components();
        if (m.thermal) {
            out << " thermal K=" << m.thermal->components();
        }
        out << '\n';
    }
    out << "model written to " << a.out << '\n';
    return kExitOk;
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out)
{
    if (a.threshold && !(*a.threshold > 0.0 && *a.threshold <= 1.0)) {
        throw ParameterError(kModule, "--threshold must lie in (0, 1]");
    }
    if (a.format != "csv" && a.format != "jsonl") {
        throw ParameterError(kModule, "--format must be csv or jsonl");
    }
    const TrainedModel model = load_model(a.model);
    const Recording rec = load_recording(a.recording);
    const SensorLayout rl = layout_of(rec.header);
    if (rl != model.layout) {
        throw ShapeError(kModule, "model expects " + describe(model.layout) + "; recording has " + describe(rl));
    }
    const Modality modality = a.modality.empty()
                                  ? (model.has_thermal ? Modality::MultiModal : Modality::Vibration)
                                  : parse_modality(a.modality);
    const auto features = extract_features(rec.data_ticks(), rec.header, model.config,
                                           modality == Modality::MultiModal);
    for (const WindowFeatures& w : features) {
        if (w.spectrum.values.size() != model.projection.bins()) {
            throw ShapeError(kModule, "model expects " + std::to_string(model.projection.bins()) +
                                          " spectrum bins; recording yields " +
                                          std::to_string(w.spectrum.values.size()));
        }
    }
    const auto ll = window_log_likelihoods(model, features, modality);

    if (a.format == "csv") {
        out << "step,seconds";
        for (const MaterialModel& m : model.materials) {
            out << ",p_" << m.name;
        }
        out << ",decision\n";
    }
    PosteriorState state = init_uniform(model.size());
    for (std::size_t w = 0; w < ll.size(); ++w) {
        const auto& row = ll[w];
        state = update_log(state, row, model.config.posterior_floor);
        const Decision d = classify(state, a.threshold);
        const std::string decision = d.undecided() ? "undecided" : model.materials[*d.material_index].name;
        const double seconds = static_cast<double>(state.step) * model.config.dt;
        if (a.format == "csv") {
            out << state.step << ',' << format_double(seconds);
            for (double p : state.probs) {
                out << ',' << format_double(p);
            }
            out << ',' << decision << '\n';
        } else {
            nlohmann::ordered_json j;
            j["step"] = state.step;
            j["seconds"] = seconds;
            nlohmann::ordered_json post;
            for (std::size_t i = 0; i < model.size(); ++i) {
                post[model.materials[i].name] = state.probs[i];
            }
            j["posterior"] = std::move(post);
            j["decision"] = decision;
            // False when a multi-modal window fell back to vibration alone.
            j["thermal_used"] = modality == Modality::MultiModal && features[w].thermal.has_value();
            out << j.dump() << '\n';
        }
    }
    return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out)
{
    EvalConfig cfg;
    cfg.folds = a.folds;
    cfg.rule = parse_success_rule(a.success);
    cfg.pipeline.seed = a.seed;
    cfg.pipeline.dt = a.dt;
    cfg.pipeline.pca_variance = a.pca_var;
    cfg.validate();
    std::vector<Modality> modalities;
    if (a.both || a.modality == "both") {
        modalities = {Modality::Vibration, Modality::MultiModal};
    } else {
        modalities = {parse_modality(a.modality)};
    }

    const auto dataset = load_manifest_dataset(a.manifest);
    std::vector<EvalReport> reports;
    for (Modality m : modalities) {
        reports.push_back(cross_validate(dataset, m, cfg));
    }
    std::error_code ec;
    std::filesystem::create_directories(a.out, ec);
    if (ec) {
        throw IoError(kModule, "cannot create output directory '" + a.out + "': " + ec.message());
    }
    const std::filesystem::path dir(a.out);
    write_text(dir / "report.json", reports_to_json(reports));
    write_text(dir / "report.csv", reports_to_csv(reports));
    for (const EvalReport& r : reports) {
        out << to_string(r.modality) << ": error_rate=" << format_double(r.error_rate) << " mean_time_s="
            << (r.mean_time ? format_double(*r.mean_time) : std::string("n/a")) << '\n';
    }
    out << "reports written to " << (dir / "report.json").string() << " and " << (dir / "report.csv").string()
        << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Tactile material identification: synthesis, training, streaming classification, evaluation"};
    app.require_subcommand(1);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Write the synthetic benchmark suite and its manifest");
    synth->add_option("--seed", sa.seed, "Suite seed")->capture_default_str();
    synth->add_option("--out", sa.out, "Output directory")->required();
    synth->add_option("--duration", sa.duration, "Seconds per material (default 60)");
    synth->add_option("--spec", sa.spec, "JSON material spec file instead of the default suite");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Fit the projection and per-material mixtures");
    train->add_option("--manifest", ta.manifest, "Dataset manifest")->required();
    train->add_option("--out", ta.out, "Model file to write")->required();
    train->add_option("--dt", ta.dt, "Window length in seconds (published setup: 0.25)")->capture_default_str();
    train->add_option("--band", ta.band, "Analysis band lo:hi in Hz (published setup: 4:500)")->capture_default_str();
    train->add_option("--pca-var", ta.pca_var, "Retained PCA variance in (0, 1] (published setup: 0.97)")
        ->capture_default_str();
    train->add_option("--k-max", ta.k_max, "Largest mixture size tried by the knee rule")->capture_default_str();
    train->add_option("--seed", ta.seed, "Training seed")->capture_default_str();

    ClassifyArgs ca;
    auto* cls = app.add_subcommand("classify", "Stream posteriors over a recording");
    cls->add_option("--model", ca.model, "Model file")->required();
    cls->add_option("--recording", ca.recording, "Recording file")->required();
    cls->add_option("--modality", ca.modality, "vibration or multimodal (default: multimodal when available)");
    cls->add_option("--threshold", ca.threshold, "Decide only when the top posterior reaches this value");
    cls->add_option("--format", ca.format, "csv or jsonl")->capture_default_str();

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "Cross-validated recognition time and error");
    ev->add_option("--manifest", ea.manifest, "Dataset manifest")->required();
    ev->add_option("--out", ea.out, "Output directory for report.json and report.csv")->required();
    ev->add_option("--folds", ea.folds, "Number of folds, at least 2 (published setup: 10)")->capture_default_str();
    ev->add_option("--modality", ea.modality, "vibration, multimodal or both")->capture_default_str();
    ev->add_flag("--both", ea.both, "Evaluate both modalities and write a comparison");
    ev->add_option("--seed", ea.seed, "Evaluation seed")->capture_default_str();
    ev->add_option("--success", ea.success, "stable-to-end or first-hit")->capture_default_str();
    ev->add_option("--dt", ea.dt, "Window length in seconds (published setup: 0.25)")->capture_default_str();
    ev->add_option("--pca-var", ea.pca_var, "Retained PCA variance (published setup: 0.97)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);
        }
        err << "error: " << e.what() << '\n';
        return kExitGeneric;
    }

    try {
        if (*synth) {
            return cmd_synth(sa, out);
        }
        if (*train) {
            return cmd_train(ta, out);
        }
        if (*cls) {
            return cmd_classify(ca, out);
        }
        return cmd_eval(ea, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitShape;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitGeneric;
    }
}

}  // namespace tactile
