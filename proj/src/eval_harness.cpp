#include "tactile/eval_harness.hpp"

#include "tactile/errors.hpp"
#include "tactile/numeric.hpp"
#include "tactile/model_file.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

namespace tactile {

namespace {

constexpr std::string_view kModule = "eval_harness";

using nlohmann::json;

struct SegmentFeatures {
    std::string label;
    std::span<const WindowFeatures> windows;
};

SensorLayout layout_of(std::span<const LabeledRecording> dataset)
{
    if (dataset.empty()) {
        throw ConfigError(kModule, "dataset is empty");
    }
    const auto& h = dataset.front().recording.header;
    const SensorLayout layout{h.vibration_rate, h.lowrate, h.electrode_count};
    for (const LabeledRecording& r : dataset) {
        const auto& o = r.recording.header;
        if (SensorLayout{o.vibration_rate, o.lowrate, o.electrode_count} != layout) {
            throw ShapeError(kModule, "recording '" + r.label + "' has a different sensor layout");
        }
    }
    return layout;
}

FoldMetrics evaluate_features(std::span<const SegmentFeatures> train, std::span<const SegmentFeatures> test,
                              const SensorLayout& layout, Modality modality, const EvalConfig& config)
{
    std::vector<MaterialWindows> groups;
    for (const SegmentFeatures& seg : train) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const MaterialWindows& g) { return g.label == seg.label; });
        if (it == groups.end()) {
            groups.push_back({seg.label, {}});
            it = std::prev(groups.end());
        }
        it->windows.insert(it->windows.end(), seg.windows.begin(), seg.windows.end());
    }
    for (const SegmentFeatures& seg : test) {
        if (std::none_of(groups.begin(), groups.end(), [&](const MaterialWindows& g) { return g.label == seg.label; })) {
            throw ConfigError(kModule, "material '" + seg.label + "' appears in the test set but not in training");
        }
        if (seg.windows.empty()) {
            throw ConfigError(kModule, "test segment of '" + seg.label + "' holds no full window");
        }
    }

    const bool with_thermal = modality == Modality::MultiModal;
    const TrainedModel model = train_model(groups, layout, config.pipeline, with_thermal);

    FoldMetrics metrics;
    metrics.projection_dim = model.projection.dim();
    for (const MaterialModel& m : model.materials) {
        metrics.materials.push_back(m.name);
        metrics.vibration_components.push_back(static_cast<int>(m.vibration.components()));
        metrics.thermal_components.push_back(m.thermal ? static_cast<int>(m.thermal->components()) : 0);
    }
    metrics.tallies.resize(model.size());

    for (const SegmentFeatures& seg : test) {
        const std::size_t truth = *model.index_of(seg.label);
        const auto ll = window_log_likelihoods(model, seg.windows, modality);
        MaterialTally& tally = metrics.tallies[truth];
        for (std::size_t start = 0; start < ll.size(); ++start) {
            const auto outcome = evaluate_session(std::span(ll).subspan(start), truth,
                                                  config.pipeline.posterior_floor, config.rule);
            ++tally.sessions;
            if (outcome.recognized) {
                tally.times.push_back(static_cast<double>(outcome.windows) * config.pipeline.dt);
            } else {
                ++tally.misclassified;
            }
        }
    }
    return metrics;
}

std::span<const WindowFeatures> window_slice(const std::vector<WindowFeatures>& features, const Segment& seg,
                                              std::size_t data_offset, std::size_t ticks_per_win)
{
    const std::size_t first = (seg.begin - data_offset) / ticks_per_win;
    const std::size_t count = (seg.end - seg.begin) / ticks_per_win;
    return std::span(features).subspan(first, count);
}

std::optional<double> mean_of(const std::vector<double>& v)
{
    if (v.empty()) {
        return std::nullopt;
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation.
std::optional<double> std_of(const std::vector<double>& v)
{
    const auto m = mean_of(v);
    if (!m) {
        return std::nullopt;
    }
    double ss = 0.0;
    for (double x : v) {
        ss += (x - *m) * (x - *m);
    }
    return std::sqrt(ss / static_cast<double>(v.size()));
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

json report_json(const EvalReport& r)
{
    json j;
    j["modality"] = std::string(to_string(r.modality));
    j["success_rule"] = std::string(to_string(r.config.rule));
    j["folds"] = r.config.folds;
    j["config"] = config_to_json(r.config.pipeline);
    json mats = json::array();
    for (const MaterialReport& m : r.materials) {
        mats.push_back({{"name", m.name},
                        {"sessions", m.sessions},
                        {"misclassified", m.misclassified},
                        {"error_rate", m.error_rate},
                        {"mean_time_s", optional_number(m.mean_time)},
                        {"std_time_s", optional_number(m.std_time)}});
    }
    j["materials"] = std::move(mats);
    j["overall"] = {{"sessions", r.sessions},
                    {"misclassified", r.misclassified},
                    {"error_rate", r.error_rate},
                    {"mean_time_s", optional_number(r.mean_time)},
                    {"std_time_s", optional_number(r.std_time)}};
    j["projection_dims"] = r.projection_dims;
    return j;
}

}  // namespace

std::string_view to_string(SuccessRule rule)
{
    return rule == SuccessRule::StableToEnd ? "stable-to-end" : "first-hit";
}

SuccessRule parse_success_rule(std::string_view text)
{
    if (text == "stable-to-end" || text == "stable") {
        return SuccessRule::StableToEnd;
    }
    if (text == "first-hit") {
        return SuccessRule::FirstHit;
    }
    throw ParameterError(kModule, "unknown success rule '" + std::string(text) + "'");
}

void EvalConfig::validate() const
{
    pipeline.validate();
    if (folds < 2) {
        throw ParameterError(kModule, "cross validation needs at least 2 folds, got " + std::to_string(folds));
    }
}

std::vector<Segment> FoldPlan::test_segments(int fold) const
{
    std::vector<Segment> out;
    for (const auto& per_rec : segments) {
        out.push_back(per_rec.at(static_cast<std::size_t>(fold)));
    }
    return out;
}

std::vector<Segment> FoldPlan::train_segments(int fold) const
{
    std::vector<Segment> out;
    for (const auto& per_rec : segments) {
        for (std::size_t f = 0; f < per_rec.size(); ++f) {
            if (static_cast<int>(f) != fold) {
                out.push_back(per_rec[f]);
            }
        }
    }
    return out;
}

FoldPlan make_fold_plan(std::span<const LabeledRecording> dataset, int folds, double dt)
{
    if (folds < 2) {
        throw ParameterError(kModule, "cross validation needs at least 2 folds, got " + std::to_string(folds));
    }
    FoldPlan plan;
    plan.folds = folds;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        const Recording& rec = dataset[r].recording;
        const std::size_t tpw = ticks_per_window(rec.header, dt);
        const std::size_t offset = rec.ticks.size() - rec.data_ticks().size();
        const std::size_t wins = rec.data_ticks().size() / tpw;
        const std::size_t per_fold = wins / static_cast<std::size_t>(folds);
        if (per_fold == 0) {
            throw ConfigError(kModule, "recording '" + dataset[r].label + "' has " + std::to_string(wins) +
                                           " windows, too few for " + std::to_string(folds) + " folds");
        }
        std::vector<Segment> segs;
        for (int f = 0; f < folds; ++f) {
            const std::size_t begin = offset + static_cast<std::size_t>(f) * per_fold * tpw;
            segs.push_back({r, begin, begin + per_fold * tpw});
        }
        plan.segments.push_back(std::move(segs));
    }
    return plan;
}

SessionOutcome evaluate_session(std::span<const std::vector<double>> log_likelihoods, std::size_t truth,
                                double posterior_floor, SuccessRule rule)
{
    SessionOutcome out;
    if (log_likelihoods.empty()) {
        return out;
    }
    PosteriorState state = init_uniform(log_likelihoods.front().size());
    std::optional<std::size_t> last_wrong;
    std::optional<std::size_t> first_hit;
    for (std::size_t i = 0; i < log_likelihoods.size(); ++i) {
        state = update_log(state, log_likelihoods[i], posterior_floor);
        const Decision d = classify(state);
        if (d.material_index == truth) {
            if (!first_hit) {
                first_hit = i;
            }
        } else {
            last_wrong = i;
        }
    }
    if (rule == SuccessRule::FirstHit) {
        if (first_hit) {
            out.recognized = true;
            out.windows = *first_hit + 1;
        }
        return out;
    }
    const std::size_t last = log_likelihoods.size() - 1;
    if (last_wrong && *last_wrong == last) {
        return out;
    }
    out.recognized = true;
    out.windows = last_wrong ? *last_wrong + 2 : 1;
    return out;
}

FoldMetrics run_fold(std::span<const LabeledRecording> dataset, std::span<const Segment> train,
                     std::span<const Segment> test, Modality modality, const EvalConfig& config)
{
    config.pipeline.validate();
    const SensorLayout layout = layout_of(dataset);
    const bool with_thermal = modality == Modality::MultiModal;

    for (const Segment& a : train) {
        for (const Segment& b : test) {
            if (a.recording == b.recording && a.begin < b.end && b.begin < a.end) {
                throw ConfigError(kModule, "train and test segments overlap");
            }
        }
    }
    auto features_of = [&](std::span<const Segment> segs) {
        std::vector<std::vector<WindowFeatures>> feats;
        for (const Segment& s : segs) {
            const Recording& rec = dataset[s.recording].recording;
            if (s.begin > s.end || s.end > rec.ticks.size()) {
                throw ConfigError(kModule, "segment outside recording '" + dataset[s.recording].label + "'");
            }
            const auto ticks = std::span(rec.ticks).subspan(s.begin, s.end - s.begin);
            feats.push_back(extract_features(ticks, rec.header, config.pipeline, with_thermal));
        }
        return feats;
    };
    const auto train_feats = features_of(train);
    const auto test_feats = features_of(test);
    std::vector<SegmentFeatures> train_view;
    std::vector<SegmentFeatures> test_view;
    for (std::size_t i = 0; i < train.size(); ++i) {
        train_view.push_back({dataset[train[i].recording].label, train_feats[i]});
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
        test_view.push_back({dataset[test[i].recording].label, test_feats[i]});
    }
    return evaluate_features(train_view, test_view, layout, modality, config);
}

const MaterialReport* EvalReport::find(std::string_view name) const
{
    for (const MaterialReport& m : materials) {
        if (m.name == name) {
            return &m;
        }
    }
    return nullptr;
}

double EvalReport::error_rate_over(std::span<const std::string> names) const
{
    std::size_t sessions_total = 0;
    std::size_t wrong = 0;
    for (const std::string& n : names) {
        const MaterialReport* m = find(n);
        if (m == nullptr) {
            throw ParameterError(kModule, "no material '" + n + "' in report");
        }
        sessions_total += m->sessions;
        wrong += m->misclassified;
    }
    return sessions_total == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(sessions_total);
}

EvalReport cross_validate(std::span<const LabeledRecording> dataset, Modality modality, const EvalConfig& config)
{
    config.validate();
    const SensorLayout layout = layout_of(dataset);
    const FoldPlan plan = make_fold_plan(dataset, config.folds, config.pipeline.dt);
    const bool with_thermal = modality == Modality::MultiModal;

    // Windows are aligned to fold boundaries, so features are computed once
    // per recording and sliced per fold.
    std::vector<std::vector<WindowFeatures>> features;
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> tpws;
    for (const LabeledRecording& r : dataset) {
        features.push_back(extract_features(r.recording.data_ticks(), r.recording.header, config.pipeline, with_thermal));
        offsets.push_back(r.recording.ticks.size() - r.recording.data_ticks().size());
        tpws.push_back(ticks_per_window(r.recording.header, config.pipeline.dt));
    }
    auto view = [&](const std::vector<Segment>& segs) {
        std::vector<SegmentFeatures> out;
        for (const Segment& s : segs) {
            out.push_back({dataset[s.recording].label,
                           window_slice(features[s.recording], s, offsets[s.recording], tpws[s.recording])});
        }
        return out;
    };

    EvalReport report;
    report.modality = modality;
    report.config = config;
    std::vector<MaterialTally> totals;
    std::vector<std::string> names;
    for (int f = 0; f < config.folds; ++f) {
        const auto train = view(plan.train_segments(f));
        const auto test = view(plan.test_segments(f));
        EvalConfig fold_config = config;
        fold_config.pipeline.seed = mix_seed(config.pipeline.seed, static_cast<std::uint64_t>(f));
        const FoldMetrics m = evaluate_features(train, test, layout, modality, fold_config);
        if (f == 0) {
            names = m.materials;
            totals.resize(names.size());
        }
        for (std::size_t j = 0; j < names.size(); ++j) {
            totals[j].sessions += m.tallies[j].sessions;
            totals[j].misclassified += m.tallies[j].misclassified;
            totals[j].times.insert(totals[j].times.end(), m.tallies[j].times.begin(), m.tallies[j].times.end());
        }
        report.projection_dims.push_back(m.projection_dim);
    }

    std::vector<double> means;
    std::vector<double> stds;
    for (std::size_t j = 0; j < names.size(); ++j) {
        MaterialReport mr;
        mr.name = names[j];
        mr.sessions = totals[j].sessions;
        mr.misclassified = totals[j].misclassified;
        mr.error_rate = mr.sessions == 0 ? 0.0 : static_cast<double>(mr.misclassified) / static_cast<double>(mr.sessions);
        mr.mean_time = mean_of(totals[j].times);
        mr.std_time = std_of(totals[j].times);
        if (mr.mean_time) {
            means.push_back(*mr.mean_time);
            stds.push_back(*mr.std_time);
        }
        report.sessions += mr.sessions;
        report.misclassified += mr.misclassified;
        report.materials.push_back(std::move(mr));
    }
    report.error_rate = report.sessions == 0
                            ? 0.0
                            : static_cast<double>(report.misclassified) / static_cast<double>(report.sessions);
    report.mean_time = mean_of(means);
    report.std_time = mean_of(stds);
    return report;
}

std::string reports_to_json(std::span<const EvalReport> reports)
{
    json j;
    j["version"] = 1;
    json arr = json::array();
    for (const EvalReport& r : reports) {
        arr.push_back(report_json(r));
    }
    j["reports"] = std::move(arr);
    const EvalReport* vib = nullptr;
    const EvalReport* mm = nullptr;
    for (const EvalReport& r : reports) {
        (r.modality == Modality::Vibration ? vib : mm) = &r;
    }
    if (vib != nullptr && mm != nullptr) {
        json c;
        c["vibration"] = {{"mean_time_s", optional_number(vib->mean_time)}, {"error_rate", vib->error_rate}};
        c["multimodal"] = {{"mean_time_s", optional_number(mm->mean_time)}, {"error_rate", mm->error_rate}};
        std::optional<double> time_reduction;
        if (vib->mean_time && mm->mean_time && *vib->mean_time > 0.0) {
            time_reduction = 1.0 - *mm->mean_time / *vib->mean_time;
        }
        std::optional<double> error_reduction;
        if (vib->error_rate > 0.0) {
            error_reduction = 1.0 - mm->error_rate / vib->error_rate;
        }
        c["time_reduction"] = optional_number(time_reduction);
        c["error_reduction"] = optional_number(error_reduction);
        j["comparison"] = std::move(c);
    }
    return j.dump(2) + "\n";
}

std::string reports_to_csv(std::span<const EvalReport> reports)
{
    std::ostringstream out;
    out << "modality,material,sessions,misclassified,error_rate,mean_time_s,std_time_s\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const EvalReport& r : reports) {
        for (const MaterialReport& m : r.materials) {
            out << to_string(r.modality) << ',' << m.name << ',' << m.sessions << ',' << m.misclassified << ','
                << format_double(m.error_rate) << ',' << opt(m.mean_time) << ',' << opt(m.std_time) << '\n';
        }
    }
    return out.str();
}

}  // namespace tactile
