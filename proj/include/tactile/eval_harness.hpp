#pragma once

// Cross-validated evaluation of the recursive classifier over sequential
// data: contiguous equal-length folds per recording, and suffix-truncated
// test sessions that restart from every window of the held-out segment.
//
// A session starting at window s runs from uniform priors to the end of
// the segment. Its recognition time is dt times the (1-based) window at
// which the true material becomes the argmax and stays the argmax for the
// rest of the session. Sessions without such a window are misclassified
// and excluded from the time statistics.

#include "tactile/synth_bench.hpp"
#include "tactile/training.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tactile {

enum class SuccessRule {
    StableToEnd,  // correct from the recognition window to the session's end
    FirstHit,     // first window with a correct argmax
};

std::string_view to_string(SuccessRule rule);
SuccessRule parse_success_rule(std::string_view text);

struct EvalConfig {
    PipelineConfig pipeline;
    int folds = 10;
    SuccessRule rule = SuccessRule::StableToEnd;

    void validate() const;
};

// Contiguous tick range [begin, end) of one recording.
struct Segment {
    std::size_t recording = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct FoldPlan {
    int folds = 0;
    // segments[r][f]: fold f of recording r, indices into Recording::ticks.
    std::vector<std::vector<Segment>> segments;

    std::vector<Segment> test_segments(int fold) const;
    std::vector<Segment> train_segments(int fold) const;
};

// Splits each recording's data ticks (after any calibration span) into
// `folds` equal runs of whole windows; trailing windows that do not fill a
// fold are left out of every fold.
FoldPlan make_fold_plan(std::span<const LabeledRecording> dataset, int folds, double dt);

struct SessionOutcome {
    bool recognized = false;
    std::size_t windows = 0;  // 1-based recognition window within the session
};

// Runs one session over per-window log-likelihoods (rows: windows,
// columns: materials) from uniform priors.
SessionOutcome evaluate_session(std::span<const std::vector<double>> log_likelihoods, std::size_t truth,
                                double posterior_floor, SuccessRule rule);

struct MaterialTally {
    std::size_t sessions = 0;
    std::size_t misclassified = 0;
    std::vector<double> times;  // seconds, recognized sessions only
};

struct FoldMetrics {
    std::vector<std::string> materials;           // model order
    std::vector<MaterialTally> tallies;           // parallel to materials
    std::size_t projection_dim = 0;
    std::vector<int> vibration_components;
    std::vector<int> thermal_components;
};

// Trains on `train` and evaluates every suffix session of every `test`
// segment.
FoldMetrics run_fold(std::span<const LabeledRecording> dataset, std::span<const Segment> train,
                     std::span<const Segment> test, Modality modality, const EvalConfig& config);

struct MaterialReport {
    std::string name;
    std::size_t sessions = 0;
    std::size_t misclassified = 0;
    double error_rate = 0.0;
    std::optional<double> mean_time;
    std::optional<double> std_time;
};

struct EvalReport {
    Modality modality = Modality::MultiModal;
    EvalConfig config;
    std::vector<MaterialReport> materials;
    std::size_t sessions = 0;
    std::size_t misclassified = 0;
    double error_rate = 0.0;          // misclassified / sessions
    std::optional<double> mean_time;  // average of per-material means
    std::optional<double> std_time;   // average of per-material stds
    std::vector<std::size_t> projection_dims;  // per fold

    const MaterialReport* find(std::string_view name) const;
    // Pooled session error rate over the named materials.
    double error_rate_over(std::span<const std::string> names) const;
};

EvalReport cross_validate(std::span<const LabeledRecording> dataset, Modality modality, const EvalConfig& config);

// Report files. JSON holds one report per modality and, with two
// modalities, a comparison section; CSV holds one row per material per
// modality.
std::string reports_to_json(std::span<const EvalReport> reports);
std::string reports_to_csv(std::span<const EvalReport> reports);

}  // namespace tactile
