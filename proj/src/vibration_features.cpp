#include "tactile/vibration_features.hpp"

#include "tactile/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

namespace tactile {

namespace {

constexpr std::string_view kModule = "vibration_features";

// The FFTW planner is not thread-safe; plan creation and destruction go
// through this lock. Executing an existing plan needs no lock.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace

struct RealFft::Plan {
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    Plan() = default;
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan()
    {
        std::lock_guard lock(planner_mutex());
        if (plan != nullptr) {
            fftw_destroy_plan(plan);
        }
        fftw_free(in);
        fftw_free(out);
    }
};

RealFft::RealFft(std::size_t n) : n_(n), plan_(std::make_unique<Plan>())
{
    if (n == 0) {
        throw ParameterError(kModule, "FFT length must be positive");
    }
    {
        std::lock_guard lock(planner_mutex());
        plan_->in = fftw_alloc_real(n);
        plan_->out = fftw_alloc_complex(n / 2 + 1);
        // FFTW_ESTIMATE picks the same plan on every run, keeping outputs bit-reproducible.
        plan_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), plan_->in, plan_->out, FFTW_ESTIMATE);
    }
    if (plan_->plan == nullptr) {
        throw NumericError(kModule, "FFTW could not create a plan of length " + std::to_string(n));
    }
}

RealFft::~RealFft() = default;

RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

std::vector<std::complex<double>> RealFft::execute(std::span<const double> samples)
{
    if (samples.size() != n_) {
        throw ParameterError(kModule, "FFT of length " + std::to_string(n_) + " given " +
                                          std::to_string(samples.size()) + " samples");
    }
    std::copy(samples.begin(), samples.end(), plan_->in);
    fftw_execute(plan_->plan);
    std::vector<std::complex<double>> out(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = {plan_->out[k][0], plan_->out[k][1]};
    }
    return out;
}

std::vector<std::complex<double>> full_dft(std::span<const double> samples)
{
    const std::size_t n = samples.size();
    RealFft fft(n);
    auto half = fft.execute(samples);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = k < half.size() ? half[k] : std::conj(half[n - k]);
    }
    return out;
}

Spectrum compute_spectrum(RealFft& fft, std::span<const double> samples, double sample_rate, Band band)
{
    if (!(band.lo > 0.0) || !(band.lo < band.hi) || band.hi > sample_rate / 2.0) {
        throw ParameterError(kModule, "band must satisfy 0 < f_lo < f_hi <= sample_rate/2");
    }
    const std::size_t n = samples.size();
    const double spacing = sample_rate / static_cast<double>(n);
    const double eps = 1e-9 * spacing;
    const auto half = fft.execute(samples);

    Spectrum s;
    for (std::size_t k = 0; k < half.size(); ++k) {
        const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
        if (f >= band.lo - eps && f < band.hi - eps) {
            s.values.push_back(half[k]);
            s.bin_freqs.push_back(f);
        }
    }
    if (s.values.empty()) {
        throw ParameterError(kModule, "no DFT bins fall inside [" + format_double(band.lo) + ", " +
                                          format_double(band.hi) + ") Hz at " +
                                          format_double(spacing) + " Hz spacing");
    }
    return s;
}

Spectrum compute_spectrum(std::span<const double> samples, double sample_rate, Band band)
{
    RealFft fft(samples.size());
    return compute_spectrum(fft, samples, sample_rate, band);
}

Spectrum compute_spectrum(const SensorWindow& window, Band band)
{
    const auto samples = window.vibration();
    return compute_spectrum(samples, window.header().vibration_rate, band);
}

Eigen::VectorXd centered_modulus(const Spectrum& spectrum, std::span<const std::complex<double>> mean)
{
    if (spectrum.size() != mean.size()) {
        throw ParameterError(kModule, "spectrum has " + std::to_string(spectrum.size()) +
                                          " bins, projection expects " + std::to_string(mean.size()));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(mean.size()));
    for (std::size_t i = 0; i < mean.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = std::abs(spectrum.values[i] - mean[i]);
    }
    return v;
}

ProjectionModel fit_projection(std::span<const Spectrum> spectra, double variance_target)
{
    if (spectra.size() < 2) {
        throw ParameterError(kModule, "fit_projection needs at least 2 spectra, got " +
                                          std::to_string(spectra.size()));
    }
    if (!(variance_target > 0.0) || variance_target > 1.0) {
        throw ParameterError(kModule, "variance target must lie in (0, 1], got " + format_double(variance_target));
    }
    const std::size_t bins = spectra.front().size();
    for (const Spectrum& s : spectra) {
        if (s.size() != bins) {
            throw ParameterError(kModule, "training spectra have differing bin counts");
        }
    }
    const auto n = static_cast<double>(spectra.size());

    ProjectionModel model;
    model.variance_target = variance_target;
    model.complex_mean.assign(bins, {0.0, 0.0});
    double scale = 0.0;
    for (const Spectrum& s : spectra) {
        for (std::size_t i = 0; i < bins; ++i) {
            model.complex_mean[i] += s.values[i];
            scale += std::norm(s.values[i]);
        }
    }
    for (auto& m : model.complex_mean) {
        m /= n;
    }
    scale /= n;

    Eigen::MatrixXd v(static_cast<Eigen::Index>(spectra.size()), static_cast<Eigen::Index>(bins));
    for (std::size_t r = 0; r < spectra.size(); ++r) {
        v.row(static_cast<Eigen::Index>(r)) = centered_modulus(spectra[r], model.complex_mean).transpose();
    }
    const Eigen::RowVectorXd v_mean = v.colwise().mean();
    v.rowwise() -= v_mean;
    const Eigen::MatrixXd cov = (v.transpose() * v) / (n - 1.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw NumericError(kModule, "eigendecomposition of the modulus covariance failed");
    }
    // Eigen returns ascending eigenvalues; walk from the largest.
    Eigen::VectorXd values = eig.eigenvalues();
    const Eigen::Index m = values.size();
    // Rounding noise in the null space would otherwise keep a target of 1
    // from being met by a rank-deficient set.
    const double noise = 1e-12 * std::max(values[m - 1], 0.0);
    double total = 0.0;
    for (Eigen::Index i = m - 1; i >= 0; --i) {
        if (values[i] <= noise) {
            values[i] = 0.0;
        }
        total += values[i];
    }
    if (!(total > 1e-14 * std::max(scale, 1.0))) {
        throw NumericError(kModule, "degenerate training set (zero total variance)");
    }

    Eigen::Index d = m;
    double cumulative = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        cumulative += std::max(values[m - 1 - k], 0.0);
        if (cumulative / total >= variance_target) {
            d = k + 1;
            break;
        }
    }
    if (d == m) {
        cumulative = total;
    }
    model.retained_variance = std::min(cumulative / total, 1.0);

    model.basis.resize(d, m);
    for (Eigen::Index k = 0; k < d; ++k) {
        Eigen::VectorXd dir = eig.eigenvectors().col(m - 1 - k);
        Eigen::Index arg = 0;
        dir.cwiseAbs().maxCoeff(&arg);
        if (dir[arg] < 0.0) {
            dir = -dir;
        }
        model.basis.row(k) = dir.transpose();
    }
    return model;
}

VibrationFeature project(const Spectrum& spectrum, const ProjectionModel& model)
{
    if (spectrum.size() != model.bins()) {
        throw ParameterError(kModule, "dimension mismatch: spectrum has " + std::to_string(spectrum.size()) +
                                          " bins, projection expects " + std::to_string(model.bins()));
    }
    return {model.basis * centered_modulus(spectrum, model.complex_mean)};
}

}  // namespace tactile
