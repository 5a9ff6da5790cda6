#pragma once

// Spectral vibration features: DFT of a window's vibration samples,
// restricted to an analysis band, then reduced by PCA on the modulus of the
// spectrum after centering with the complex training mean.

#include "tactile/sensor_stream.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace tactile {

inline constexpr double kDefaultBandLow = 4.0;     // Hz
inline constexpr double kDefaultBandHigh = 500.0;  // Hz
inline constexpr double kDefaultVarianceTarget = 0.97;

// Analysis band. Bins with lo <= f < hi are retained; at 2200 Hz and
// 550-sample windows the default band keeps 124 bins (4 Hz .. 496 Hz).
struct Band {
    double lo = kDefaultBandLow;
    double hi = kDefaultBandHigh;

    bool operator==(const Band&) const = default;
};

struct Spectrum {
    std::vector<std::complex<double>> values;  // unnormalized DFT amplitudes
    std::vector<double> bin_freqs;             // Hz, increasing

    std::size_t size() const { return values.size(); }
};

// Real-input FFT of a fixed length. Plans are created once per instance;
// execute() may be called concurrently on distinct instances.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;

    std::size_t size() const { return n_; }
    // Bins 0..n/2 of X_k = sum_t x_t exp(-2 pi i k t / n).
    std::vector<std::complex<double>> execute(std::span<const double> samples);

private:
    struct Plan;
    std::size_t n_;
    std::unique_ptr<Plan> plan_;
};

// Full (unrestricted) DFT, bins 0..n-1.
std::vector<std::complex<double>> full_dft(std::span<const double> samples);

Spectrum compute_spectrum(std::span<const double> samples, double sample_rate, Band band);
Spectrum compute_spectrum(const SensorWindow& window, Band band);
// Reuses a caller-owned plan; fft.size() must equal the sample count.
Spectrum compute_spectrum(RealFft& fft, std::span<const double> samples, double sample_rate, Band band);

struct ProjectionModel {
    std::vector<std::complex<double>> complex_mean;  // one entry per bin
    Eigen::MatrixXd basis;                           // d x bins, orthonormal rows
    double retained_variance = 0.0;
    double variance_target = kDefaultVarianceTarget;

    std::size_t dim() const { return static_cast<std::size_t>(basis.rows()); }
    std::size_t bins() const { return complex_mean.size(); }
};

struct VibrationFeature {
    Eigen::VectorXd rho_bar;
};

// |s - mean| entrywise.
Eigen::VectorXd centered_modulus(const Spectrum& spectrum, std::span<const std::complex<double>> mean);

// Fits the complex mean and the PCA basis; d is the smallest dimension whose
// cumulative explained variance reaches variance_target.
ProjectionModel fit_projection(std::span<const Spectrum> spectra, double variance_target);

VibrationFeature project(const Spectrum& spectrum, const ProjectionModel& model);

}  // namespace tactile
