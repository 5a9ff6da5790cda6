#pragma once

// Shared oracles and seeded generators for the test binaries.

#include "tactile/sensor_stream.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace tactile::test {

inline std::vector<double> random_samples(std::mt19937_64& rng, std::size_t n, double scale = 100.0)
{
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> out(n);
    for (double& v : out) {
        v = d(rng);
    }
    return out;
}

// Textbook O(n^2) DFT in long double, bin k = sum x_t exp(-2 pi i k t / n).
inline std::vector<std::complex<long double>> naive_dft(const std::vector<double>& x)
{
    const std::size_t n = x.size();
    std::vector<std::complex<long double>> out(n);
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    // exp(-2 pi i k t / n) only depends on k*t mod n.
    std::vector<std::complex<long double>> twiddle(n);
    for (std::size_t m = 0; m < n; ++m) {
        const long double a = -two_pi * static_cast<long double>(m) / static_cast<long double>(n);
        twiddle[m] = {std::cos(a), std::sin(a)};
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<long double> acc = 0.0L;
        for (std::size_t t = 0; t < n; ++t) {
            acc += static_cast<long double>(x[t]) * twiddle[(k * t) % n];
        }
        out[k] = acc;
    }
    return out;
}

inline Eigen::MatrixXd gaussian_rows(std::mt19937_64& rng, std::size_t n, const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& cov)
{
    const Eigen::MatrixXd l = cov.llt().matrixL();
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), mean.size());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        Eigen::VectorXd u(mean.size());
        for (Eigen::Index j = 0; j < u.size(); ++j) {
            u[j] = z(rng);
        }
        out.row(i) = (mean + l * u).transpose();
    }
    return out;
}

// Recording with default layout and constant channels.
inline Recording flat_recording(std::size_t n_ticks, double flux = 10.0, double core_temp = 25.0)
{
    Recording rec;
    rec.header = RecordingHeader::with_defaults(std::vector<double>(kDefaultElectrodeCount, 3000.0));
    for (std::size_t k = 0; k < n_ticks; ++k) {
        Tick t;
        t.vibration.assign(static_cast<std::size_t>(rec.header.samples_per_tick()), 0.0);
        t.flux = flux;
        t.core_temp = core_temp;
        t.electrodes = rec.header.electrode_resting;
        rec.ticks.push_back(std::move(t));
    }
    return rec;
}

}  // namespace tactile::test
