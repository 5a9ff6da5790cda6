#include "support.hpp"

#include "tactile/errors.hpp"
#include "tactile/vibration_features.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace tactile;

namespace {

Spectrum spectrum_of(const Eigen::VectorXd& modulus)
{
    Spectrum s;
    for (Eigen::Index i = 0; i < modulus.size(); ++i) {
        s.values.emplace_back(modulus[i], 0.0);
        s.bin_freqs.push_back(4.0 * static_cast<double>(i + 1));
    }
    return s;
}

}  // namespace

TEST_CASE("default band keeps 124 bins spaced 4 Hz")
{
    const std::vector<double> x(550, 1.0);
    const Spectrum s = compute_spectrum(x, 2200.0, Band{});
    REQUIRE(s.size() == 124);
    CHECK(s.bin_freqs.front() == doctest::Approx(4.0));
    CHECK(s.bin_freqs.back() == doctest::Approx(496.0));
    for (std::size_t i = 1; i < s.size(); ++i) {
        CHECK(s.bin_freqs[i] - s.bin_freqs[i - 1] == doctest::Approx(4.0));
    }
}

TEST_CASE("100 Hz tone lands on band index 24")
{
    std::vector<double> x(550);
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = std::sin(2.0 * std::numbers::pi * 100.0 * static_cast<double>(t) / 2200.0);
    }
    const Spectrum s = compute_spectrum(x, 2200.0, Band{});
    const double peak = std::abs(s.values[24]);
    CHECK(peak == doctest::Approx(275.0).epsilon(1e-12));
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i != 24) {
            CHECK(std::abs(s.values[i]) <= 1e-9 * peak);
        }
    }
}

TEST_CASE("all-zero window has a zero spectrum")
{
    const std::vector<double> x(550, 0.0);
    for (const auto& v : compute_spectrum(x, 2200.0, Band{}).values) {
        CHECK(v == std::complex<double>(0.0, 0.0));
    }
}

TEST_CASE("fft matches the naive DFT on every bin, odd and even lengths")
{
    std::mt19937_64 rng(21);
    for (std::size_t n : {550u, 551u, 64u, 7u, 2u}) {
        const auto x = test::random_samples(rng, n);
        const auto oracle = test::naive_dft(x);
        RealFft fft(n);
        const auto got = fft.execute(x);
        REQUIRE(got.size() == n / 2 + 1);
        for (std::size_t k = 0; k < got.size(); ++k) {
            const auto ref = std::complex<double>(static_cast<double>(oracle[k].real()),
                                                  static_cast<double>(oracle[k].imag()));
            CHECK(std::abs(got[k] - ref) <= 1e-9 * std::max(std::abs(ref), 1.0));
        }
        const auto full = full_dft(x);
        CHECK(std::abs(full[1] - got[1]) <= 1e-9 * std::abs(got[1]) + 1e-12);
    }
}

TEST_CASE("fft size mismatch is rejected")
{
    RealFft fft(550);
    const std::vector<double> x(549, 0.0);
    CHECK_THROWS_AS(fft.execute(x), ParameterError);
}

TEST_CASE("identical spectra are a degenerate training set")
{
    const Spectrum s = spectrum_of(Eigen::Vector3d(1.0, 2.0, 3.0));
    const std::vector<Spectrum> train(10, s);
    try {
        fit_projection(train, 0.97);
        FAIL("expected an error");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("degenerate training set") != std::string::npos);
    }
}

TEST_CASE("rank-1 data gives d=1 parallel to the line")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const Eigen::Vector2d dir = Eigen::Vector2d(3.0, 4.0).normalized();
    std::vector<Spectrum> train;
    for (int i = 0; i < 50; ++i) {
        // Positive moduli a line through (20, 20); centering by the complex
        // mean keeps them on the line because values stay real and positive.
        train.push_back(spectrum_of(Eigen::Vector2d(20.0, 20.0) + u(rng) * dir));
    }
    for (double target : {0.5, 0.97, 1.0}) {
        const ProjectionModel m = fit_projection(train, target);
        REQUIRE(m.dim() == 1);
        CHECK(std::abs(std::abs(m.basis.row(0).dot(dir.transpose())) - 1.0) < 1e-9);
    }
}

TEST_CASE("5-bin eigenvalue example picks d=3")
{
    std::mt19937_64 rng(1234);
    Eigen::MatrixXd q = Eigen::MatrixXd::Random(5, 5);
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ();
    Eigen::VectorXd ev(5);
    ev << 10.0, 5.0, 1.0, 0.1, 0.01;
    const Eigen::MatrixXd cov = q * ev.asDiagonal() * q.transpose();
    const Eigen::MatrixXd rows = test::gaussian_rows(rng, 200, Eigen::VectorXd::Constant(5, 100.0), cov);
    std::vector<Spectrum> train;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        train.push_back(spectrum_of(rows.row(i).transpose()));
    }
    const ProjectionModel m = fit_projection(train, 0.97);

    // Oracle: eigenvalues of the sample covariance of |s - complex mean|.
    Eigen::MatrixXd v(rows.rows(), 5);
    const Eigen::RowVectorXd mu = rows.colwise().mean();
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        v.row(i) = (rows.row(i) - mu).cwiseAbs();
    }
    const Eigen::MatrixXd c = v.rowwise() - v.colwise().mean();
    const Eigen::MatrixXd sc = c.transpose() * c / static_cast<double>(v.rows() - 1);
    const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sc).eigenvalues().reverse();
    std::size_t d_oracle = 0;
    double acc = 0.0;
    while (acc / lam.sum() < 0.97) {
        acc += lam[static_cast<Eigen::Index>(d_oracle++)];
    }
    CHECK(m.dim() == d_oracle);
    CHECK(m.dim() == 3);
    CHECK(m.retained_variance >= 0.97);
    CHECK(m.retained_variance == doctest::Approx(acc / lam.sum()).epsilon(1e-9));
}

TEST_CASE("projection invariants on random spectra")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Spectrum> train;
        for (int i = 0; i < 80; ++i) {
            train.push_back(compute_spectrum(test::random_samples(rng, 550), 2200.0, Band{}));
        }
        const double target = 0.5 + 0.02 * trial;
        const ProjectionModel m = fit_projection(train, target);
        CHECK(m.retained_variance >= target);
        const Eigen::MatrixXd gram = m.basis * m.basis.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-9);
        for (Eigen::Index r = 0; r < m.basis.rows(); ++r) {
            Eigen::Index at;
            m.basis.row(r).cwiseAbs().maxCoeff(&at);
            CHECK(m.basis(r, at) > 0.0);
        }
    }
}

TEST_CASE("project: oracle cases")
{
    std::mt19937_64 rng(17);
    std::vector<Spectrum> train;
    for (int i = 0; i < 60; ++i) {
        train.push_back(compute_spectrum(test::random_samples(rng, 550), 2200.0, Band{}));
    }
    const ProjectionModel m = fit_projection(train, 0.9);

    Spectrum at_mean = train[0];
    at_mean.values = m.complex_mean;
    CHECK(project(at_mean, m).rho_bar.cwiseAbs().maxCoeff() == 0.0);

    const Spectrum s = compute_spectrum(test::random_samples(rng, 550), 2200.0, Band{});
    Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = std::abs(s.values[i] - m.complex_mean[i]);
    }
    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(m.basis.rows());
    for (Eigen::Index r = 0; r < m.basis.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.basis.cols(); ++c) {
            oracle[r] += m.basis(r, c) * v[c];
        }
    }
    CHECK((project(s, m).rho_bar - oracle).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, oracle.norm()));

    ProjectionModel one;
    one.complex_mean = {std::complex<double>(1.0, 1.0)};
    one.basis = Eigen::MatrixXd::Ones(1, 1);
    Spectrum s1;
    s1.values = {std::complex<double>(1.0, 4.0)};
    s1.bin_freqs = {4.0};
    CHECK(project(s1, one).rho_bar[0] == doctest::Approx(3.0).epsilon(1e-15));

    Spectrum wrong = s;
    wrong.values.pop_back();
    wrong.bin_freqs.pop_back();
    CHECK_THROWS_AS(project(wrong, m), ParameterError);
}

TEST_CASE("fit_projection argument checks")
{
    const Spectrum s = spectrum_of(Eigen::Vector2d(1.0, 2.0));
    const std::vector<Spectrum> one{s};
    CHECK_THROWS_AS(fit_projection(one, 0.97), ParameterError);
    const std::vector<Spectrum> two{s, spectrum_of(Eigen::Vector2d(2.0, 1.0))};
    CHECK_THROWS_AS(fit_projection(two, 0.0), ParameterError);
    CHECK_THROWS_AS(fit_projection(two, 1.01), ParameterError);
}
