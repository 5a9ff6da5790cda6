#pragma once

// Full-covariance Gaussian mixture likelihoods, fit by EM, with the
// component count chosen at the knee of the held-out likelihood curve.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tactile {

struct EmSettings {
    int max_iterations = 500;
    double tolerance = 1e-7;           // relative log-likelihood improvement
    double regularization = 1e-6;      // times the mean per-dimension data variance
    int kmeans_iterations = 100;

    bool operator==(const EmSettings&) const = default;
};

struct KneeSettings {
    int k_max = 4;
    double holdout_fraction = 0.2;
    double tau = 0.02;

    bool operator==(const KneeSettings&) const = default;
};

// Immutable mixture with cached Cholesky factors.
class Gmm {
public:
    // Throws ParameterError unless weights lie on the simplex and every
    // covariance is symmetric positive definite with matching dimension.
    Gmm(Eigen::VectorXd weights, std::vector<Eigen::VectorXd> means, std::vector<Eigen::MatrixXd> covariances);

    std::size_t components() const { return means_.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(means_.front().size()); }
    const Eigen::VectorXd& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& means() const { return means_; }
    const std::vector<Eigen::MatrixXd>& covariances() const { return covariances_; }

    // log N(x; mu_k, Sigma_k) for component k.
    double component_log_density(std::size_t k, const Eigen::VectorXd& x) const;
    // log sum_k w_k N(x; mu_k, Sigma_k), via log-sum-exp.
    double log_likelihood(const Eigen::VectorXd& x) const;
    // Mean log-likelihood over the rows of `data`.
    double mean_log_likelihood(const Eigen::MatrixXd& data) const;

private:
    Eigen::VectorXd weights_;
    std::vector<Eigen::VectorXd> means_;
    std::vector<Eigen::MatrixXd> covariances_;
    std::vector<Eigen::MatrixXd> chol_;   // lower factors
    std::vector<double> log_norm_;        // -0.5 (d log 2pi + log det)
    Eigen::VectorXd log_weights_;
};

double log_likelihood(const Gmm& gmm, const Eigen::VectorXd& x);

struct EmTrace {
    std::vector<double> log_likelihood;  // total training log-likelihood per E-step
    int iterations = 0;
    bool converged = false;
    double regularization = 0.0;  // absolute value added to covariance diagonals
    int reseeds = 0;
};

// Regularizer added to every covariance diagonal for this data set.
double covariance_floor(const Eigen::MatrixXd& data, const EmSettings& settings = {});

// EM on the rows of `data`. k-means++ (with Lloyd refinement) seeds the
// means; every component starts from the pooled data covariance.
Gmm em_fit(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const EmSettings& settings = {},
           EmTrace* trace = nullptr);

// Smallest K whose step to K+1 improves the mean held-out log-likelihood by
// less than tau (relative); k_max when every step clears tau.
int select_components(const Eigen::MatrixXd& data, const KneeSettings& knee, std::uint64_t seed,
                      const EmSettings& settings = {}, std::vector<double>* holdout_curve = nullptr);

struct MaterialModel {
    std::string name;
    Gmm vibration;
    std::optional<Gmm> thermal;  // absent in vibration-only models
};

}  // namespace tactile
