#include "tactile/material_models.hpp"

#include "tactile/errors.hpp"
#include "tactile/numeric.hpp"
#include "tactile/sensor_stream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace tactile {

namespace {

constexpr std::string_view kModule = "material_models";

Eigen::MatrixXd biased_covariance(const Eigen::MatrixXd& data)
{
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(data.rows());
}

// k-means++ seeding followed by Lloyd iterations.
std::vector<Eigen::VectorXd> kmeans_centers(const Eigen::MatrixXd& data, int k, std::mt19937_64& rng,
                                            int max_iterations)
{
    const Eigen::Index n = data.rows();
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(static_cast<std::size_t>(k));
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.push_back(data.row(pick(rng)).transpose());

    Eigen::VectorXd dist2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist2[i] = (data.row(i).transpose() - centers[0]).squaredNorm();
    }
    while (static_cast<int>(centers.size()) < k) {
        const double total = dist2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= dist2[i];
                if (target < 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.push_back(data.row(chosen).transpose());
        for (Eigen::Index i = 0; i < n; ++i) {
            dist2[i] = std::min(dist2[i], (data.row(i).transpose() - centers.back()).squaredNorm());
        }
    }

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = (data.row(i).transpose() - centers[static_cast<std::size_t>(c)]).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (assign[static_cast<std::size_t>(i)] != best) {
                assign[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(data.cols()));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
            sums[c] += data.row(i).transpose();
            ++counts[c];
        }
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (counts[c] > 0) {
                centers[c] = sums[c] / counts[c];
            }
        }
    }
    return centers;
}

}  // namespace

Gmm::Gmm(Eigen::VectorXd weights, std::vector<Eigen::VectorXd> means, std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances))
{
    const auto k = static_cast<std::size_t>(weights_.size());
    if (k == 0 || means_.size() != k || covariances_.size() != k) {
        throw ParameterError(kModule, "GMM needs matching, non-empty weights, means and covariances");
    }
    const Eigen::Index d = means_.front().size();
    if (d == 0) {
        throw ParameterError(kModule, "GMM dimension must be positive");
    }
    if ((weights_.array() < 0.0).any() || std::abs(weights_.sum() - 1.0) > 1e-9) {
        throw ParameterError(kModule, "GMM weights must be non-negative and sum to 1");
    }
    log_weights_ = weights_.array().log();
    chol_.reserve(k);
    log_norm_.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        const auto& cov = covariances_[c];
        if (means_[c].size() != d || cov.rows() != d || cov.cols() != d) {
            throw ParameterError(kModule, "GMM component " + std::to_string(c) + " has inconsistent dimensions");
        }
        if (!cov.isApprox(cov.transpose(), 1e-12)) {
            throw ParameterError(kModule, "GMM covariance " + std::to_string(c) + " is not symmetric");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            throw NumericError(kModule, "GMM covariance " + std::to_string(c) + " is not positive definite");
        }
        Eigen::MatrixXd l = llt.matrixL();
        const double log_det = 2.0 * l.diagonal().array().log().sum();
        chol_.push_back(std::move(l));
        log_norm_.push_back(-0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det));
    }
}

double Gmm::component_log_density(std::size_t k, const Eigen::VectorXd& x) const
{
    if (static_cast<std::size_t>(x.size()) != dim()) {
        throw ParameterError(kModule, "dimension mismatch: GMM over R^" + std::to_string(dim()) +
                                          " evaluated at a vector of length " + std::to_string(x.size()));
    }
    const Eigen::VectorXd z = chol_[k].triangularView<Eigen::Lower>().solve(x - means_[k]);
    return log_norm_[k] - 0.5 * z.squaredNorm();
}

double Gmm::log_likelihood(const Eigen::VectorXd& x) const
{
    std::vector<double> terms(components());
    for (std::size_t k = 0; k < terms.size(); ++k) {
        terms[k] = log_weights_[static_cast<Eigen::Index>(k)] + component_log_density(k, x);
    }
    return log_sum_exp(terms);
}

double Gmm::mean_log_likelihood(const Eigen::MatrixXd& data) const
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        sum += log_likelihood(data.row(i).transpose());
    }
    return sum / static_cast<double>(data.rows());
}

double log_likelihood(const Gmm& gmm, const Eigen::VectorXd& x)
{
    return gmm.log_likelihood(x);
}

double covariance_floor(const Eigen::MatrixXd& data, const EmSettings& settings)
{
    const double mean_var = biased_covariance(data).diagonal().mean();
    // Constant data has no scale of its own; fall back to unit variance.
    return settings.regularization * (mean_var > 0.0 ? mean_var : 1.0);
}

Gmm em_fit(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const EmSettings& settings, EmTrace* trace)
{
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (k < 1) {
        throw ParameterError(kModule, "component count must be at least 1");
    }
    if (d == 0 || n < k) {
        throw ParameterError(kModule, "EM needs at least k=" + std::to_string(k) + " points, got " +
                                          std::to_string(n));
    }
    if (!data.allFinite()) {
        throw ParameterError(kModule, "EM training data contains non-finite values");
    }

    const double reg = covariance_floor(data, settings);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd pooled = biased_covariance(data) + reg * identity;

    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> means = kmeans_centers(data, k, rng, settings.kmeans_iterations);
    std::vector<Eigen::MatrixXd> covs(static_cast<std::size_t>(k), pooled);
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(k, 1.0 / k);

    EmTrace local;
    local.regularization = reg;
    Eigen::MatrixXd log_resp(n, k);
    Eigen::VectorXd row_ll(n);
    double previous = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<std::size_t>(k));

    for (int iter = 0;; ++iter) {
        const Gmm current(weights, means, covs);
        // E-step
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd x = data.row(i).transpose();
            for (int c = 0; c < k; ++c) {
                terms[static_cast<std::size_t>(c)] =
                    std::log(weights[c]) + current.component_log_density(static_cast<std::size_t>(c), x);
            }
            row_ll[i] = log_sum_exp(terms);
            for (int c = 0; c < k; ++c) {
                log_resp(i, c) = terms[static_cast<std::size_t>(c)] - row_ll[i];
            }
            total += row_ll[i];
        }
        if (!std::isfinite(total)) {
            throw NumericError(kModule, "EM log-likelihood became non-finite");
        }
        local.log_likelihood.push_back(total);
        if (iter > 0 && total - previous < settings.tolerance * std::abs(previous)) {
            local.converged = true;
            break;
        }
        if (iter == settings.max_iterations) {
            break;
        }
        previous = total;
        local.iterations = iter + 1;

        // M-step
        const Eigen::MatrixXd resp = log_resp.array().exp();
        const Eigen::VectorXd nk = resp.colwise().sum().transpose();
        std::vector<Eigen::Index> reseeded;
        for (int c = 0; c < k; ++c) {
            if (nk[c] < 1e-10 * static_cast<double>(n)) {
                // Empty component: restart it at the worst-explained point.
                Eigen::Index worst = -1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (std::find(reseeded.begin(), reseeded.end(), i) != reseeded.end()) {
                        continue;
                    }
                    if (worst < 0 || row_ll[i] < row_ll[worst]) {
                        worst = i;
                    }
                }
                reseeded.push_back(worst);
                means[static_cast<std::size_t>(c)] = data.row(worst).transpose();
                covs[static_cast<std::size_t>(c)] = pooled;
                weights[c] = 1.0 / static_cast<double>(n);
                ++local.reseeds;
                continue;
            }
            const Eigen::VectorXd r = resp.col(c);
            const Eigen::VectorXd mu = (data.transpose() * r) / nk[c];
            const Eigen::MatrixXd centered = data.rowwise() - mu.transpose();
            Eigen::MatrixXd cov = (centered.transpose() * (centered.array().colwise() * r.array()).matrix()) / nk[c];
            cov = 0.5 * (cov + cov.transpose()) + reg * identity;
            means[static_cast<std::size_t>(c)] = mu;
            covs[static_cast<std::size_t>(c)] = std::move(cov);
            weights[c] = nk[c] / static_cast<double>(n);
        }
        weights /= weights.sum();
    }

    if (trace != nullptr) {
        *trace = std::move(local);
    }
    return Gmm(std::move(weights), std::move(means), std::move(covs));
}

int select_components(const Eigen::MatrixXd& data, const KneeSettings& knee, std::uint64_t seed,
                      const EmSettings& settings, std::vector<double>* holdout_curve)
{
    if (knee.k_max < 1) {
        throw ParameterError(kModule, "k_max must be at least 1");
    }
    if (!(knee.holdout_fraction > 0.0) || !(knee.holdout_fraction < 1.0)) {
        throw ParameterError(kModule, "holdout fraction must lie in (0, 1)");
    }
    if (holdout_curve != nullptr) {
        holdout_curve->clear();
    }
    if (knee.k_max == 1) {
        return 1;
    }
    const Eigen::Index n = data.rows();
    const auto n_hold = static_cast<Eigen::Index>(std::floor(knee.holdout_fraction * static_cast<double>(n)));
    const Eigen::Index n_train = n - n_hold;
    if (n_hold < 1 || n_train < knee.k_max) {
        throw ParameterError(kModule, "insufficient data for component selection: " + std::to_string(n) +
                                          " points, k_max=" + std::to_string(knee.k_max));
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::MatrixXd train(n_train, data.cols());
    Eigen::MatrixXd hold(n_hold, data.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = order[static_cast<std::size_t>(i)];
        if (i < n_train) {
            train.row(i) = data.row(src);
        } else {
            hold.row(i - n_train) = data.row(src);
        }
    }

    std::vector<double> curve;
    for (int k = 1; k <= knee.k_max; ++k) {
        const Gmm g = em_fit(train, k, mix_seed(seed, static_cast<std::uint64_t>(k)), settings);
        curve.push_back(g.mean_log_likelihood(hold));
    }
    if (holdout_curve != nullptr) {
        *holdout_curve = curve;
    }
    for (int k = 1; k < knee.k_max; ++k) {
        const double base = curve[static_cast<std::size_t>(k - 1)];
        const double gain = (curve[static_cast<std::size_t>(k)] - base) / std::max(std::abs(base), 1.0);
        if (gain < knee.tau) {
            return k;
        }
    }
    return knee.k_max;
}

}  // namespace tactile
