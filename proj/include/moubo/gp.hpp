#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "moubo/types.hpp"

namespace moubo {

struct DesignOfExperiments {
    std::vector<JointPoint> inputs;
    std::vector<ObjectiveVector> outputs;

    std::size_t size() const { return inputs.size(); }
    std::size_t n_objectives() const { return outputs.empty() ? 0 : outputs.front().size(); }
    std::size_t input_dim() const {
        return inputs.empty() ? 0 : inputs.front().x.size() + inputs.front().u.size();
    }

    void add(JointPoint p, ObjectiveVector y) {
        require_finite(y, "doe output");
        inputs.push_back(std::move(p));
        outputs.push_back(std::move(y));
    }
    void validate() const;
};

// Matern 5/2 correlation scaled by a signal variance.
double matern52(double r, double lengthscale, double signal_variance);

struct FitConfig {
    Box input_box;              // joint box; empty -> inferred from the data
    int restarts = 8;
    std::uint64_t seed = 0;
    double jitter = 1e-8;       // escalated x10 up to 1e-2 on factorization failure
    int max_iters = 80;
    double lengthscale_lo = 1e-2, lengthscale_hi = 1e2;   // normalized input units
    double signal_lo = 1e-3, signal_hi = 1e3;             // standardized output units
    // One start per objective taken from a previous fit; counts toward restarts.
    std::vector<std::vector<double>> warm_start_log_params;
    // Skip the marginal-likelihood search entirely and use these parameters.
    std::vector<std::vector<double>> fixed_log_params;
};

// Per-objective hyperparameters in log space: [log l_1 .. log l_m, log s2_f].
struct ObjectiveModel {
    std::vector<double> log_params;
    double jitter = 0.0;
    double log_marginal = 0.0;
};

// Independent per-objective zero-mean GP on the joint space, Matern 5/2 ARD
// kernel, inputs normalized to the unit cube and outputs standardized per
// objective. Immutable once fitted; predict is reentrant.
class GpSurrogate {
public:
    GpSurrogate() = default;

    static GpSurrogate fit(const DesignOfExperiments& doe, const FitConfig& config);

    bool fitted() const { return !objectives_.empty(); }
    std::size_t n_objectives() const { return objectives_.size(); }
    std::size_t input_dim() const { return input_box_.dim(); }
    std::size_t n_training() const { return static_cast<std::size_t>(train_inputs_.rows()); }
    const Box& input_box() const { return input_box_; }
    const std::vector<ObjectiveModel>& objectives() const { return objectives_; }

    // Posterior mean and standard deviation per objective, in original output
    // units; variances are clamped at zero from below.
    void predict(const std::vector<Point>& joint_points, std::vector<ObjectiveVector>& means,
                 std::vector<ObjectiveVector>& stddevs) const;

    std::vector<ObjectiveVector> predict_mean(const std::vector<Point>& joint_points) const;

    void predict_one(const Point& joint_point, ObjectiveVector& mean, ObjectiveVector& stddev) const;

    nlohmann::json to_json() const;
    static GpSurrogate from_json(const nlohmann::json& j);

private:
    void factorize(double requested_jitter);
    Eigen::MatrixXd normalize(const std::vector<Point>& pts) const;

    Box input_box_;
    Eigen::MatrixXd train_inputs_;   // n x m, normalized
    Eigen::MatrixXd train_outputs_;  // n x d, standardized
    std::vector<double> out_mean_, out_std_;
    std::vector<ObjectiveModel> objectives_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> chol_;
    std::vector<Eigen::VectorXd> alpha_;
};

// Log marginal likelihood of a zero-mean GP and its gradient with respect to
// the log-space parameters, on normalized inputs Z (n x m) and standardized
// targets y. Exposed for the fitting path and its finite-difference checks.
struct LmlResult {
    double value = 0.0;
    std::vector<double> grad;
    bool ok = false;  // false when the factorization failed at this jitter
};
LmlResult log_marginal_likelihood(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                  const std::vector<double>& log_params, double jitter,
                                  bool with_grad = true);

}  // namespace moubo
