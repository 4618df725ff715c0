#include "moubo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "moubo/rng.hpp"

namespace moubo {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;

// Pairwise ARD-scaled distance matrix r_ij = ||(z_i - z_j) / l||, assembled
// from squared norms and one matrix product.
Eigen::MatrixXd ard_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const std::vector<double>& log_params) {
    const Eigen::Index m = A.cols();
    Eigen::MatrixXd As = A, Bs = B;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double inv_l = std::exp(-log_params[static_cast<std::size_t>(k)]);
        As.col(k) *= inv_l;
        Bs.col(k) *= inv_l;
    }
    Eigen::MatrixXd r2 = -2.0 * As * Bs.transpose();
    r2.colwise() += As.rowwise().squaredNorm();
    r2.rowwise() += Bs.rowwise().squaredNorm().transpose();
    return r2.cwiseMax(0.0).cwiseSqrt();
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& r, double signal_variance) {
    return (signal_variance * (1.0 + kSqrt5 * r.array() + (5.0 / 3.0) * r.array().square()) *
            (-kSqrt5 * r.array()).exp())
        .matrix();
}

std::vector<double> clamp_params(std::vector<double> lp, const FitConfig& cfg, std::size_t m) {
    for (std::size_t k = 0; k < m; ++k)
        lp[k] = std::clamp(lp[k], std::log(cfg.lengthscale_lo), std::log(cfg.lengthscale_hi));
    lp[m] = std::clamp(lp[m], std::log(cfg.signal_lo), std::log(cfg.signal_hi));
    return lp;
}

}  // namespace

void DesignOfExperiments::validate() const {
    if (inputs.size() != outputs.size()) throw std::invalid_argument("doe: inputs/outputs length mismatch");
    if (size() < 2) throw std::invalid_argument("doe: need at least 2 points to fit");
    const std::size_t m = input_dim();
    const std::size_t d = n_objectives();
    for (std::size_t i = 0; i < size(); ++i) {
        const Point z = inputs[i].flat();
        require_same_dim(z.size(), m, "doe input");
        require_same_dim(outputs[i].size(), d, "doe output");
        require_finite(z, "doe input");
        require_finite(outputs[i], "doe output");
    }
}

double matern52(double r, double lengthscale, double signal_variance) {
    if (!(lengthscale > 0.0)) throw std::invalid_argument("matern52: lengthscale must be > 0");
    if (!(signal_variance > 0.0)) throw std::invalid_argument("matern52: signal variance must be > 0");
    if (r < 0.0) throw std::invalid_argument("matern52: r must be >= 0");
    const double s = kSqrt5 * r / lengthscale;
    return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

LmlResult log_marginal_likelihood(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                  const std::vector<double>& log_params, double jitter,
                                  bool with_grad) {
    const Eigen::Index n = Z.rows();
    const std::size_t m = static_cast<std::size_t>(Z.cols());
    LmlResult res;

    const Eigen::MatrixXd r = ard_distances(Z, Z, log_params);
    const double s2f = std::exp(log_params[m]);
    Eigen::MatrixXd K = kernel_matrix(r, s2f);
    K.diagonal().array() += jitter;

    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) return res;

    const Eigen::VectorXd alpha = llt.solve(y);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt.matrixLLT()(i, i));
    constexpr double kLog2Pi = 1.83787706640934548356;
    res.value = -0.5 * y.dot(alpha) - log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
    res.ok = true;
    if (!with_grad) return res;

    // dLML/dtheta = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta)
    Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;

    res.grad.assign(m + 1, 0.0);
    const Eigen::ArrayXXd expTerm = (-kSqrt5 * r.array()).exp();
    // dK/d(log l_k) = s2f * (5/3)(1 + sqrt5 r) exp(-sqrt5 r) * (d_k / l_k)^2
    const Eigen::ArrayXXd common = s2f * (5.0 / 3.0) * (1.0 + kSqrt5 * r.array()) * expTerm;
    for (std::size_t k = 0; k < m; ++k) {
        const double inv_l = std::exp(-log_params[k]);
        const Eigen::VectorXd c = Z.col(static_cast<Eigen::Index>(k)) * inv_l;
        const Eigen::VectorXd c2 = c.array().square();
        Eigen::MatrixXd d2 = -2.0 * c * c.transpose();
        d2.colwise() += c2;
        d2.rowwise() += c2.transpose();
        res.grad[k] = 0.5 * (W.array() * common * d2.array().max(0.0)).sum();
    }
    // dK/d(log s2f) equals the kernel matrix without jitter
    Eigen::MatrixXd Ksig = K;
    Ksig.diagonal().array() -= jitter;
    res.grad[m] = 0.5 * (W.array() * Ksig.array()).sum();
    return res;
}

namespace {

struct Objective1d {
    const Eigen::MatrixXd& Z;
    const Eigen::VectorXd& y;
    const FitConfig& cfg;
    double jitter;

    LmlResult eval(const std::vector<double>& lp, bool grad) const {
        return log_marginal_likelihood(Z, y, lp, jitter, grad);
    }
};

// Projected gradient ascent with backtracking; adequate for the smooth,
// low-dimensional bounded searches done here.
std::pair<std::vector<double>, double> ascend(const Objective1d& f, std::vector<double> lp,
                                              int max_iters) {
    const std::size_t m = lp.size() - 1;
    lp = clamp_params(std::move(lp), f.cfg, m);
    LmlResult cur = f.eval(lp, true);
    if (!cur.ok) return {lp, -std::numeric_limits<double>::infinity()};

    double step = 0.1;
    for (int it = 0; it < max_iters; ++it) {
        double gnorm = 0.0;
        for (double g : cur.grad) gnorm += g * g;
        gnorm = std::sqrt(gnorm);
        if (gnorm < 1e-8) break;

        bool improved = false;
        for (int half = 0; half < 20; ++half) {
            std::vector<double> trial(lp.size());
            for (std::size_t k = 0; k < lp.size(); ++k) trial[k] = lp[k] + step * cur.grad[k] / gnorm;
            trial = clamp_params(std::move(trial), f.cfg, m);
            LmlResult t = f.eval(trial, true);
            if (t.ok && t.value > cur.value) {
                lp = std::move(trial);
                cur = std::move(t);
                step = std::min(step * 2.0, 2.0);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    return {lp, cur.value};
}

}  // namespace

GpSurrogate GpSurrogate::fit(const DesignOfExperiments& doe, const FitConfig& config) {
    doe.validate();
    const std::size_t n = doe.size();
    const std::size_t m = doe.input_dim();
    const std::size_t d = doe.n_objectives();

    GpSurrogate gp;
    gp.input_box_ = config.input_box;
    if (gp.input_box_.empty()) {
        Point z0 = doe.inputs.front().flat();
        gp.input_box_ = Box(z0, z0);
        for (const auto& jp : doe.inputs) {
            const Point z = jp.flat();
            for (std::size_t k = 0; k < m; ++k) {
                gp.input_box_.lo[k] = std::min(gp.input_box_.lo[k], z[k]);
                gp.input_box_.hi[k] = std::max(gp.input_box_.hi[k], z[k]);
            }
        }
    }
    require_same_dim(gp.input_box_.dim(), m, "fit input box");

    std::vector<Point> flat(n);
    for (std::size_t i = 0; i < n; ++i) flat[i] = doe.inputs[i].flat();
    gp.train_inputs_ = gp.normalize(flat);

    gp.out_mean_.assign(d, 0.0);
    gp.out_std_.assign(d, 1.0);
    gp.train_outputs_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += doe.outputs[i][k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = doe.outputs[i][k] - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        gp.out_mean_[k] = mean;
        gp.out_std_[k] = var > 0.0 ? std::sqrt(var) : 1.0;
        for (std::size_t i = 0; i < n; ++i)
            gp.train_outputs_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                (doe.outputs[i][k] - mean) / gp.out_std_[k];
    }

    gp.objectives_.resize(d);
    Rng rng(config.seed);

    for (std::size_t k = 0; k < d; ++k) {
        ObjectiveModel& om = gp.objectives_[k];
        const Eigen::VectorXd y = gp.train_outputs_.col(static_cast<Eigen::Index>(k));

        const bool degenerate = y.maxCoeff() == y.minCoeff();
        if (!config.fixed_log_params.empty()) {
            om.log_params = clamp_params(config.fixed_log_params.at(k), config, m);
        } else if (degenerate) {
            // constant outputs: no signal to fit, fall back to the variance floor
            om.log_params.assign(m + 1, std::log(0.5));
            om.log_params[m] = std::log(config.signal_lo);
        } else {
            std::vector<std::vector<double>> starts;
            if (config.warm_start_log_params.size() == d)
                starts.push_back(config.warm_start_log_params[k]);
            std::vector<double> canonical(m + 1, std::log(0.5));
            canonical[m] = 0.0;
            starts.push_back(std::move(canonical));
            while (static_cast<int>(starts.size()) < std::max(config.restarts, 1)) {
                std::vector<double> s(m + 1);
                for (std::size_t j = 0; j < m; ++j) s[j] = rng.uniform(std::log(0.05), std::log(10.0));
                s[m] = rng.uniform(std::log(0.1), std::log(10.0));
                starts.push_back(std::move(s));
            }

            double best = -std::numeric_limits<double>::infinity();
            std::vector<double> best_lp;
            for (auto& s0 : starts) {
                Objective1d obj{gp.train_inputs_, y, config, config.jitter};
                auto [lp, value] = ascend(obj, clamp_params(std::move(s0), config, m), config.max_iters);
                if (value > best) {
                    best = value;
                    best_lp = lp;
                }
            }
            if (best_lp.empty()) {
                best_lp.assign(m + 1, std::log(0.5));
                best_lp[m] = 0.0;
            }
            om.log_params = best_lp;
            om.log_marginal = best;
        }
    }

    gp.factorize(config.jitter);
    return gp;
}

void GpSurrogate::factorize(double requested_jitter) {
    constexpr double kJitterCap = 1e-2;
    chol_.clear();
    alpha_.clear();
    for (std::size_t k = 0; k < objectives_.size(); ++k) {
        ObjectiveModel& om = objectives_[k];
        const std::size_t m = static_cast<std::size_t>(train_inputs_.cols());
        const Eigen::MatrixXd r = ard_distances(train_inputs_, train_inputs_, om.log_params);
        const Eigen::MatrixXd Ksig = kernel_matrix(r, std::exp(om.log_params[m]));

        double jitter = std::max(requested_jitter, om.jitter);
        Eigen::LLT<Eigen::MatrixXd> llt;
        bool ok = false;
        for (; jitter <= kJitterCap * 1.0000001; jitter *= 10.0) {
            Eigen::MatrixXd K = Ksig;
            K.diagonal().array() += jitter;
            llt.compute(K);
            if (llt.info() == Eigen::Success) {
                ok = true;
                break;
            }
        }
        if (!ok)
            throw std::runtime_error("gp: kernel matrix not positive definite even at jitter 1e-2; "
                                     "training data is too degenerate to condition on");
        om.jitter = jitter;
        chol_.push_back(llt);
        alpha_.push_back(llt.solve(train_outputs_.col(static_cast<Eigen::Index>(k))));
    }
}

Eigen::MatrixXd GpSurrogate::normalize(const std::vector<Point>& pts) const {
    const std::size_t m = input_box_.dim();
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        require_same_dim(pts[i].size(), m, "predict input");
        for (std::size_t k = 0; k < m; ++k) {
            const double span = input_box_.hi[k] - input_box_.lo[k];
            Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                span > 0 ? (pts[i][k] - input_box_.lo[k]) / span : 0.0;
        }
    }
    return Z;
}

void GpSurrogate::predict(const std::vector<Point>& joint_points, std::vector<ObjectiveVector>& means,
                          std::vector<ObjectiveVector>& stddevs) const {
    if (!fitted()) throw std::logic_error("gp: predict on unfitted model");
    const std::size_t q = joint_points.size();
    const std::size_t d = objectives_.size();
    const std::size_t m = static_cast<std::size_t>(train_inputs_.cols());
    means.assign(q, ObjectiveVector(d));
    stddevs.assign(q, ObjectiveVector(d));
    if (q == 0) return;

    const Eigen::MatrixXd Zq = normalize(joint_points);
    for (std::size_t k = 0; k < d; ++k) {
        const ObjectiveModel& om = objectives_[k];
        const double s2f = std::exp(om.log_params[m]);
        const Eigen::MatrixXd r = ard_distances(train_inputs_, Zq, om.log_params);
        const Eigen::MatrixXd Ks = kernel_matrix(r, s2f);  // n x q

        const Eigen::VectorXd mu = Ks.transpose() * alpha_[k];
        const Eigen::MatrixXd V = chol_[k].matrixL().solve(Ks);  // n x q
        for (std::size_t i = 0; i < q; ++i) {
            const double var =
                std::max(0.0, s2f - V.col(static_cast<Eigen::Index>(i)).squaredNorm());
            means[i][k] = mu(static_cast<Eigen::Index>(i)) * out_std_[k] + out_mean_[k];
            stddevs[i][k] = std::sqrt(var) * out_std_[k];
        }
    }
}

std::vector<ObjectiveVector> GpSurrogate::predict_mean(const std::vector<Point>& joint_points) const {
    if (!fitted()) throw std::logic_error("gp: predict on unfitted model");
    const std::size_t q = joint_points.size();
    const std::size_t d = objectives_.size();
    std::vector<ObjectiveVector> means(q, ObjectiveVector(d));
    if (q == 0) return means;
    const Eigen::MatrixXd Zq = normalize(joint_points);
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t m = static_cast<std::size_t>(train_inputs_.cols());
        const ObjectiveModel& om = objectives_[k];
        const Eigen::MatrixXd r = ard_distances(train_inputs_, Zq, om.log_params);
        const Eigen::MatrixXd Ks = kernel_matrix(r, std::exp(om.log_params[m]));
        const Eigen::VectorXd mu = Ks.transpose() * alpha_[k];
        for (std::size_t i = 0; i < q; ++i)
            means[i][k] = mu(static_cast<Eigen::Index>(i)) * out_std_[k] + out_mean_[k];
    }
    return means;
}

void GpSurrogate::predict_one(const Point& joint_point, ObjectiveVector& mean,
                              ObjectiveVector& stddev) const {
    std::vector<ObjectiveVector> means, stddevs;
    predict({joint_point}, means, stddevs);
    mean = std::move(means.front());
    stddev = std::move(stddevs.front());
}

nlohmann::json GpSurrogate::to_json() const {
    if (!fitted()) throw std::logic_error("gp: cannot serialize unfitted model");
    nlohmann::json j;
    j["input_box"] = {{"lo", input_box_.lo}, {"hi", input_box_.hi}};
    j["output_mean"] = out_mean_;
    j["output_std"] = out_std_;
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& om : objectives_) {
        objs.push_back({{"log_params", om.log_params},
                        {"jitter", om.jitter},
                        {"log_marginal", om.log_marginal}});
    }
    j["objectives"] = objs;
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json outs = nlohmann::json::array();
    const Eigen::Index n = train_inputs_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> zi(static_cast<std::size_t>(train_inputs_.cols()));
        for (Eigen::Index k = 0; k < train_inputs_.cols(); ++k) zi[static_cast<std::size_t>(k)] = train_inputs_(i, k);
        rows.push_back(zi);
        std::vector<double> yi(objectives_.size());
        for (std::size_t k = 0; k < objectives_.size(); ++k) yi[k] = train_outputs_(i, static_cast<Eigen::Index>(k));
        outs.push_back(yi);
    }
    j["train_inputs_normalized"] = rows;
    j["train_outputs_standardized"] = outs;
    return j;
}

GpSurrogate GpSurrogate::from_json(const nlohmann::json& j) {
    GpSurrogate gp;
    gp.input_box_ = Box(j.at("input_box").at("lo").get<std::vector<double>>(),
                        j.at("input_box").at("hi").get<std::vector<double>>());
    gp.out_mean_ = j.at("output_mean").get<std::vector<double>>();
    gp.out_std_ = j.at("output_std").get<std::vector<double>>();
    const auto rows = j.at("train_inputs_normalized").get<std::vector<std::vector<double>>>();
    const auto outs = j.at("train_outputs_standardized").get<std::vector<std::vector<double>>>();
    const std::size_t n = rows.size();
    const std::size_t m = gp.input_box_.dim();
    const std::size_t d = gp.out_mean_.size();
    gp.train_inputs_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    gp.train_outputs_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k)
            gp.train_inputs_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        for (std::size_t k = 0; k < d; ++k)
            gp.train_outputs_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = outs[i][k];
    }
    for (const auto& oj : j.at("objectives")) {
        ObjectiveModel om;
        om.log_params = oj.at("log_params").get<std::vector<double>>();
        om.jitter = oj.at("jitter").get<double>();
        om.log_marginal = oj.value("log_marginal", 0.0);
        gp.objectives_.push_back(std::move(om));
    }
    gp.factorize(gp.objectives_.empty() ? 1e-8 : gp.objectives_.front().jitter);
    return gp;
}

}  // namespace moubo
