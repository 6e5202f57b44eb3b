#include "testscape/pilot.hpp"

#include "testscape/errors.hpp"
#include "testscape/parallel.hpp"
#include "testscape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace testscape::pilot {

StandardizedData standardize(const FeatureMatrix& features, const OutcomeVector& outcomes) {
    features.validate();
    if (features.n_instances() != outcomes.size())
        throw ArgumentError("features and outcomes must align");
    const Eigen::Index n = Eigen::Index(features.n_features());
    const Eigen::Index i = Eigen::Index(features.n_instances());

    StandardizedData out;
    out.features = features.values;
    out.record.feature_mean.resize(std::size_t(n));
    out.record.feature_std.resize(std::size_t(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const double mean = out.features.row(r).mean();
        out.features.row(r).array() -= mean;
        const double sd = std::sqrt(out.features.row(r).squaredNorm() / double(i));
        if (sd == 0.0) throw DataError("zero variance feature " + features.names[std::size_t(r)]);
        out.features.row(r) /= sd;
        out.record.feature_mean[std::size_t(r)] = mean;
        out.record.feature_std[std::size_t(r)] = sd;
    }

    out.outcomes = outcomes.values;
    const double y_mean = out.outcomes.mean();
    out.outcomes.array() -= y_mean;
    const double y_sd = std::sqrt(out.outcomes.squaredNorm() / double(i));
    if (y_sd == 0.0) throw DataError("outcomes contain a single class");
    out.outcomes /= y_sd;
    out.record.outcome_mean = y_mean;
    out.record.outcome_std = y_sd;
    return out;
}

Eigen::MatrixXd unstandardize_features(const Standardization& record, const Eigen::MatrixXd& standardized) {
    Eigen::MatrixXd out = standardized;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        out.row(r) *= record.feature_std[std::size_t(r)];
        out.row(r).array() += record.feature_mean[std::size_t(r)];
    }
    return out;
}

ObjectiveEval pilot_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::Vector2d& C, const Eigen::MatrixXd& F,
                              const Eigen::VectorXd& y) {
    const Eigen::Index n = F.rows();
    if (A.rows() != 2 || A.cols() != n || B.rows() != n || B.cols() != 2 || y.size() != F.cols())
        throw ArgumentError("pilot_objective shape mismatch");

    const Eigen::MatrixXd Z = A * F;                               // 2 x i
    const Eigen::MatrixXd R1 = F - B * Z;                          // n x i
    const Eigen::RowVectorXd r2 = y.transpose() - C.transpose() * Z; // 1 x i

    ObjectiveEval eval;
    eval.value = R1.squaredNorm() + r2.squaredNorm();
    eval.grad_B = -2.0 * R1 * Z.transpose();
    eval.grad_C = -2.0 * Z * r2.transpose();
    eval.grad_A = -2.0 * (B.transpose() * R1 + C * r2) * F.transpose();
    return eval;
}

namespace {

struct PackedProblem {
    const Eigen::MatrixXd& F;
    const Eigen::VectorXd& y;
    Eigen::Index n;

    Eigen::Index dim() const { return 4 * n + 2; }

    void unpack(const Eigen::VectorXd& theta, Eigen::MatrixXd& A, Eigen::MatrixXd& B,
                Eigen::Vector2d& C) const {
        A = Eigen::Map<const Eigen::MatrixXd>(theta.data(), 2, n);
        B = Eigen::Map<const Eigen::MatrixXd>(theta.data() + 2 * n, n, 2);
        C = theta.segment(4 * n, 2);
    }

    double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
        Eigen::MatrixXd A, B;
        Eigen::Vector2d C;
        unpack(theta, A, B, C);
        const ObjectiveEval e = pilot_objective(A, B, C, F, y);
        if (grad) {
            grad->resize(dim());
            Eigen::Map<Eigen::MatrixXd>(grad->data(), 2, n) = e.grad_A;
            Eigen::Map<Eigen::MatrixXd>(grad->data() + 2 * n, n, 2) = e.grad_B;
            grad->segment(4 * n, 2) = e.grad_C;
        }
        return e.value;
    }
};

struct RestartResult {
    bool finite = false;
    double objective = std::numeric_limits<double>::infinity();
    Eigen::VectorXd theta;
    std::vector<double> trace;
};

// L-BFGS (history 10) with Armijo backtracking. The trace records the
// objective after each accepted step.
RestartResult minimize(const PackedProblem& problem, Eigen::VectorXd theta, int max_iters,
                       double grad_tol) {
    constexpr int kHistory = 10;
    constexpr double kArmijo = 1e-4;

    RestartResult result;
    Eigen::VectorXd grad;
    double f = problem.eval(theta, &grad);
    if (!std::isfinite(f)) return result;
    result.trace.push_back(f);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < max_iters; ++iter) {
        if (grad.norm() < grad_tol) break;

        // Two-loop recursion for the search direction.
        Eigen::VectorXd q = grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t h = s_hist.size(); h-- > 0;) {
            alpha[h] = rho_hist[h] * s_hist[h].dot(q);
            q -= alpha[h] * y_hist[h];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t h = 0; h < s_hist.size(); ++h) {
            const double beta = rho_hist[h] * y_hist[h].dot(q);
            q += (alpha[h] - beta) * s_hist[h];
        }
        Eigen::VectorXd direction = -q;

        double slope = grad.dot(direction);
        if (!(slope < 0.0)) {
            direction = -grad;
            slope = grad.dot(direction);
            if (!(slope < 0.0)) break;
        }

        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd theta_new;
        double f_new = f;
        for (int ls = 0; ls < 60; ++ls) {
            theta_new = theta + step * direction;
            f_new = problem.eval(theta_new, nullptr);
            if (std::isfinite(f_new) && f_new <= f + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd grad_new;
        problem.eval(theta_new, &grad_new);
        Eigen::VectorXd s = theta_new - theta;
        Eigen::VectorXd y = grad_new - grad;
        const double ys = y.dot(s);
        if (ys > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / ys);
            if (int(s_hist.size()) > kHistory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        theta = std::move(theta_new);
        grad = std::move(grad_new);
        f = f_new;
        result.trace.push_back(f);
    }

    if (std::isfinite(f)) {
        result.finite = true;
        result.objective = f;
        result.theta = std::move(theta);
    }
    return result;
}

} // namespace

ProjectionModel fit_pilot(const Eigen::MatrixXd& F_std, const Eigen::VectorXd& y_std,
                          std::uint64_t seed, const FitOptions& options) {
    const Eigen::Index n = F_std.rows();
    const Eigen::Index i = F_std.cols();
    if (n < 2) throw ArgumentError("pilot needs at least 2 features");
    if (i < 10) throw ArgumentError("pilot needs at least 10 instances");
    if (y_std.size() != i) throw ArgumentError("outcome length mismatch");
    if (options.restarts < 1) throw ArgumentError("restarts must be positive");

    const PackedProblem problem{F_std, y_std, n};
    const double init_sd = 1.0 / std::sqrt(double(n));

    std::vector<RestartResult> results(std::size_t(options.restarts));
    parallel_for(std::size_t(options.restarts), [&](std::size_t r) {
        Rng rng(mix_seed(seed, r));
        Eigen::VectorXd theta(problem.dim());
        for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = rng.normal() * init_sd;
        results[r] = minimize(problem, std::move(theta), options.max_iters, options.grad_tol);
    });

    std::size_t best = results.size();
    for (std::size_t r = 0; r < results.size(); ++r) {
        if (!results[r].finite) continue;
        if (best == results.size() || results[r].objective < results[best].objective) best = r;
    }
    if (best == results.size()) throw ConvergenceError("pilot failed to converge");

    ProjectionModel model;
    problem.unpack(results[best].theta, model.A, model.B, model.C);
    model.Z = model.A * F_std;
    model.objective = results[best].objective;
    model.objective_trace = std::move(results[best].trace);
    return model;
}

ProjectionModel fit_pilot(const FeatureMatrix& features, const OutcomeVector& outcomes,
                          std::uint64_t seed, const FitOptions& options) {
    const StandardizedData data = standardize(features, outcomes);
    ProjectionModel model = fit_pilot(data.features, data.outcomes, seed, options);
    model.feature_names = features.names;
    model.standardization = data.record;
    return model;
}

InstanceSpace build_instance_space(const ProjectionModel& model, const FeatureMatrix& features,
                                   const OutcomeVector& outcomes) {
    if (features.names != model.feature_names)
        throw ArgumentError("features do not match the fitted projection");
    if (Eigen::Index(features.n_instances()) != model.Z.cols())
        throw ArgumentError("instance count does not match the fitted projection");
    if (features.n_instances() != outcomes.size())
        throw ArgumentError("features and outcomes must align");

    InstanceSpace space;
    space.instance_ids = features.instance_ids;
    space.feature_names = features.names;
    space.coordinates.resize(features.n_instances());
    space.labels.resize(features.n_instances());
    for (std::size_t c = 0; c < features.n_instances(); ++c) {
        space.coordinates[c] = {model.Z(0, Eigen::Index(c)), model.Z(1, Eigen::Index(c))};
        space.labels[c] = outcomes.values(Eigen::Index(c)) > 0.5 ? Outcome::Effective
                                                                 : Outcome::Ineffective;
    }

    space.normalized_features = features.values;
    for (Eigen::Index r = 0; r < space.normalized_features.rows(); ++r) {
        const double lo = space.normalized_features.row(r).minCoeff();
        const double hi = space.normalized_features.row(r).maxCoeff();
        if (hi > lo)
            space.normalized_features.row(r) =
                (space.normalized_features.row(r).array() - lo) / (hi - lo);
        else
            space.normalized_features.row(r).setConstant(0.5);
    }
    return space;
}

namespace {

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_rows(const nlohmann::json& rows) {
    const Eigen::Index r = Eigen::Index(rows.size());
    const Eigen::Index c = r == 0 ? 0 : Eigen::Index(rows[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[std::size_t(i)][std::size_t(j)].get<double>();
    return m;
}

} // namespace

nlohmann::json projection_to_json(const ProjectionModel& model) {
    nlohmann::json j;
    j["format"] = "testscape-projection";
    j["version"] = 1;
    j["feature_names"] = model.feature_names;
    j["A"] = matrix_rows(model.A);
    j["B"] = matrix_rows(model.B);
    j["C"] = {model.C(0), model.C(1)};
    j["objective"] = model.objective;
    j["standardization"] = {{"feature_mean", model.standardization.feature_mean},
                            {"feature_std", model.standardization.feature_std},
                            {"outcome_mean", model.standardization.outcome_mean},
                            {"outcome_std", model.standardization.outcome_std}};
    return j;
}

ProjectionModel projection_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "testscape-projection")
        throw DataError("not a testscape projection file");
    ProjectionModel model;
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.A = matrix_from_rows(j.at("A"));
    model.B = matrix_from_rows(j.at("B"));
    model.C = Eigen::Vector2d(j.at("C")[0].get<double>(), j.at("C")[1].get<double>());
    model.objective = j.at("objective").get<double>();
    const auto& s = j.at("standardization");
    model.standardization.feature_mean = s.at("feature_mean").get<std::vector<double>>();
    model.standardization.feature_std = s.at("feature_std").get<std::vector<double>>();
    model.standardization.outcome_mean = s.at("outcome_mean").get<double>();
    model.standardization.outcome_std = s.at("outcome_std").get<double>();
    return model;
}

} // namespace testscape::pilot
