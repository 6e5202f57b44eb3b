#include "testscape/learners.hpp"

#include "testscape/csv.hpp"
#include "testscape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace testscape::learn {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::RandomForest: return "rf";
        case ModelKind::DecisionTree: return "dt";
        case ModelKind::KNearest: return "knn";
        case ModelKind::MultilayerPerceptron: return "mlp";
        case ModelKind::NaiveBayes: return "nb";
    }
    throw ArgumentError("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "rf") return ModelKind::RandomForest;
    if (s == "dt") return ModelKind::DecisionTree;
    if (s == "knn") return ModelKind::KNearest;
    if (s == "mlp") return ModelKind::MultilayerPerceptron;
    if (s == "nb") return ModelKind::NaiveBayes;
    throw ArgumentError("unknown model kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Decision tree

int DecisionTreeModel::predict_one(const Eigen::RowVectorXd& x) const {
    return nodes[std::size_t(leaf_of(x))].label;
}

int DecisionTreeModel::leaf_of(const Eigen::RowVectorXd& x) const {
    int at = 0;
    while (nodes[std::size_t(at)].feature >= 0) {
        const auto& n = nodes[std::size_t(at)];
        at = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return at;
}

int DecisionTreeModel::depth() const {
    // Iterative depth over the node array.
    std::vector<std::pair<int, int>> stack = {{0, 0}};
    int deepest = 0;
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const auto& n = nodes[std::size_t(at)];
        if (n.feature >= 0) {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return deepest;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Labels& y;
    TreeOptions opt;
    Rng* rng;
    std::vector<DecisionTreeModel::Node> nodes;

    int majority(const std::vector<int>& idx) const {
        std::size_t pos = 0;
        for (int i : idx) pos += y[std::size_t(i)];
        const std::size_t neg = idx.size() - pos;
        return pos > neg ? 1 : 0; // tie -> Ineffective
    }

    int make_leaf(const std::vector<int>& idx) {
        nodes.push_back({-1, 0.0, -1, -1, majority(idx)});
        return int(nodes.size()) - 1;
    }

    struct SplitChoice {
        bool found = false;
        double gini = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };

    SplitChoice best_split(const std::vector<int>& idx, const std::vector<int>& features) const {
        SplitChoice best;
        const double n = double(idx.size());
        std::vector<std::pair<double, std::uint8_t>> vals(idx.size());
        for (int f : features) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                vals[i] = {X(idx[i], f), y[std::size_t(idx[i])]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::size_t pos_left = 0, pos_total = 0;
            for (const auto& [v, label] : vals) pos_total += label;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                pos_left += vals[i].second;
                if (!(vals[i].first < vals[i + 1].first)) continue;
                const double nl = double(i + 1);
                const double nr = n - nl;
                const double pl = double(pos_left) / nl;
                const double pr = double(pos_total - pos_left) / nr;
                const double gini =
                    (nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr)) / n;
                if (!best.found || gini < best.gini) {
                    double thr = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
                    if (!(thr < vals[i + 1].first)) thr = vals[i].first;
                    best = {true, gini, f, thr};
                }
            }
        }
        return best;
    }

    int build(const std::vector<int>& idx, int depth) {
        std::size_t pos = 0;
        for (int i : idx) pos += y[std::size_t(i)];
        const bool pure = pos == 0 || pos == idx.size();
        if (pure || int(idx.size()) < opt.min_split ||
            (opt.max_depth >= 0 && depth >= opt.max_depth))
            return make_leaf(idx);

        std::vector<int> features;
        const int n_features = int(X.cols());
        if (opt.features_per_split > 0 && opt.features_per_split < n_features && rng) {
            for (std::size_t f : rng->sample_indices(std::size_t(n_features),
                                                     std::size_t(opt.features_per_split)))
                features.push_back(int(f));
        } else {
            features.resize(std::size_t(n_features));
            std::iota(features.begin(), features.end(), 0);
        }

        const SplitChoice split = best_split(idx, features);
        if (!split.found) return make_leaf(idx);

        std::vector<int> left, right;
        for (int i : idx)
            (X(i, split.feature) <= split.threshold ? left : right).push_back(i);

        const int at = int(nodes.size());
        nodes.push_back({split.feature, split.threshold, -1, -1, 0});
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        nodes[std::size_t(at)].left = l;
        nodes[std::size_t(at)].right = r;
        return at;
    }
};

DecisionTreeModel fit_tree_on(const Eigen::MatrixXd& X, const Labels& y, const std::vector<int>& idx,
                              const TreeOptions& options, Rng* rng) {
    TreeBuilder builder{X, y, options, rng, {}};
    builder.build(idx, 0);
    DecisionTreeModel model;
    model.nodes = std::move(builder.nodes);
    model.options = options;
    return model;
}

} // namespace

DecisionTreeModel fit_tree(const Eigen::MatrixXd& X, const Labels& y, const TreeOptions& options,
                           Rng* feature_rng) {
    if (std::size_t(X.rows()) != y.size()) throw ArgumentError("X/y size mismatch");
    if (X.rows() == 0) throw DataError("degenerate labels");
    std::vector<int> idx(std::size_t(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    return fit_tree_on(X, y, idx, options, feature_rng);
}

// ---------------------------------------------------------------------------
// Random forest

RandomForestModel fit_forest(const Eigen::MatrixXd& X, const Labels& y, std::uint64_t seed,
                             const ForestOptions& options) {
    if (std::size_t(X.rows()) != y.size()) throw ArgumentError("X/y size mismatch");
    const int n = int(X.rows());
    TreeOptions tree_opt;
    tree_opt.max_depth = options.max_depth;
    tree_opt.features_per_split =
        options.features_per_split >= 0
            ? options.features_per_split
            : std::max(1, int(std::floor(std::sqrt(double(X.cols())))));

    RandomForestModel model;
    model.trees.reserve(std::size_t(options.trees));
    for (int t = 0; t < options.trees; ++t) {
        Rng rng(mix_seed(seed, std::uint64_t(t)));
        std::vector<int> idx(std::size_t(n));
        if (options.bootstrap) {
            for (auto& i : idx) i = int(rng.below(std::uint64_t(n)));
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        model.trees.push_back(fit_tree_on(X, y, idx, tree_opt, &rng));
    }
    return model;
}

Labels forest_predict(const RandomForestModel& model, const Eigen::MatrixXd& X) {
    Labels out(std::size_t(X.rows()), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        int votes = 0;
        for (const auto& tree : model.trees) votes += tree.predict_one(X.row(i));
        // Majority with ties resolved to Ineffective.
        out[std::size_t(i)] = (2 * votes > int(model.trees.size())) ? 1 : 0;
    }
    return out;
}

std::vector<Labels> forest_per_tree_predictions(const RandomForestModel& model, const Eigen::MatrixXd& X) {
    std::vector<Labels> per_tree(model.trees.size(), Labels(std::size_t(X.rows()), 0));
    for (std::size_t t = 0; t < model.trees.size(); ++t)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            per_tree[t][std::size_t(i)] = std::uint8_t(model.trees[t].predict_one(X.row(i)));
    return per_tree;
}

// ---------------------------------------------------------------------------
// Scaler

Scaler Scaler::fit(const Eigen::MatrixXd& X) {
    Scaler s;
    s.mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
    s.std = (centered.array().square().colwise().mean()).sqrt();
    for (Eigen::Index f = 0; f < s.std.size(); ++f)
        if (s.std(f) == 0.0) s.std(f) = 1.0;
    return s;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

// ---------------------------------------------------------------------------
// MLP

namespace {

struct MlpShape {
    int features;
    int hidden;
    std::size_t size() const { return std::size_t(hidden * features + hidden + hidden + 1); }
};

void unpack_theta(const Eigen::VectorXd& theta, const MlpShape& shape, Eigen::MatrixXd& w1,
                  Eigen::VectorXd& b1, Eigen::RowVectorXd& w2, double& b2) {
    std::size_t at = 0;
    w1 = Eigen::Map<const Eigen::MatrixXd>(theta.data() + at, shape.hidden, shape.features);
    at += std::size_t(shape.hidden * shape.features);
    b1 = theta.segment(Eigen::Index(at), shape.hidden);
    at += std::size_t(shape.hidden);
    w2 = theta.segment(Eigen::Index(at), shape.hidden).transpose();
    at += std::size_t(shape.hidden);
    b2 = theta(Eigen::Index(at));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

MlpGradient mlp_loss_and_gradient(const Eigen::VectorXd& theta, int hidden, const Eigen::MatrixXd& X,
                                  const Labels& y) {
    const MlpShape shape{int(X.cols()), hidden};
    if (std::size_t(theta.size()) != shape.size()) throw ArgumentError("theta size mismatch");

    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::RowVectorXd w2;
    double b2 = 0.0;
    unpack_theta(theta, shape, w1, b1, w2, b2);

    const Eigen::Index batch = X.rows();
    Eigen::MatrixXd pre = (w1 * X.transpose()).colwise() + b1; // hidden x batch
    Eigen::MatrixXd act = pre.cwiseMax(0.0);
    Eigen::RowVectorXd z = (w2 * act).array() + b2; // 1 x batch

    double loss = 0.0;
    Eigen::RowVectorXd dz(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
        const double zi = z(i);
        const double yi = double(y[std::size_t(i)]);
        loss += std::max(zi, 0.0) - zi * yi + std::log1p(std::exp(-std::abs(zi)));
        dz(i) = (sigmoid(zi) - yi) / double(batch);
    }
    loss /= double(batch);

    Eigen::RowVectorXd grad_w2 = dz * act.transpose();
    const double grad_b2 = dz.sum();
    Eigen::MatrixXd dact = w2.transpose() * dz; // hidden x batch
    Eigen::MatrixXd dpre = (pre.array() > 0.0).select(dact, 0.0);
    Eigen::MatrixXd grad_w1 = dpre * X;       // hidden x features
    Eigen::VectorXd grad_b1 = dpre.rowwise().sum();

    MlpGradient out;
    out.loss = loss;
    out.grad.resize(theta.size());
    std::size_t at = 0;
    Eigen::Map<Eigen::MatrixXd>(out.grad.data() + at, shape.hidden, shape.features) = grad_w1;
    at += std::size_t(shape.hidden * shape.features);
    out.grad.segment(Eigen::Index(at), shape.hidden) = grad_b1;
    at += std::size_t(shape.hidden);
    out.grad.segment(Eigen::Index(at), shape.hidden) = grad_w2.transpose();
    at += std::size_t(shape.hidden);
    out.grad(Eigen::Index(at)) = grad_b2;
    return out;
}

namespace {

constexpr int kMlpHidden = 64;
constexpr int kMlpEpochs = 500;
constexpr double kMlpLearningRate = 1e-2;

MlpModel fit_mlp(const Eigen::MatrixXd& X_raw, const Labels& y, std::uint64_t seed) {
    MlpModel model;
    model.scaler = Scaler::fit(X_raw);
    const Eigen::MatrixXd X = model.scaler.apply(X_raw);

    const MlpShape shape{int(X.cols()), kMlpHidden};
    Eigen::VectorXd theta(Eigen::Index(shape.size()));
    Rng rng(mix_seed(seed, 0));
    std::size_t at = 0;
    const double w1_scale = 1.0 / std::sqrt(double(std::max(1, shape.features)));
    for (int i = 0; i < shape.hidden * shape.features; ++i)
        theta(Eigen::Index(at++)) = rng.normal() * w1_scale;
    for (int i = 0; i < shape.hidden; ++i) theta(Eigen::Index(at++)) = 0.0;
    const double w2_scale = 1.0 / std::sqrt(double(shape.hidden));
    for (int i = 0; i < shape.hidden; ++i) theta(Eigen::Index(at++)) = rng.normal() * w2_scale;
    theta(Eigen::Index(at)) = 0.0;

    // Full-batch Adam.
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
    for (int epoch = 1; epoch <= kMlpEpochs; ++epoch) {
        const MlpGradient g = mlp_loss_and_gradient(theta, kMlpHidden, X, y);
        m = beta1 * m + (1.0 - beta1) * g.grad;
        v = beta2 * v + (1.0 - beta2) * g.grad.cwiseProduct(g.grad);
        const double bc1 = 1.0 - std::pow(beta1, epoch);
        const double bc2 = 1.0 - std::pow(beta2, epoch);
        theta -= (kMlpLearningRate * (m / bc1).array() / ((v / bc2).array().sqrt() + eps)).matrix();
    }

    unpack_theta(theta, shape, model.w1, model.b1, model.w2, model.b2);
    return model;
}

Labels mlp_predict(const MlpModel& model, const Eigen::MatrixXd& X_raw) {
    const Eigen::MatrixXd X = model.scaler.apply(X_raw);
    Labels out(std::size_t(X.rows()), 0);
    Eigen::MatrixXd act = ((model.w1 * X.transpose()).colwise() + model.b1).cwiseMax(0.0);
    Eigen::RowVectorXd z = (model.w2 * act).array() + model.b2;
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[std::size_t(i)] = z(i) > 0.0 ? 1 : 0;
    return out;
}

// ---------------------------------------------------------------------------
// KNN

KnnModel fit_knn(const Eigen::MatrixXd& X_raw, const Labels& y) {
    KnnModel model;
    model.k = 5;
    model.scaler = Scaler::fit(X_raw);
    model.train = model.scaler.apply(X_raw);
    model.labels = y;
    return model;
}

Labels knn_predict(const KnnModel& model, const Eigen::MatrixXd& X_raw) {
    const Eigen::MatrixXd X = model.scaler.apply(X_raw);
    const std::size_t n_train = std::size_t(model.train.rows());
    const std::size_t k = std::min(std::size_t(model.k), n_train);
    Labels out(std::size_t(X.rows()), 0);
    std::vector<std::pair<double, std::size_t>> dist(n_train);
    for (Eigen::Index q = 0; q < X.rows(); ++q) {
        for (std::size_t t = 0; t < n_train; ++t)
            dist[t] = {(model.train.row(Eigen::Index(t)) - X.row(q)).squaredNorm(), t};
        std::partial_sort(dist.begin(), dist.begin() + std::ptrdiff_t(k), dist.end());
        std::size_t votes = 0;
        for (std::size_t i = 0; i < k; ++i) votes += model.labels[dist[i].second];
        out[std::size_t(q)] = 2 * votes > k ? 1 : 0; // tie -> Ineffective
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

NaiveBayesModel fit_nb(const Eigen::MatrixXd& X, const Labels& y) {
    const Eigen::Index n = X.rows(), f = X.cols();
    NaiveBayesModel model;
    model.mean0 = Eigen::VectorXd::Zero(f);
    model.mean1 = Eigen::VectorXd::Zero(f);
    model.var0 = Eigen::VectorXd::Zero(f);
    model.var1 = Eigen::VectorXd::Zero(f);

    double n1 = 0;
    for (std::uint8_t label : y) n1 += label;
    const double n0 = double(n) - n1;
    model.log_prior0 = std::log(n0 / double(n));
    model.log_prior1 = std::log(n1 / double(n));

    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[std::size_t(i)]) model.mean1 += X.row(i).transpose();
        else model.mean0 += X.row(i).transpose();
    }
    model.mean0 /= n0;
    model.mean1 /= n1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[std::size_t(i)])
            model.var1 += (X.row(i).transpose() - model.mean1).array().square().matrix();
        else
            model.var0 += (X.row(i).transpose() - model.mean0).array().square().matrix();
    }
    model.var0 /= n0;
    model.var1 /= n1;

    // Variance smoothing relative to the largest overall feature variance.
    const Eigen::RowVectorXd overall_mean = X.colwise().mean();
    const Eigen::RowVectorXd overall_var =
        (X.rowwise() - overall_mean).array().square().colwise().mean();
    const double eps = 1e-9 * overall_var.maxCoeff();
    model.var0.array() += eps;
    model.var1.array() += eps;
    return model;
}

} // namespace

Eigen::Vector2d nb_log_posterior(const NaiveBayesModel& model, const Eigen::RowVectorXd& x) {
    auto class_log = [&](double prior, const Eigen::VectorXd& mean, const Eigen::VectorXd& var) {
        double acc = prior;
        for (Eigen::Index f = 0; f < mean.size(); ++f) {
            const double d = x(f) - mean(f);
            acc += -0.5 * std::log(2.0 * std::numbers::pi * var(f)) - d * d / (2.0 * var(f));
        }
        return acc;
    };
    return {class_log(model.log_prior0, model.mean0, model.var0),
            class_log(model.log_prior1, model.mean1, model.var1)};
}

namespace {

Labels nb_predict(const NaiveBayesModel& model, const Eigen::MatrixXd& X) {
    Labels out(std::size_t(X.rows()), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::Vector2d lp = nb_log_posterior(model, X.row(i));
        out[std::size_t(i)] = lp(1) > lp(0) ? 1 : 0; // tie -> Ineffective
    }
    return out;
}

Labels labels_of(const OutcomeVector& y) {
    Labels labels(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        labels[i] = y.values(Eigen::Index(i)) > 0.5 ? 1 : 0;
    return labels;
}

Eigen::MatrixXd instances_by_features(const FeatureMatrix& m) { return m.values.transpose(); }

} // namespace

// ---------------------------------------------------------------------------
// Unified train / predict

TrainedModel train(ModelKind kind, const FeatureMatrix& X, const OutcomeVector& y, std::uint64_t seed) {
    X.validate();
    if (X.n_instances() != y.size()) throw ArgumentError("feature/outcome size mismatch");
    const Labels labels = labels_of(y);
    std::size_t pos = 0;
    for (std::uint8_t l : labels) pos += l;
    if (pos < 2 || labels.size() - pos < 2) throw DataError("degenerate labels");

    const Eigen::MatrixXd data = instances_by_features(X);
    TrainedModel model;
    model.kind = kind;
    model.feature_names = X.names;
    model.train_seed = seed;
    switch (kind) {
        case ModelKind::RandomForest:
            model.params = fit_forest(data, labels, seed, ForestOptions{});
            break;
        case ModelKind::DecisionTree:
            model.params = fit_tree(data, labels, TreeOptions{});
            break;
        case ModelKind::KNearest:
            model.params = fit_knn(data, labels);
            break;
        case ModelKind::MultilayerPerceptron:
            model.params = fit_mlp(data, labels, seed);
            break;
        case ModelKind::NaiveBayes:
            model.params = fit_nb(data, labels);
            break;
    }
    return model;
}

std::vector<Outcome> predict(const TrainedModel& model, const FeatureMatrix& X) {
    if (X.names != model.feature_names)
        throw ArgumentError("feature names do not match the trained model");
    const Eigen::MatrixXd data = instances_by_features(X);

    Labels labels;
    if (const auto* forest = std::get_if<RandomForestModel>(&model.params)) {
        labels = forest_predict(*forest, data);
    } else if (const auto* tree = std::get_if<DecisionTreeModel>(&model.params)) {
        labels.resize(std::size_t(data.rows()));
        for (Eigen::Index i = 0; i < data.rows(); ++i)
            labels[std::size_t(i)] = std::uint8_t(tree->predict_one(data.row(i)));
    } else if (const auto* knn = std::get_if<KnnModel>(&model.params)) {
        labels = knn_predict(*knn, data);
    } else if (const auto* mlp = std::get_if<MlpModel>(&model.params)) {
        labels = mlp_predict(*mlp, data);
    } else {
        labels = nb_predict(std::get<NaiveBayesModel>(model.params), data);
    }

    std::vector<Outcome> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = labels[i] ? Outcome::Effective : Outcome::Ineffective;
    return out;
}

// ---------------------------------------------------------------------------
// Metrics and the configuration comparison

MetricsRow metrics(std::span<const Outcome> predicted, std::span<const Outcome> truth) {
    if (predicted.size() != truth.size()) throw ArgumentError("prediction/truth length mismatch");
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == Outcome::Effective;
        const bool t = truth[i] == Outcome::Effective;
        if (p && t) tp += 1;
        else if (p && !t) fp += 1;
        else if (!p && t) fn += 1;
    }
    MetricsRow row;
    row.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    row.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    row.f1 = row.precision + row.recall > 0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    return row;
}

ClassifierReport compare_configurations(const Corpus& corpus, const FeatureMatrix& features,
                                        const std::vector<std::string>& selected_static,
                                        const std::vector<std::string>& selected_dynamic,
                                        std::uint64_t split_seed, std::uint64_t train_seed) {
    if (selected_static.empty() || selected_dynamic.empty())
        throw ArgumentError("both feature selections must be non-empty");

    auto [train_corpus, test_corpus] = split(corpus, 0.8, split_seed);

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < features.instance_ids.size(); ++i)
        position[features.instance_ids[i]] = i;
    auto positions_of = [&](const Corpus& c) {
        std::vector<std::size_t> pos;
        pos.reserve(c.cases.size());
        for (const auto& tc : c.cases) {
            const auto it = position.find(tc.id);
            if (it == position.end()) throw ArgumentError("case " + tc.id + " missing from features");
            pos.push_back(it->second);
        }
        return pos;
    };
    const auto train_pos = positions_of(train_corpus);
    const auto test_pos = positions_of(test_corpus);

    std::vector<std::string> all_names = selected_static;
    all_names.insert(all_names.end(), selected_dynamic.begin(), selected_dynamic.end());

    const std::vector<std::pair<std::string, const std::vector<std::string>*>> configs = {
        {"Dynamic", &selected_dynamic},
        {"Static", &selected_static},
        {"All", &all_names},
    };
    const ModelKind kinds[] = {ModelKind::RandomForest, ModelKind::DecisionTree, ModelKind::KNearest,
                               ModelKind::MultilayerPerceptron, ModelKind::NaiveBayes};

    const OutcomeVector y_train = outcomes_of(train_corpus);
    std::vector<Outcome> truth;
    truth.reserve(test_corpus.cases.size());
    for (const auto& tc : test_corpus.cases) truth.push_back(tc.outcome);

    ClassifierReport report;
    std::uint64_t unit = 0;
    for (ModelKind kind : kinds) {
        for (const auto& [config_name, names] : configs) {
            const FeatureMatrix X_train = features.subset(*names).columns(train_pos);
            const FeatureMatrix X_test = features.subset(*names).columns(test_pos);
            const TrainedModel model = train(kind, X_train, y_train, mix_seed(train_seed, unit++));
            const auto predicted = predict(model, X_test);
            report.rows.push_back({kind, config_name, metrics(predicted, truth)});
        }
    }
    return report;
}

std::string report_to_csv(const ClassifierReport& report) {
    std::ostringstream out;
    out << "model,configuration,precision,recall,f1\n";
    for (const auto& row : report.rows)
        out << to_string(row.kind) << ',' << row.configuration << ','
            << format_double(row.scores.precision) << ',' << format_double(row.scores.recall) << ','
            << format_double(row.scores.f1) << '\n';
    return out.str();
}

ClassifierReport report_from_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line) || line != "model,configuration,precision,recall,f1")
        throw DataError("malformed report header");
    ClassifierReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind, config, p, r, f1;
        std::getline(ls, kind, ',');
        std::getline(ls, config, ',');
        std::getline(ls, p, ',');
        std::getline(ls, r, ',');
        std::getline(ls, f1, ',');
        report.rows.push_back({model_kind_from_string(kind), config,
                               {parse_double(p, "report"), parse_double(r, "report"),
                                parse_double(f1, "report")}});
    }
    return report;
}

std::string report_to_table(const ClassifierReport& report) {
    auto find = [&](ModelKind kind, const std::string& config) -> const MetricsRow& {
        for (const auto& row : report.rows)
            if (row.kind == kind && row.configuration == config) return row.scores;
        throw ArgumentError("report is missing a row");
    };
    const struct {
        ModelKind kind;
        const char* label;
    } kinds[] = {{ModelKind::RandomForest, "RF"},
                 {ModelKind::DecisionTree, "DT"},
                 {ModelKind::KNearest, "KNN"},
                 {ModelKind::MultilayerPerceptron, "MLP"},
                 {ModelKind::NaiveBayes, "NB"}};

    std::ostringstream out;
    out << "model  metric  Dynamic  Static   All\n";
    char buf[128];
    for (const auto& [kind, label] : kinds) {
        const char* metric_names[] = {"P", "R", "F1"};
        for (int m = 0; m < 3; ++m) {
            auto pick = [&](const MetricsRow& row) {
                return m == 0 ? row.precision : m == 1 ? row.recall : row.f1;
            };
            std::snprintf(buf, sizeof(buf), "%-5s  %-6s  %7.3f  %7.3f  %7.3f\n",
                          m == 1 ? label : "", metric_names[m], pick(find(kind, "Dynamic")),
                          pick(find(kind, "Static")), pick(find(kind, "All")));
            out << buf;
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(Eigen::Index(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v(Eigen::Index(i)) = arr[i].get<double>();
    return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
    const Eigen::Index r = Eigen::Index(rows.size());
    const Eigen::Index c = r == 0 ? 0 : Eigen::Index(rows[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[std::size_t(i)][std::size_t(j)].get<double>();
    return m;
}

nlohmann::json tree_to_json(const DecisionTreeModel& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    return {{"nodes", std::move(nodes)},
            {"max_depth", tree.options.max_depth},
            {"min_split", tree.options.min_split},
            {"features_per_split", tree.options.features_per_split}};
}

DecisionTreeModel tree_from_json(const nlohmann::json& j) {
    DecisionTreeModel tree;
    for (const auto& n : j.at("nodes"))
        tree.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(),
                              n[4].get<int>()});
    tree.options.max_depth = j.at("max_depth").get<int>();
    tree.options.min_split = j.at("min_split").get<int>();
    tree.options.features_per_split = j.at("features_per_split").get<int>();
    return tree;
}

nlohmann::json scaler_to_json(const Scaler& s) {
    return {{"mean", vector_to_json(s.mean)}, {"std", vector_to_json(s.std)}};
}

Scaler scaler_from_json(const nlohmann::json& j) {
    Scaler s;
    s.mean = vector_from_json(j.at("mean"));
    s.std = vector_from_json(j.at("std"));
    return s;
}

} // namespace

nlohmann::json model_to_json(const TrainedModel& model) {
    nlohmann::json j;
    j["format"] = "testscape-model";
    j["version"] = 1;
    j["kind"] = to_string(model.kind);
    j["feature_names"] = model.feature_names;
    j["train_seed"] = model.train_seed;

    nlohmann::json params;
    if (const auto* forest = std::get_if<RandomForestModel>(&model.params)) {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tree : forest->trees) trees.push_back(tree_to_json(tree));
        params["trees"] = std::move(trees);
    } else if (const auto* tree = std::get_if<DecisionTreeModel>(&model.params)) {
        params = tree_to_json(*tree);
    } else if (const auto* knn = std::get_if<KnnModel>(&model.params)) {
        params["k"] = knn->k;
        params["scaler"] = scaler_to_json(knn->scaler);
        params["train"] = matrix_to_json(knn->train);
        params["labels"] = knn->labels;
    } else if (const auto* mlp = std::get_if<MlpModel>(&model.params)) {
        params["scaler"] = scaler_to_json(mlp->scaler);
        params["w1"] = matrix_to_json(mlp->w1);
        params["b1"] = vector_to_json(mlp->b1);
        params["w2"] = vector_to_json(mlp->w2.transpose());
        params["b2"] = mlp->b2;
    } else {
        const auto& nb = std::get<NaiveBayesModel>(model.params);
        params["log_prior0"] = nb.log_prior0;
        params["log_prior1"] = nb.log_prior1;
        params["mean0"] = vector_to_json(nb.mean0);
        params["var0"] = vector_to_json(nb.var0);
        params["mean1"] = vector_to_json(nb.mean1);
        params["var1"] = vector_to_json(nb.var1);
    }
    j["params"] = std::move(params);
    return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "testscape-model")
        throw DataError("not a testscape model file");
    TrainedModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.train_seed = j.at("train_seed").get<std::uint64_t>();
    const auto& params = j.at("params");
    switch (model.kind) {
        case ModelKind::RandomForest: {
            RandomForestModel forest;
            for (const auto& t : params.at("trees")) forest.trees.push_back(tree_from_json(t));
            model.params = std::move(forest);
            break;
        }
        case ModelKind::DecisionTree:
            model.params = tree_from_json(params);
            break;
        case ModelKind::KNearest: {
            KnnModel knn;
            knn.k = params.at("k").get<int>();
            knn.scaler = scaler_from_json(params.at("scaler"));
            knn.train = matrix_from_json(params.at("train"));
            knn.labels = params.at("labels").get<Labels>();
            model.params = std::move(knn);
            break;
        }
        case ModelKind::MultilayerPerceptron: {
            MlpModel mlp;
            mlp.scaler = scaler_from_json(params.at("scaler"));
            mlp.w1 = matrix_from_json(params.at("w1"));
            mlp.b1 = vector_from_json(params.at("b1"));
            mlp.w2 = vector_from_json(params.at("w2")).transpose();
            mlp.b2 = params.at("b2").get<double>();
            model.params = std::move(mlp);
            break;
        }
        case ModelKind::NaiveBayes: {
            NaiveBayesModel nb;
            nb.log_prior0 = params.at("log_prior0").get<double>();
            nb.log_prior1 = params.at("log_prior1").get<double>();
            nb.mean0 = vector_from_json(params.at("mean0"));
            nb.var0 = vector_from_json(params.at("var0"));
            nb.mean1 = vector_from_json(params.at("mean1"));
            nb.var1 = vector_from_json(params.at("var1"));
            model.params = std::move(nb);
            break;
        }
    }
    return model;
}

} // namespace testscape::learn
