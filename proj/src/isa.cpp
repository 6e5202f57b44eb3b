#include "testscape/isa.hpp"

#include "testscape/errors.hpp"
#include "testscape/learners.hpp"
#include "testscape/parallel.hpp"
#include "testscape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace testscape::isa {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

// Pearson correlation returning 0 when either side is constant.
double pearson_or_zero(std::span<const double> x, std::span<const double> y) {
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("pearson inputs must have equal length");
    if (x.size() < 2) throw ArgumentError("pearson needs at least 2 samples");
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DataError("zero variance input to pearson");
    return sxy / std::sqrt(sxx * syy);
}

FeatureMatrix prefilter(const FeatureMatrix& features, const OutcomeVector& outcomes,
                        std::span<const std::string> technique_tags, double threshold,
                        std::vector<std::string>* warnings) {
    features.validate();
    if (features.n_instances() != outcomes.size() || technique_tags.size() != outcomes.size())
        throw ArgumentError("features, outcomes and technique tags must align");

    // Drop globally constant features first.
    std::vector<std::size_t> live;
    for (std::size_t f = 0; f < features.n_features(); ++f) {
        const auto row = features.values.row(Eigen::Index(f));
        if (row.maxCoeff() == row.minCoeff()) {
            if (warnings)
                warnings->push_back("dropping constant feature " + features.names[f]);
        } else {
            live.push_back(f);
        }
    }

    std::map<std::string, std::vector<std::size_t>> by_technique;
    for (std::size_t i = 0; i < technique_tags.size(); ++i)
        by_technique[technique_tags[i]].push_back(i);

    std::set<std::size_t> keep;
    for (const auto& [technique, instances] : by_technique) {
        std::vector<double> y(instances.size());
        for (std::size_t j = 0; j < instances.size(); ++j)
            y[j] = outcomes.values(Eigen::Index(instances[j]));
        const bool has_both = std::any_of(y.begin(), y.end(), [](double v) { return v > 0.5; }) &&
                              std::any_of(y.begin(), y.end(), [](double v) { return v < 0.5; });
        if (!has_both)
            throw DataError("technique " + technique + " has a single outcome class");

        double best_abs = -1.0;
        std::size_t best_feature = 0;
        std::vector<double> x(instances.size());
        for (std::size_t f : live) {
            for (std::size_t j = 0; j < instances.size(); ++j)
                x[j] = features.values(Eigen::Index(f), Eigen::Index(instances[j]));
            const double abs_rho = std::abs(pearson_or_zero(x, y));
            if (abs_rho > best_abs) {
                best_abs = abs_rho;
                best_feature = f;
            }
            if (abs_rho > threshold) keep.insert(f);
        }
        if (best_abs >= 0.0) keep.insert(best_feature);
    }

    if (keep.empty()) throw DataError("no features survive pre-filter");

    std::vector<std::string> kept_names;
    for (std::size_t f : keep) kept_names.push_back(features.names[f]); // set iterates ascending
    return features.subset(kept_names);
}

Eigen::MatrixXd dissimilarity(const FeatureMatrix& features) {
    features.validate();
    const Eigen::Index n = Eigen::Index(features.n_features());
    const Eigen::Index i = Eigen::Index(features.n_instances());
    if (i < 2) throw ArgumentError("dissimilarity needs at least 2 instances");

    Eigen::MatrixXd X = features.values;
    for (Eigen::Index r = 0; r < n; ++r) {
        const double mean = X.row(r).mean();
        X.row(r).array() -= mean;
        const double norm = X.row(r).norm();
        if (norm == 0.0) throw DataError("zero variance feature " + features.names[std::size_t(r)]);
        X.row(r) /= norm;
    }

    Eigen::MatrixXd D(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        D(a, a) = 0.0;
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double rho = X.row(a).dot(X.row(b));
            const double d = std::clamp(1.0 - std::abs(rho), 0.0, 1.0);
            D(a, b) = d;
            D(b, a) = d;
        }
    }
    return D;
}

std::vector<std::vector<int>> FeatureClusters::members() const {
    std::vector<std::vector<int>> out(std::size_t(k));
    for (std::size_t f = 0; f < assignment.size(); ++f)
        out[std::size_t(assignment[f])].push_back(int(f));
    return out;
}

double medoid_cost(const Eigen::MatrixXd& D, std::span<const int> medoids) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < D.rows(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int m : medoids) nearest = std::min(nearest, D(i, m));
        cost += nearest;
    }
    return cost;
}

namespace {

// Nearest medoid position; ties toward the lowest position.
int nearest_medoid(const Eigen::MatrixXd& D, const std::vector<int>& medoids, int point) {
    int best = 0;
    double best_d = D(point, medoids[0]);
    for (std::size_t m = 1; m < medoids.size(); ++m) {
        const double d = D(point, medoids[m]);
        if (d < best_d) {
            best_d = d;
            best = int(m);
        }
    }
    return best;
}

} // namespace

FeatureClusters cluster_features(const Eigen::MatrixXd& D, int k, std::uint64_t seed) {
    const int n = int(D.rows());
    if (D.rows() != D.cols()) throw ArgumentError("dissimilarity matrix must be square");
    if (k < 2 || k > n - 1) throw ArgumentError("k must satisfy 2 <= k <= n-1");

    // Greedy farthest-point initialization; the seed picks the first medoid.
    Rng rng(seed);
    std::vector<int> medoids = {int(rng.below(std::uint64_t(n)))};
    std::vector<bool> is_medoid(std::size_t(n), false);
    is_medoid[std::size_t(medoids[0])] = true;
    while (int(medoids.size()) < k) {
        int farthest = -1;
        double far_d = -1.0;
        for (int p = 0; p < n; ++p) {
            if (is_medoid[std::size_t(p)]) continue;
            double nearest = std::numeric_limits<double>::infinity();
            for (int m : medoids) nearest = std::min(nearest, D(p, m));
            if (nearest > far_d) {
                far_d = nearest;
                farthest = p;
            }
        }
        medoids.push_back(farthest);
        is_medoid[std::size_t(farthest)] = true;
    }
    std::sort(medoids.begin(), medoids.end());

    constexpr int kMaxIterations = 100;
    int iterations = 0;

    // Assignment / medoid-update alternation.
    std::vector<int> assignment(std::size_t(n), 0);
    for (int p = 0; p < n; ++p) assignment[std::size_t(p)] = nearest_medoid(D, medoids, p);
    while (iterations < kMaxIterations) {
        ++iterations;
        bool changed = false;
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            std::vector<int> members;
            for (int p = 0; p < n; ++p)
                if (assignment[std::size_t(p)] == int(c)) members.push_back(p);
            if (members.empty()) continue;
            int best = medoids[c];
            double best_cost = std::numeric_limits<double>::infinity();
            for (int cand : members) {
                double cost = 0.0;
                for (int p : members) cost += D(cand, p);
                if (cost < best_cost) {
                    best_cost = cost;
                    best = cand;
                }
            }
            if (best != medoids[c]) {
                medoids[c] = best;
                changed = true;
            }
        }
        std::sort(medoids.begin(), medoids.end());
        std::vector<int> next(std::size_t(n));
        for (int p = 0; p < n; ++p) next[std::size_t(p)] = nearest_medoid(D, medoids, p);
        if (next != assignment) changed = true;
        assignment.swap(next);
        if (!changed) break;
    }

    // Swap descent: apply the best strictly improving (medoid, non-medoid)
    // swap until none is left.
    double cost = medoid_cost(D, medoids);
    while (iterations < kMaxIterations) {
        ++iterations;
        double best_cost = cost;
        int best_pos = -1, best_cand = -1;
        for (std::size_t pos = 0; pos < medoids.size(); ++pos) {
            const int old = medoids[pos];
            for (int cand = 0; cand < n; ++cand) {
                if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) continue;
                medoids[pos] = cand;
                const double c = medoid_cost(D, medoids);
                if (c < best_cost) {
                    best_cost = c;
                    best_pos = int(pos);
                    best_cand = cand;
                }
            }
            medoids[pos] = old;
        }
        if (best_pos < 0) break;
        medoids[std::size_t(best_pos)] = best_cand;
        std::sort(medoids.begin(), medoids.end());
        cost = best_cost;
    }

    FeatureClusters out;
    out.k = k;
    out.medoids = medoids;
    out.assignment.resize(std::size_t(n));
    for (int p = 0; p < n; ++p) out.assignment[std::size_t(p)] = nearest_medoid(D, medoids, p);
    return out;
}

double silhouette(const Eigen::MatrixXd& D, const FeatureClusters& clusters) {
    if (clusters.k < 2) throw ArgumentError("silhouette needs at least 2 clusters");
    const auto members = clusters.members();
    for (const auto& m : members)
        if (m.empty()) throw ArgumentError("silhouette requires non-empty clusters");

    const int n = int(D.rows());
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
        const int own = clusters.assignment[std::size_t(p)];
        if (members[std::size_t(own)].size() == 1) continue; // singleton -> 0
        double a = 0.0;
        for (int q : members[std::size_t(own)])
            if (q != p) a += D(p, q);
        a /= double(members[std::size_t(own)].size() - 1);

        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < clusters.k; ++c) {
            if (c == own) continue;
            double mean = 0.0;
            for (int q : members[std::size_t(c)]) mean += D(p, q);
            mean /= double(members[std::size_t(c)].size());
            b = std::min(b, mean);
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / double(n);
}

int choose_k(const Eigen::MatrixXd& D, int k_min, int k_max, std::uint64_t seed,
             std::vector<std::pair<int, double>>* silhouettes) {
    const int n = int(D.rows());
    if (n < 3) throw ArgumentError("choose_k needs at least 3 features");
    k_min = std::max(k_min, 2);
    k_max = std::min(k_max, n - 1);
    if (k_min > k_max) throw ArgumentError("empty k range");

    int best_k = k_min;
    double best_s = -2.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double s = silhouette(D, cluster_features(D, k, seed));
        if (silhouettes) silhouettes->push_back({k, s});
        if (s > best_s) {
            best_s = s;
            best_k = k;
        }
    }
    return best_k;
}

PcaProjection pca_project(const FeatureMatrix& subset, std::vector<std::string>* warnings) {
    const Eigen::Index m = Eigen::Index(subset.n_features());
    const Eigen::Index i = Eigen::Index(subset.n_instances());

    Eigen::MatrixXd X = subset.values;
    for (Eigen::Index r = 0; r < m; ++r) {
        const double mean = X.row(r).mean();
        X.row(r).array() -= mean;
        const double sd = std::sqrt(X.row(r).squaredNorm() / double(i));
        if (sd == 0.0) throw DataError("zero variance feature " + subset.names[std::size_t(r)]);
        X.row(r) /= sd;
    }

    const Eigen::MatrixXd cov = (X * X.transpose()) / double(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw DataError("PCA eigendecomposition failed");

    // Eigen sorts ascending; take the top two, largest first.
    auto component = [&](Eigen::Index rank_from_top) {
        Eigen::VectorXd v = eig.eigenvectors().col(m - 1 - rank_from_top);
        Eigen::Index arg_max = 0;
        double mag = -1.0;
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            if (std::abs(v(j)) > mag) {
                mag = std::abs(v(j));
                arg_max = j;
            }
        }
        if (v(arg_max) < 0.0) v = -v;
        return v;
    };

    const double lead = std::max(eig.eigenvalues()(m - 1), 0.0);
    const bool degenerate = m < 2 || eig.eigenvalues()(m - 2) <= 1e-12 * std::max(lead, 1e-300);
    const int used = degenerate ? 1 : 2;
    if (degenerate && warnings)
        warnings->push_back("degenerate covariance: projecting to 1 component");

    PcaProjection out;
    out.components.resize(used, m);
    out.eigenvalues.resize(used);
    for (int c = 0; c < used; ++c) {
        out.components.row(c) = component(c).transpose();
        out.eigenvalues(c) = eig.eigenvalues()(m - 1 - c);
    }
    out.coords = out.components * X;
    return out;
}

double score_combination(const FeatureMatrix& subset, const OutcomeVector& outcomes,
                         std::uint64_t seed, std::vector<std::string>* warnings) {
    if (subset.n_features() < 2) throw ArgumentError("combination must have at least 2 features");
    if (subset.n_instances() != outcomes.size())
        throw ArgumentError("features and outcomes must align");

    const PcaProjection projection = pca_project(subset, warnings);
    const Eigen::MatrixXd coords = projection.coords.transpose(); // instances x components
    const std::size_t n = std::size_t(coords.rows());

    learn::Labels labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = outcomes.values(Eigen::Index(i)) > 0.5 ? 1 : 0;

    // Stratified 5-fold assignment from the seed.
    constexpr int kFolds = 5;
    std::vector<int> fold(n, 0);
    Rng rng(mix_seed(seed, 0));
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == cls) idx.push_back(i);
        rng.shuffle(idx);
        for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = int(j % kFolds);
    }

    learn::ForestOptions forest_opt;
    forest_opt.trees = 100;
    forest_opt.max_depth = 16;

    std::size_t wrong = 0;
    for (int f = 0; f < kFolds; ++f) {
        std::vector<int> train_idx, test_idx;
        for (std::size_t i = 0; i < n; ++i)
            (fold[i] == f ? test_idx : train_idx).push_back(int(i));
        if (test_idx.empty()) continue;

        Eigen::MatrixXd X_train(train_idx.size(), coords.cols());
        learn::Labels y_train(train_idx.size());
        std::size_t pos = 0;
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
            X_train.row(Eigen::Index(i)) = coords.row(train_idx[i]);
            y_train[i] = labels[std::size_t(train_idx[i])];
            pos += y_train[i];
        }

        if (pos == 0 || pos == y_train.size()) {
            // Single-class fold: constant prediction by the training majority.
            const std::uint8_t constant = pos == 0 ? 0 : 1;
            for (int i : test_idx)
                if (labels[std::size_t(i)] != constant) ++wrong;
            continue;
        }

        const learn::RandomForestModel forest =
            learn::fit_forest(X_train, y_train, mix_seed(seed, std::uint64_t(16 + f)), forest_opt);
        Eigen::MatrixXd X_test(test_idx.size(), coords.cols());
        for (std::size_t i = 0; i < test_idx.size(); ++i)
            X_test.row(Eigen::Index(i)) = coords.row(test_idx[i]);
        const learn::Labels predicted = learn::forest_predict(forest, X_test);
        for (std::size_t i = 0; i < test_idx.size(); ++i)
            if (predicted[i] != labels[std::size_t(test_idx[i])]) ++wrong;
    }
    return double(wrong) / double(n);
}

SelectionResult select_best(const FeatureClusters& clusters, const FeatureMatrix& features,
                            const OutcomeVector& outcomes, std::uint64_t seed,
                            std::size_t max_combinations,
                            std::vector<std::string>* warnings) {
    if (max_combinations == 0) throw ArgumentError("max_combinations must be positive");
    const auto members = clusters.members();
    for (const auto& m : members)
        if (m.empty()) throw ArgumentError("clusters must be non-empty");

    // Cartesian product size, saturating once past the cap.
    std::size_t product = 1;
    bool exceeds = false;
    for (const auto& m : members) {
        if (product > max_combinations / m.size()) {
            exceeds = true;
            break;
        }
        product *= m.size();
    }

    std::vector<std::vector<int>> tuples;
    if (!exceeds && product <= max_combinations) {
        std::vector<std::size_t> counter(members.size(), 0);
        while (true) {
            std::vector<int> tuple(members.size());
            for (std::size_t c = 0; c < members.size(); ++c)
                tuple[c] = members[c][counter[c]];
            tuples.push_back(std::move(tuple));
            std::size_t c = 0;
            while (c < counter.size()) {
                if (++counter[c] < members[c].size()) break;
                counter[c] = 0;
                ++c;
            }
            if (c == counter.size()) break;
        }
    } else {
        // Seeded uniform sample of distinct tuples plus the all-medoids tuple.
        std::set<std::vector<int>> chosen;
        chosen.insert(clusters.medoids);
        Rng rng(mix_seed(seed, 0x5e1ec7));
        while (chosen.size() < max_combinations) {
            std::vector<int> tuple(members.size());
            for (std::size_t c = 0; c < members.size(); ++c)
                tuple[c] = members[c][rng.below(members[c].size())];
            chosen.insert(std::move(tuple));
        }
        tuples.assign(chosen.begin(), chosen.end());
    }
    std::sort(tuples.begin(), tuples.end());

    const std::uint64_t score_seed = mix_seed(seed, 1);
    std::vector<ScoredCombination> scored(tuples.size());
    std::vector<std::vector<std::string>> warning_slots(warnings ? tuples.size() : 0);
    parallel_for(tuples.size(), [&](std::size_t t) {
        std::vector<std::string> names;
        names.reserve(tuples[t].size());
        for (int f : tuples[t]) names.push_back(features.names[std::size_t(f)]);
        const FeatureMatrix subset = features.subset(names);
        // The same derived seed for every combination keeps folds comparable.
        const double err = score_combination(subset, outcomes, score_seed,
                                             warnings ? &warning_slots[t] : nullptr);
        scored[t] = {std::move(names), err};
    });
    if (warnings)
        for (const auto& slot : warning_slots)
            warnings->insert(warnings->end(), slot.begin(), slot.end());

    std::size_t best = 0;
    for (std::size_t t = 1; t < scored.size(); ++t) {
        if (scored[t].cv_error < scored[best].cv_error ||
            (scored[t].cv_error == scored[best].cv_error && scored[t].features < scored[best].features))
            best = t;
    }

    SelectionResult result;
    result.selected = scored[best].features;
    result.cv_error = scored[best].cv_error;
    result.alternatives = std::move(scored);
    std::sort(result.alternatives.begin(), result.alternatives.end(),
              [](const ScoredCombination& a, const ScoredCombination& b) {
                  return a.cv_error != b.cv_error ? a.cv_error < b.cv_error : a.features < b.features;
              });
    return result;
}

} // namespace testscape::isa
