#include "testscape/pipeline.hpp"

#include "testscape/csv.hpp"
#include "testscape/errors.hpp"
#include "testscape/isa.hpp"
#include "testscape/learners.hpp"
#include "testscape/pilot.hpp"
#include "testscape/rng.hpp"
#include "testscape/svg_plot.hpp"
#include "testscape/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace testscape::pipeline {

nlohmann::json PipelineConfig::to_json(bool include_out) const {
    nlohmann::json j;
    j["corpus_dir"] = corpus_dir;
    j["synth_n"] = synth_n;
    j["seed"] = seed;
    j["balance"] = balance;
    j["turn_threshold_deg"] = turn_threshold_deg;
    j["channels"] = channels;
    j["isa"] = {{"threshold", isa.threshold},
                {"max_combinations", isa.max_combinations},
                {"k_min", isa.k_min},
                {"k_max", isa.k_max}};
    j["pilot"] = {{"restarts", pilot.restarts},
                  {"max_iters", pilot.max_iters},
                  {"grad_tol", pilot.grad_tol}};
    j["learn"] = {{"train_fraction", learn.train_fraction}};
    j["plots"] = plots;
    if (include_out) j["out_dir"] = out_dir;
    return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.corpus_dir = j.value("corpus_dir", c.corpus_dir);
    c.synth_n = j.value("synth_n", c.synth_n);
    c.seed = j.value("seed", c.seed);
    c.balance = j.value("balance", c.balance);
    c.turn_threshold_deg = j.value("turn_threshold_deg", c.turn_threshold_deg);
    c.channels = j.value("channels", c.channels);
    if (j.contains("isa")) {
        const auto& s = j.at("isa");
        c.isa.threshold = s.value("threshold", c.isa.threshold);
        c.isa.max_combinations = s.value("max_combinations", c.isa.max_combinations);
        c.isa.k_min = s.value("k_min", c.isa.k_min);
        c.isa.k_max = s.value("k_max", c.isa.k_max);
    }
    if (j.contains("pilot")) {
        const auto& s = j.at("pilot");
        c.pilot.restarts = s.value("restarts", c.pilot.restarts);
        c.pilot.max_iters = s.value("max_iters", c.pilot.max_iters);
        c.pilot.grad_tol = s.value("grad_tol", c.pilot.grad_tol);
    }
    if (j.contains("learn")) c.learn.train_fraction = j.at("learn").value("train_fraction", c.learn.train_fraction);
    c.plots = j.value("plots", c.plots);
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

std::string config_hash(const PipelineConfig& config) {
    const std::string canonical = config.to_json(false).dump();
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

FeatureMatrix load_and_stack_features(const std::vector<std::string>& csv_paths) {
    if (csv_paths.empty()) throw ArgumentError("at least one feature CSV is required");
    FeatureMatrix all = read_feature_csv(csv_paths.front());
    for (std::size_t p = 1; p < csv_paths.size(); ++p) {
        const FeatureMatrix next = read_feature_csv(csv_paths[p]);
        all = stack(all, align_to_ids(next, all.instance_ids));
    }
    return all;
}

FeatureMatrix align_to_ids(const FeatureMatrix& features, const std::vector<std::string>& ids) {
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < features.instance_ids.size(); ++i)
        position[features.instance_ids[i]] = i;
    std::vector<std::size_t> order;
    order.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = position.find(id);
        if (it == position.end()) throw DataError("features are missing instance " + id);
        order.push_back(it->second);
    }
    return features.columns(order);
}

std::optional<FeatureMatrix> load_extra_static(const std::filesystem::path& corpus_dir) {
    const auto path = corpus_dir / "extra_static.csv";
    if (!std::filesystem::exists(path)) return std::nullopt;
    return read_feature_csv(path);
}

SelectionArtifacts run_isa_selection(const FeatureMatrix& features, const OutcomeVector& outcomes,
                                     const std::vector<std::string>& techniques,
                                     const IsaConfig& config, std::uint64_t seed) {
    SelectionArtifacts art;
    art.seed = seed;
    art.config = config;
    art.filtered = isa::prefilter(features, outcomes, techniques, config.threshold, &art.warnings);
    const Eigen::MatrixXd dmatrix = isa::dissimilarity(art.filtered);
    const int k = isa::choose_k(dmatrix, config.k_min, config.k_max, seed, &art.silhouettes);
    art.clusters = isa::cluster_features(dmatrix, k, seed);
    art.selection = isa::select_best(art.clusters, art.filtered, outcomes, seed,
                                     config.max_combinations, &art.warnings);
    return art;
}

nlohmann::json selection_to_json(const SelectionArtifacts& art) {
    nlohmann::json j;
    j["format"] = "testscape-selection";
    j["version"] = 1;
    j["threshold"] = art.config.threshold;
    j["seed"] = art.seed;
    j["max_combinations"] = art.config.max_combinations;
    j["k"] = art.clusters.k;
    nlohmann::json sil = nlohmann::json::array();
    for (const auto& [k, s] : art.silhouettes) sil.push_back({{"k", k}, {"silhouette", s}});
    j["silhouette_by_k"] = std::move(sil);
    nlohmann::json assignment;
    for (std::size_t f = 0; f < art.filtered.names.size(); ++f)
        assignment[art.filtered.names[f]] = art.clusters.assignment[f];
    j["clusters"] = std::move(assignment);
    nlohmann::json medoids = nlohmann::json::array();
    for (int m : art.clusters.medoids) medoids.push_back(art.filtered.names[std::size_t(m)]);
    j["medoids"] = std::move(medoids);
    j["selected"] = art.selection.selected;
    j["cv_error"] = art.selection.cv_error;
    nlohmann::json combos = nlohmann::json::array();
    for (const auto& alt : art.selection.alternatives)
        combos.push_back({{"features", alt.features}, {"cv_error", alt.cv_error}});
    j["combinations"] = std::move(combos);
    j["warnings"] = art.warnings;
    return j;
}

std::vector<std::string> selected_features_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "testscape-selection")
        throw DataError("not a testscape selection file");
    return j.at("selected").get<std::vector<std::string>>();
}

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const ArgumentError& e) {
        throw ArgumentError("stage " + name + ": " + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError("stage " + name + ": " + e.what());
    } catch (const Error& e) {
        throw DataError("stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
        throw DataError("stage " + name + ": " + e.what());
    }
}

std::string outcome_csv_value(Outcome o) { return to_string(o); }

} // namespace

std::filesystem::path run_pipeline(const PipelineConfig& config) {
    const std::string hash = config_hash(config);
    const std::filesystem::path base(config.out_dir);
    const std::filesystem::path final_dir = base / ("run-" + hash);
    const std::filesystem::path tmp_dir = base / ("run-" + hash + ".tmp");

    std::filesystem::create_directories(base);
    std::filesystem::remove_all(tmp_dir);
    std::filesystem::create_directories(tmp_dir);

    try {
        // --- data ---------------------------------------------------------
        Corpus corpus;
        std::optional<FeatureMatrix> extra_static;
        if (config.synth_n > 0) {
            stage("synth", [&] {
                const synth::SyntheticCorpus sc = synth::generate_corpus(config.synth_n, config.seed);
                synth::write_synthetic_corpus(sc, tmp_dir / "corpus");
                corpus = sc.corpus;
                extra_static = sc.noise_static;
            });
        } else {
            stage("load", [&] {
                corpus = load_corpus(config.corpus_dir);
                extra_static = load_extra_static(config.corpus_dir);
            });
        }
        if (config.balance)
            stage("balance", [&] { corpus = balanced_subset(corpus, mix_seed(config.seed, 1)); });

        // --- extract --------------------------------------------------------
        FeatureMatrix static_features, dynamic_features;
        stage("extract", [&] {
            static_features = static_feature_matrix(corpus, config.turn_threshold_deg);
            if (extra_static)
                static_features = stack(static_features,
                                        align_to_ids(*extra_static, static_features.instance_ids));
            std::vector<std::string> channels =
                config.channels.empty() ? common_channels(corpus) : config.channels;
            dynamic_features = dynamic_feature_matrix(corpus, channels);
            write_feature_csv(tmp_dir / "static_features.csv", static_features);
            write_feature_csv(tmp_dir / "dynamic_features.csv", dynamic_features);
        });

        const FeatureMatrix all_features = stack(static_features, dynamic_features);
        const OutcomeVector outcomes = outcomes_of(corpus);
        const std::vector<std::string> techniques = techniques_of(corpus);

        // --- ISA selection --------------------------------------------------
        const std::uint64_t isa_seed = mix_seed(config.seed, 2);
        SelectionArtifacts art;
        stage("prefilter", [&] {
            art.filtered = isa::prefilter(all_features, outcomes, techniques, config.isa.threshold,
                                          &art.warnings);
        });
        Eigen::MatrixXd dmatrix;
        stage("cluster", [&] {
            dmatrix = isa::dissimilarity(art.filtered);
            const int k = isa::choose_k(dmatrix, config.isa.k_min, config.isa.k_max, isa_seed,
                                        &art.silhouettes);
            art.clusters = isa::cluster_features(dmatrix, k, isa_seed);
        });
        stage("select", [&] {
            art.seed = isa_seed;
            art.config = config.isa;
            art.selection = isa::select_best(art.clusters, art.filtered, outcomes, isa_seed,
                                             config.isa.max_combinations, &art.warnings);
            write_text_file(tmp_dir / "selection.json", selection_to_json(art).dump(2) + "\n");
        });
        const isa::SelectionResult& selection = art.selection;

        // --- projection ------------------------------------------------------
        pilot::ProjectionModel model;
        pilot::InstanceSpace space;
        stage("project", [&] {
            const FeatureMatrix selected = all_features.subset(selection.selected);
            pilot::FitOptions opts;
            opts.restarts = config.pilot.restarts;
            opts.max_iters = config.pilot.max_iters;
            opts.grad_tol = config.pilot.grad_tol;
            model = pilot::fit_pilot(selected, outcomes, mix_seed(config.seed, 3), opts);
            space = pilot::build_instance_space(model, selected, outcomes);

            write_text_file(tmp_dir / "projection.json", pilot::projection_to_json(model).dump(2) + "\n");

            std::vector<std::string> header = {"id", "z1", "z2", "outcome"};
            header.insert(header.end(), space.feature_names.begin(), space.feature_names.end());
            std::vector<std::vector<std::string>> rows(space.instance_ids.size());
            for (std::size_t i = 0; i < space.instance_ids.size(); ++i) {
                auto& row = rows[i];
                row.push_back(space.instance_ids[i]);
                row.push_back(format_double(space.coordinates[i][0]));
                row.push_back(format_double(space.coordinates[i][1]));
                row.push_back(outcome_csv_value(space.labels[i]));
                for (Eigen::Index f = 0; f < space.normalized_features.rows(); ++f)
                    row.push_back(format_double(space.normalized_features(f, Eigen::Index(i))));
            }
            write_csv(tmp_dir / "instance_space.csv", header, rows);
        });

        // --- classifiers -----------------------------------------------------
        stage("train", [&] {
            std::vector<std::string> selected_static, selected_dynamic;
            for (const auto& name : selection.selected) {
                if (static_features.has_feature(name)) selected_static.push_back(name);
                else selected_dynamic.push_back(name);
            }
            const learn::ClassifierReport report = learn::compare_configurations(
                corpus, all_features, selected_static, selected_dynamic, mix_seed(config.seed, 4),
                mix_seed(config.seed, 5));
            write_text_file(tmp_dir / "report.csv", learn::report_to_csv(report));
            write_text_file(tmp_dir / "report.txt", learn::report_to_table(report));
        });

        // --- plots -----------------------------------------------------------
        if (config.plots) {
            stage("plots", [&] {
                std::filesystem::create_directories(tmp_dir / "plots");
                write_text_file(tmp_dir / "plots" / "instance_space_outcome.svg",
                                svgplot::render_instance_space(space, "outcome"));
                for (const auto& feature : space.feature_names)
                    write_text_file(tmp_dir / "plots" / ("instance_space_" + feature + ".svg"),
                                    svgplot::render_instance_space(space, feature));
            });
        }

        write_text_file(tmp_dir / "config.json", config.to_json(true).dump(2) + "\n");

        std::filesystem::remove_all(final_dir);
        std::filesystem::rename(tmp_dir, final_dir);
        return final_dir;
    } catch (...) {
        std::filesystem::remove_all(tmp_dir);
        throw;
    }
}

} // namespace testscape::pipeline
