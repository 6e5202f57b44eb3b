#include "testscape/csv.hpp"
#include "testscape/errors.hpp"
#include "testscape/feature_matrix.hpp"
#include "testscape/isa.hpp"
#include "testscape/learners.hpp"
#include "testscape/pilot.hpp"
#include "testscape/pipeline.hpp"
#include "testscape/rng.hpp"
#include "testscape/svg_plot.hpp"
#include "testscape/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace testscape;

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::pair<int, int> parse_k_range(const std::string& text) {
    const auto pos = text.find(':');
    if (pos == std::string::npos || pos == 0 || pos + 1 >= text.size())
        throw ArgumentError("--k-range must look like MIN:MAX");
    try {
        return {std::stoi(text.substr(0, pos)), std::stoi(text.substr(pos + 1))};
    } catch (const std::exception&) {
        throw ArgumentError("--k-range must look like MIN:MAX");
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    return nlohmann::json::parse(read_text_file(path));
}

// Splits selected feature names by membership in the static table.
void partition_selection(const std::vector<std::string>& selected, const FeatureMatrix& statics,
                         std::vector<std::string>& out_static, std::vector<std::string>& out_dynamic) {
    for (const auto& name : selected)
        (statics.has_feature(name) ? out_static : out_dynamic).push_back(name);
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Scenario feature analysis and outcome prediction toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 42;
    std::string config_path;
    std::string out_path;
    app.add_option("--seed", seed, "master seed");
    app.add_option("--config", config_path, "pipeline config JSON");
    app.add_option("--out", out_path, "output path");

    // --- synth -------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic corpus");
    std::size_t synth_n = 500;
    synth_cmd->add_option("--n", synth_n, "number of cases")->check(CLI::PositiveNumber);
    synth_cmd->callback([&] {
        if (out_path.empty()) throw ArgumentError("synth requires --out <dir>");
        const synth::SyntheticCorpus sc = synth::generate_corpus(synth_n, seed);
        synth::write_synthetic_corpus(sc, out_path);
        std::size_t effective = 0;
        for (const auto& tc : sc.corpus.cases)
            effective += tc.outcome == Outcome::Effective ? 1 : 0;
        std::cout << "wrote " << sc.corpus.cases.size() << " cases (" << effective
                  << " effective) to " << out_path << '\n';
    });

    // --- extract-static ------------------------------------------------------
    auto* stat_cmd = app.add_subcommand("extract-static", "road geometry features to CSV");
    std::string stat_corpus;
    double turn_threshold = kDefaultTurnThresholdDeg;
    stat_cmd->add_option("corpus", stat_corpus, "corpus directory")->required();
    stat_cmd->add_option("--turn-threshold", turn_threshold, "turn threshold in degrees");
    stat_cmd->callback([&] {
        if (out_path.empty()) throw ArgumentError("extract-static requires --out <csv>");
        const Corpus corpus = load_corpus(stat_corpus);
        FeatureMatrix features = static_feature_matrix(corpus, turn_threshold);
        if (auto extra = pipeline::load_extra_static(stat_corpus))
            features = stack(features, pipeline::align_to_ids(*extra, features.instance_ids));
        write_feature_csv(out_path, features);
        std::cout << "wrote " << features.n_features() << " features for "
                  << features.n_instances() << " cases to " << out_path << '\n';
    });

    // --- extract-dynamic -----------------------------------------------------
    auto* dyn_cmd = app.add_subcommand("extract-dynamic", "telemetry statistics to CSV");
    std::string dyn_corpus;
    std::vector<std::string> dyn_channels;
    dyn_cmd->add_option("corpus", dyn_corpus, "corpus directory")->required();
    dyn_cmd->add_option("--channels", dyn_channels, "channel names (default: common channels)");
    dyn_cmd->callback([&] {
        if (out_path.empty()) throw ArgumentError("extract-dynamic requires --out <csv>");
        const Corpus corpus = load_corpus(dyn_corpus);
        const std::vector<std::string> channels =
            dyn_channels.empty() ? common_channels(corpus) : dyn_channels;
        const FeatureMatrix features = dynamic_feature_matrix(corpus, channels);
        write_feature_csv(out_path, features);
        std::cout << "wrote " << features.n_features() << " features for "
                  << features.n_instances() << " cases to " << out_path << '\n';
    });

    // --- isa select / isa project ---------------------------------------------
    auto* isa_cmd = app.add_subcommand("isa", "feature selection and projection");
    isa_cmd->require_subcommand(1);
    isa_cmd->fallthrough();

    auto* select_cmd = isa_cmd->add_subcommand("select", "correlation prefilter, clustering, search");
    std::string sel_corpus;
    std::vector<std::string> sel_features;
    double sel_threshold = 0.3;
    std::size_t sel_max_combinations = 10000;
    std::string sel_k_range = "2:10";
    select_cmd->add_option("--corpus", sel_corpus, "corpus directory (labels + techniques)")->required();
    select_cmd->add_option("--features", sel_features, "feature CSVs")->required();
    select_cmd->add_option("--threshold", sel_threshold, "correlation threshold");
    select_cmd->add_option("--max-combinations", sel_max_combinations, "combination cap");
    select_cmd->add_option("--k-range", sel_k_range, "cluster count range MIN:MAX");
    select_cmd->callback([&] {
        if (out_path.empty()) throw ArgumentError("isa select requires --out <selection.json>");
        const Corpus corpus = load_corpus(sel_corpus);
        std::vector<std::string> ids;
        for (const auto& tc : corpus.cases) ids.push_back(tc.id);
        const FeatureMatrix features =
            pipeline::align_to_ids(pipeline::load_and_stack_features(sel_features), ids);
        pipeline::IsaConfig cfg;
        cfg.threshold = sel_threshold;
        cfg.max_combinations = sel_max_combinations;
        std::tie(cfg.k_min, cfg.k_max) = parse_k_range(sel_k_range);
        const pipeline::SelectionArtifacts art = pipeline::run_isa_selection(
            features, outcomes_of(corpus), techniques_of(corpus), cfg, seed);
        print_warnings(art.warnings);
        write_text_file(out_path, pipeline::selection_to_json(art).dump(2) + "\n");
        std::cout << "selected " << art.selection.selected.size() << " features (cv error "
                  << art.selection.cv_error << ") -> " << out_path << '\n';
    });

    auto* project_cmd = isa_cmd->add_subcommand("project", "fit the 2D projection");
    std::string prj_corpus, prj_selection, prj_projection, prj_space;
    int prj_restarts = 30, prj_max_iters = 1000;
    double prj_grad_tol = 1e-6;
    project_cmd->add_option("--corpus", prj_corpus, "corpus directory (labels)")->required();
    std::vector<std::string> prj_features;
    project_cmd->add_option("--features", prj_features, "feature CSVs")->required();
    project_cmd->add_option("--selection", prj_selection, "selection.json")->required();
    project_cmd->add_option("--out-projection", prj_projection, "projection.json path")->required();
    project_cmd->add_option("--out-space", prj_space, "instance_space.csv path")->required();
    project_cmd->add_option("--restarts", prj_restarts, "optimizer restarts");
    project_cmd->add_option("--max-iters", prj_max_iters, "optimizer iteration cap");
    project_cmd->add_option("--grad-tol", prj_grad_tol, "gradient norm tolerance");
    project_cmd->callback([&] {
        const Corpus corpus = load_corpus(prj_corpus);
        std::vector<std::string> ids;
        for (const auto& tc : corpus.cases) ids.push_back(tc.id);
        const FeatureMatrix features =
            pipeline::align_to_ids(pipeline::load_and_stack_features(prj_features), ids);
        const auto selected = pipeline::selected_features_from_json(read_json_file(prj_selection));
        const FeatureMatrix subset = features.subset(selected);
        const OutcomeVector outcomes = outcomes_of(corpus);

        pilot::FitOptions opts;
        opts.restarts = prj_restarts;
        opts.max_iters = prj_max_iters;
        opts.grad_tol = prj_grad_tol;
        const pilot::ProjectionModel model = pilot::fit_pilot(subset, outcomes, seed, opts);
        const pilot::InstanceSpace space = pilot::build_instance_space(model, subset, outcomes);

        write_text_file(prj_projection, pilot::projection_to_json(model).dump(2) + "\n");
        std::vector<std::string> header = {"id", "z1", "z2", "outcome"};
        header.insert(header.end(), space.feature_names.begin(), space.feature_names.end());
        std::vector<std::vector<std::string>> rows(space.instance_ids.size());
        for (std::size_t i = 0; i < space.instance_ids.size(); ++i) {
            rows[i].push_back(space.instance_ids[i]);
            rows[i].push_back(format_double(space.coordinates[i][0]));
            rows[i].push_back(format_double(space.coordinates[i][1]));
            rows[i].push_back(to_string(space.labels[i]));
            for (Eigen::Index f = 0; f < space.normalized_features.rows(); ++f)
                rows[i].push_back(format_double(space.normalized_features(f, Eigen::Index(i))));
        }
        write_csv(prj_space, header, rows);
        std::cout << "objective " << model.objective << " -> " << prj_projection << ", " << prj_space
                  << '\n';
    });

    // --- train ----------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train a single classifier");
    std::string train_kind = "rf", train_corpus;
    std::vector<std::string> train_features, train_names;
    train_cmd->add_option("--kind", train_kind, "rf|dt|knn|mlp|nb");
    train_cmd->add_option("--corpus", train_corpus, "corpus directory (labels)")->required();
    train_cmd->add_option("--features", train_features, "feature CSVs")->required();
    train_cmd->add_option("--names", train_names, "feature names to use (default: all)");
    train_cmd->callback([&] {
        if (out_path.empty()) throw ArgumentError("train requires --out <model.json>");
        const Corpus corpus = load_corpus(train_corpus);
        std::vector<std::string> ids;
        for (const auto& tc : corpus.cases) ids.push_back(tc.id);
        FeatureMatrix features =
            pipeline::align_to_ids(pipeline::load_and_stack_features(train_features), ids);
        if (!train_names.empty()) features = features.subset(train_names);
        const learn::TrainedModel model =
            learn::train(learn::model_kind_from_string(train_kind), features, outcomes_of(corpus), seed);
        write_text_file(out_path, learn::model_to_json(model).dump() + "\n");
        std::cout << "trained " << train_kind << " on " << features.n_features() << " features -> "
                  << out_path << '\n';
    });

    // --- predict ----------------------------------------------------------------
    auto* predict_cmd = app.add_subcommand("predict", "apply a trained model");
    std::string predict_model;
    std::vector<std::string> predict_features;
    predict_cmd->add_option("--model", predict_model, "model.json")->required();
    predict_cmd->add_option("--features", predict_features, "feature CSVs")->required();
    predict_cmd->callback([&] {
        if (out_path.empty()) throw ArgumentError("predict requires --out <csv>");
        const learn::TrainedModel model = learn::model_from_json(read_json_file(predict_model));
        const FeatureMatrix features =
            pipeline::load_and_stack_features(predict_features).subset(model.feature_names);
        const auto outcomes = learn::predict(model, features);
        std::vector<std::vector<std::string>> rows(outcomes.size());
        for (std::size_t i = 0; i < outcomes.size(); ++i)
            rows[i] = {features.instance_ids[i], to_string(outcomes[i])};
        write_csv(out_path, {"id", "outcome"}, rows);
        std::cout << "predicted " << outcomes.size() << " cases -> " << out_path << '\n';
    });

    // --- report ----------------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "15-model comparison table");
    std::string rep_corpus, rep_static, rep_dynamic, rep_selection;
    std::uint64_t rep_split_seed = 7, rep_train_seed = 11;
    report_cmd->add_option("--corpus", rep_corpus, "corpus directory")->required();
    report_cmd->add_option("--static-features", rep_static, "static feature CSV")->required();
    report_cmd->add_option("--dynamic-features", rep_dynamic, "dynamic feature CSV")->required();
    report_cmd->add_option("--selection", rep_selection, "selection.json")->required();
    report_cmd->add_option("--split-seed", rep_split_seed, "train/test split seed");
    report_cmd->add_option("--train-seed", rep_train_seed, "model training seed");
    report_cmd->callback([&] {
        if (out_path.empty()) throw ArgumentError("report requires --out <csv>");
        const Corpus corpus = load_corpus(rep_corpus);
        std::vector<std::string> ids;
        for (const auto& tc : corpus.cases) ids.push_back(tc.id);
        const FeatureMatrix statics = pipeline::align_to_ids(read_feature_csv(rep_static), ids);
        const FeatureMatrix dynamics = pipeline::align_to_ids(read_feature_csv(rep_dynamic), ids);
        const FeatureMatrix all = stack(statics, dynamics);
        const auto selected = pipeline::selected_features_from_json(read_json_file(rep_selection));
        std::vector<std::string> selected_static, selected_dynamic;
        partition_selection(selected, statics, selected_static, selected_dynamic);
        const learn::ClassifierReport report = learn::compare_configurations(
            corpus, all, selected_static, selected_dynamic, rep_split_seed, rep_train_seed);
        write_text_file(out_path, learn::report_to_csv(report));
        std::cout << learn::report_to_table(report);
    });

    // --- run -------------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "full pipeline");
    std::string run_corpus;
    std::size_t run_synth_n = 0;
    bool run_no_balance = false, run_no_plots = false;
    double run_threshold = 0.3, run_turn_threshold = kDefaultTurnThresholdDeg, run_fraction = 0.8;
    std::size_t run_max_combinations = 10000;
    std::string run_k_range = "2:10";
    int run_restarts = 30;
    std::vector<std::string> run_channels;
    run_cmd->add_option("--corpus", run_corpus, "corpus directory");
    run_cmd->add_option("--synth-n", run_synth_n, "generate a synthetic corpus of this size");
    run_cmd->add_flag("--no-balance", run_no_balance, "skip balanced subset construction");
    run_cmd->add_flag("--no-plots", run_no_plots, "skip SVG emission");
    run_cmd->add_option("--threshold", run_threshold, "prefilter correlation threshold");
    run_cmd->add_option("--turn-threshold", run_turn_threshold, "turn threshold in degrees");
    run_cmd->add_option("--max-combinations", run_max_combinations, "combination cap");
    run_cmd->add_option("--k-range", run_k_range, "cluster count range MIN:MAX");
    run_cmd->add_option("--restarts", run_restarts, "projection optimizer restarts");
    run_cmd->add_option("--train-fraction", run_fraction, "train split fraction");
    run_cmd->add_option("--channels", run_channels, "telemetry channels for dynamic features");
    run_cmd->callback([&] {
        pipeline::PipelineConfig config;
        if (!config_path.empty()) config = pipeline::PipelineConfig::from_json(read_json_file(config_path));
        auto set_if = [&](const char* flag, auto apply) {
            if (run_cmd->count(flag)) apply();
        };
        if (app.count("--seed")) config.seed = seed;
        if (!out_path.empty()) config.out_dir = out_path;
        set_if("--corpus", [&] { config.corpus_dir = run_corpus; });
        set_if("--synth-n", [&] { config.synth_n = run_synth_n; });
        set_if("--no-balance", [&] { config.balance = false; });
        set_if("--no-plots", [&] { config.plots = false; });
        set_if("--threshold", [&] { config.isa.threshold = run_threshold; });
        set_if("--turn-threshold", [&] { config.turn_threshold_deg = run_turn_threshold; });
        set_if("--max-combinations", [&] { config.isa.max_combinations = run_max_combinations; });
        set_if("--k-range", [&] { std::tie(config.isa.k_min, config.isa.k_max) = parse_k_range(run_k_range); });
        set_if("--restarts", [&] { config.pilot.restarts = run_restarts; });
        set_if("--train-fraction", [&] { config.learn.train_fraction = run_fraction; });
        set_if("--channels", [&] { config.channels = run_channels; });
        if (config.synth_n == 0 && config.corpus_dir.empty())
            throw ArgumentError("run needs --corpus or --synth-n");
        const auto dir = pipeline::run_pipeline(config);
        std::cout << "artifacts in " << dir.string() << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
