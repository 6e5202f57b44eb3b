#include "testscape/feature_matrix.hpp"

#include "testscape/csv.hpp"
#include "testscape/errors.hpp"
#include "testscape/road_features.hpp"
#include "testscape/telemetry_features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace testscape {

void FeatureMatrix::validate() const {
    if (std::size_t(values.rows()) != names.size() || std::size_t(values.cols()) != instance_ids.size())
        throw DataError("feature matrix shape does not match names/ids");
    std::set<std::string> uniq(names.begin(), names.end());
    if (uniq.size() != names.size()) throw DataError("duplicate feature names");
    std::set<std::string> uniq_ids(instance_ids.begin(), instance_ids.end());
    if (uniq_ids.size() != instance_ids.size()) throw DataError("duplicate instance ids");
    if (!values.allFinite()) throw DataError("feature matrix contains non-finite values");
}

std::size_t FeatureMatrix::row_index(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ArgumentError("unknown feature " + name);
    return std::size_t(it - names.begin());
}

bool FeatureMatrix::has_feature(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::string> feature_names) const {
    FeatureMatrix out;
    out.instance_ids = instance_ids;
    out.names.assign(feature_names.begin(), feature_names.end());
    out.values.resize(Eigen::Index(feature_names.size()), values.cols());
    for (std::size_t r = 0; r < feature_names.size(); ++r)
        out.values.row(Eigen::Index(r)) = values.row(Eigen::Index(row_index(feature_names[r])));
    return out;
}

FeatureMatrix FeatureMatrix::columns(std::span<const std::size_t> instance_positions) const {
    FeatureMatrix out;
    out.names = names;
    out.instance_ids.reserve(instance_positions.size());
    out.values.resize(values.rows(), Eigen::Index(instance_positions.size()));
    for (std::size_t c = 0; c < instance_positions.size(); ++c) {
        if (instance_positions[c] >= n_instances()) throw ArgumentError("instance position out of range");
        out.instance_ids.push_back(instance_ids[instance_positions[c]]);
        out.values.col(Eigen::Index(c)) = values.col(Eigen::Index(instance_positions[c]));
    }
    return out;
}

FeatureMatrix stack(const FeatureMatrix& top, const FeatureMatrix& bottom) {
    if (top.instance_ids != bottom.instance_ids)
        throw ArgumentError("cannot stack feature matrices with different instance ids");
    FeatureMatrix out;
    out.instance_ids = top.instance_ids;
    out.names = top.names;
    out.names.insert(out.names.end(), bottom.names.begin(), bottom.names.end());
    out.values.resize(top.values.rows() + bottom.values.rows(), top.values.cols());
    out.values.topRows(top.values.rows()) = top.values;
    out.values.bottomRows(bottom.values.rows()) = bottom.values;
    out.validate();
    return out;
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "id")
        throw DataError("feature CSV " + path.string() + " must start with an id column");
    FeatureMatrix m;
    m.names.assign(table.header.begin() + 1, table.header.end());
    m.values.resize(Eigen::Index(m.names.size()), Eigen::Index(table.rows.size()));
    m.instance_ids.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size())
            throw DataError("feature CSV " + path.string() + " has a ragged row");
        m.instance_ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c)
            m.values(Eigen::Index(c - 1), Eigen::Index(r)) = parse_double(row[c], path.string());
    }
    m.validate();
    return m;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
    std::vector<std::string> header = {"id"};
    header.insert(header.end(), m.names.begin(), m.names.end());
    std::vector<std::vector<std::string>> rows(m.n_instances());
    for (std::size_t i = 0; i < m.n_instances(); ++i) {
        rows[i].reserve(m.names.size() + 1);
        rows[i].push_back(m.instance_ids[i]);
        for (std::size_t f = 0; f < m.names.size(); ++f)
            rows[i].push_back(format_double(m.values(Eigen::Index(f), Eigen::Index(i))));
    }
    write_csv(path, header, rows);
}

FeatureMatrix static_feature_matrix(const Corpus& corpus, double turn_threshold_deg) {
    FeatureMatrix m;
    m.names = static_feature_names();
    m.values.resize(Eigen::Index(m.names.size()), Eigen::Index(corpus.cases.size()));
    m.instance_ids.reserve(corpus.cases.size());
    for (std::size_t i = 0; i < corpus.cases.size(); ++i) {
        m.instance_ids.push_back(corpus.cases[i].id);
        const auto v = static_feature_vector(corpus.cases[i], turn_threshold_deg);
        for (std::size_t f = 0; f < v.size(); ++f)
            m.values(Eigen::Index(f), Eigen::Index(i)) = v[f];
    }
    m.validate();
    return m;
}

FeatureMatrix dynamic_feature_matrix(const Corpus& corpus, std::span<const std::string> channels) {
    FeatureMatrix m;
    m.names = dynamic_feature_names(channels);
    m.values.resize(Eigen::Index(m.names.size()), Eigen::Index(corpus.cases.size()));
    m.instance_ids.reserve(corpus.cases.size());
    for (std::size_t i = 0; i < corpus.cases.size(); ++i) {
        m.instance_ids.push_back(corpus.cases[i].id);
        const auto v = dynamic_feature_vector(corpus.cases[i], channels);
        for (std::size_t f = 0; f < v.size(); ++f)
            m.values(Eigen::Index(f), Eigen::Index(i)) = v[f];
    }
    m.validate();
    return m;
}

std::vector<std::string> common_channels(const Corpus& corpus) {
    if (corpus.cases.empty()) return {};
    std::set<std::string> common;
    for (const auto& ch : corpus.cases.front().telemetry) common.insert(ch.name);
    for (const auto& tc : corpus.cases) {
        std::set<std::string> present;
        for (const auto& ch : tc.telemetry) present.insert(ch.name);
        std::set<std::string> kept;
        std::set_intersection(common.begin(), common.end(), present.begin(), present.end(),
                              std::inserter(kept, kept.begin()));
        common.swap(kept);
    }
    return {common.begin(), common.end()};
}

OutcomeVector outcomes_of(const Corpus& corpus) {
    OutcomeVector y;
    y.values.resize(Eigen::Index(corpus.cases.size()));
    for (std::size_t i = 0; i < corpus.cases.size(); ++i)
        y.values(Eigen::Index(i)) = corpus.cases[i].outcome == Outcome::Effective ? 1.0 : 0.0;
    return y;
}

std::vector<std::string> techniques_of(const Corpus& corpus) {
    std::vector<std::string> t;
    t.reserve(corpus.cases.size());
    for (const auto& tc : corpus.cases) t.push_back(tc.technique);
    return t;
}

} // namespace testscape
