/**
 * @file io.hpp
 * @brief JSON (de)serialization of joints, scenario specs, weak datasets and models.
 *
 *   joint     {"K": int, "features": [[...], ...], "joint": [[...], ...]}   (K rows x n_x columns)
 *   scenario  {"name": tag, "params": {...}}
 *   dataset   {"spec": scenario, "seed": u64, "channels": [{"label": str, "items": [...]}]}
 *   model     {"K": int, "d": int, "weights": [[...]], "bias": [...]}
 */
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>  // nlohmann::json, vendored

#include "wslrr/datagen.hpp"
#include "wslrr/risk.hpp"

namespace wslrr {

using json = nlohmann::json;

namespace detail {

inline json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index t = 0; t < v.size(); ++t) a.push_back(v(t));
    return a;
}

inline Matrix matrix_from_json(const json& a, const std::string& what) {
    if (!a.is_array() || a.empty() || !a[0].is_array())
        throw Error(ErrorCode::SchemaMismatch, what + " must be a nonempty array of arrays");
    const auto rows = static_cast<Eigen::Index>(a.size());
    const auto cols = static_cast<Eigen::Index>(a[0].size());
    Matrix M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = a[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw Error(ErrorCode::SchemaMismatch, what + " rows must have equal length");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw Error(ErrorCode::SchemaMismatch, what + " entries must be numbers");
            M(r, c) = v.get<double>();
        }
    }
    return M;
}

inline Vector vector_from_json(const json& a, const std::string& what) {
    if (!a.is_array()) throw Error(ErrorCode::SchemaMismatch, what + " must be an array");
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (!a[t].is_number()) throw Error(ErrorCode::SchemaMismatch, what + " entries must be numbers");
        v(static_cast<Eigen::Index>(t)) = a[t].get<double>();
    }
    return v;
}

/// One matrix, or an array of per-instance matrices.
inline std::vector<Matrix> matrices_from_json(const json& a, const std::string& what) {
    if (a.is_array() && !a.empty() && a[0].is_array() && !a[0].empty() && a[0][0].is_number())
        return {matrix_from_json(a, what)};
    if (!a.is_array() || a.empty()) throw Error(ErrorCode::SchemaMismatch, what + " must be a matrix or a list of matrices");
    std::vector<Matrix> out;
    for (const auto& m : a) out.push_back(matrix_from_json(m, what));
    return out;
}

inline json matrices_to_json(const std::vector<Matrix>& v) {
    if (v.size() == 1) return matrix_to_json(v.front());
    json a = json::array();
    for (const auto& m : v) a.push_back(matrix_to_json(m));
    return a;
}

inline json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

template <class T>
T get_field(const json& o, const char* key, const std::string& what) {
    if (!o.is_object() || !o.contains(key)) throw Error(ErrorCode::SchemaMismatch, what + " lacks \"" + key + "\"");
    try {
        return o.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::SchemaMismatch, what + " field \"" + key + "\" has the wrong type");
    }
}

} // namespace detail

/** @brief Reads a whole file. @throws Error ParseError when it cannot be opened */
inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/** @throws Error ParseError when the file cannot be written */
inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
    out << text;
}

inline json joint_to_json(const FiniteJoint& j) {
    json f = json::array();
    for (const auto& x : j.features) f.push_back(detail::vector_to_json(x));
    return {{"K", j.K}, {"features", f}, {"joint", detail::matrix_to_json(j.joint)}};
}

/** @throws Error SchemaMismatch, plus validate_joint() errors */
inline FiniteJoint joint_from_json(const json& o) {
    const int K = detail::get_field<int>(o, "K", "joint");
    const Matrix P = detail::matrix_from_json(detail::get_field<json>(o, "joint", "joint"), "joint");
    const Matrix F = detail::matrix_from_json(detail::get_field<json>(o, "features", "joint"), "features");
    std::vector<Vector> feats;
    for (Eigen::Index r = 0; r < F.rows(); ++r) feats.push_back(F.row(r).transpose());
    return validate_joint(K, std::move(feats), P);
}

inline FiniteJoint joint_from_text(const std::string& text) { return joint_from_json(detail::parse_text(text)); }

inline json scenario_to_json(const ScenarioSpec& spec) {
    using namespace scenario;
    json p = json::object();
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MCD>) p = {{"gamma_p", s.gamma_p}, {"gamma_n", s.gamma_n}};
            else if constexpr (std::is_same_v<T, UU>) p = {{"gamma_1", s.gamma_1}, {"gamma_2", s.gamma_2}};
            else if constexpr (std::is_same_v<T, CCN>) p = {{"flip", detail::matrices_to_json(s.flip)}};
            else if constexpr (std::is_same_v<T, GCCN>) p = {{"cond", detail::matrices_to_json(s.cond)}};
            else if constexpr (std::is_same_v<T, PPL>) p = {{"C", detail::matrix_to_json(s.C)}};
            else if constexpr (std::is_same_v<T, MCL>) p = {{"q", s.q}};
            else if constexpr (std::is_same_v<T, SubConf>) p = {{"Y_s", s.Y_s}};
            else if constexpr (std::is_same_v<T, SCConf>) p = {{"y_s", s.y_s}};
        },
        spec);
    return {{"name", scenario_name(spec)}, {"params", p}};
}

/**
 * @brief Builds a spec from a name and a params object (missing params default to {}).
 * @throws Error SchemaMismatch for unknown names or malformed params
 */
inline ScenarioSpec scenario_from_name(const std::string& name, const json& params) {
    using namespace scenario;
    const std::string what = "scenario " + name;
    const json p = params.is_null() ? json::object() : params;
    if (!p.is_object()) throw Error(ErrorCode::SchemaMismatch, what + " params must be an object");
    if (name == "MCD") return MCD{detail::get_field<double>(p, "gamma_p", what), detail::get_field<double>(p, "gamma_n", what)};
    if (name == "UU") return UU{detail::get_field<double>(p, "gamma_1", what), detail::get_field<double>(p, "gamma_2", what)};
    if (name == "PU") return PU{};
    if (name == "SU") return SU{};
    if (name == "DU") return DU{};
    if (name == "SD") return SD{};
    if (name == "Pcomp") return Pcomp{};
    if (name == "Sconf") return Sconf{};
    if (name == "CCN") return CCN{detail::matrices_from_json(detail::get_field<json>(p, "flip", what), "flip")};
    if (name == "GCCN") return GCCN{detail::matrices_from_json(detail::get_field<json>(p, "cond", what), "cond")};
    if (name == "PPL") return PPL{detail::matrix_from_json(detail::get_field<json>(p, "C", what), "C")};
    if (name == "PCPL") return PCPL{};
    if (name == "MCL") return MCL{detail::get_field<std::vector<double>>(p, "q", what)};
    if (name == "CL") return CL{};
    if (name == "SubConf") return SubConf{detail::get_field<std::vector<int>>(p, "Y_s", what)};
    if (name == "SCConf") return SCConf{detail::get_field<int>(p, "y_s", what)};
    if (name == "Pconf") return Pconf{};
    if (name == "Soft") return Soft{};
    throw Error(ErrorCode::SchemaMismatch, "unknown scenario name '" + name + "'");
}

/** @throws Error SchemaMismatch */
inline ScenarioSpec scenario_from_json(const json& o) {
    const auto name = detail::get_field<std::string>(o, "name", "scenario");
    return scenario_from_name(name, o.contains("params") ? o.at("params") : json::object());
}

/** @brief Rejects SubConf with Y_s = [K]; that case is the Soft scenario. */
inline void check_user_spec(const ScenarioSpec& spec, int K) {
    if (const auto* s = std::get_if<scenario::SubConf>(&spec))
        if (static_cast<int>(s->Y_s.size()) >= K) throw Error(ErrorCode::InvalidParams, "SubConf Y_s must be a strict subset of the classes");
}

inline json dataset_to_json(const WeakDataset& ds) {
    json chans = json::array();
    for (const auto& ch : ds.channels) {
        json items = json::array();
        for (const auto& it : ch.items) {
            switch (ch.kind) {
            case ItemKind::Index: items.push_back(it.x); break;
            case ItemKind::Pair: items.push_back(json::array({it.x, it.x2})); break;
            case ItemKind::LabeledIndex: items.push_back(json::array({it.s, it.x})); break;
            case ItemKind::ConfidentIndex: items.push_back({{"index", it.x}, {"confidences", it.conf}}); break;
            case ItemKind::ConfidentPair:
                items.push_back({{"pair", json::array({it.x, it.x2})}, {"confidence", it.conf.at(0)}});
                break;
            }
        }
        chans.push_back({{"label", ch.label}, {"items", std::move(items)}});
    }
    return {{"spec", scenario_to_json(ds.spec)}, {"seed", ds.seed}, {"channels", std::move(chans)}};
}

/** @throws Error ParseError, SchemaMismatch */
inline WeakDataset dataset_from_json(const json& o) {
    WeakDataset ds;
    ds.spec = scenario_from_json(detail::get_field<json>(o, "spec", "dataset"));
    ds.seed = detail::get_field<std::uint64_t>(o, "seed", "dataset");
    const json chans = detail::get_field<json>(o, "channels", "dataset");
    const auto expected = dataset_channels(ds.spec);
    if (!chans.is_array() || chans.size() != expected.size())
        throw Error(ErrorCode::SchemaMismatch, "dataset channels do not match " + scenario_name(ds.spec));
    for (std::size_t c = 0; c < chans.size(); ++c) {
        WeakChannel ch;
        ch.label = detail::get_field<std::string>(chans[c], "label", "channel");
        if (ch.label != expected[c].first) throw Error(ErrorCode::SchemaMismatch, "unexpected channel '" + ch.label + "'");
        ch.kind = expected[c].second;
        const json items = detail::get_field<json>(chans[c], "items", "channel");
        if (!items.is_array()) throw Error(ErrorCode::SchemaMismatch, "channel items must be an array");
        try {
            for (const auto& e : items) {
                WeakItem it;
                switch (ch.kind) {
                case ItemKind::Index: it.x = e.get<int>(); break;
                case ItemKind::Pair:
                    it.x = e.at(0).get<int>();
                    it.x2 = e.at(1).get<int>();
                    break;
                case ItemKind::LabeledIndex:
                    it.s = e.at(0).get<int>();
                    it.x = e.at(1).get<int>();
                    break;
                case ItemKind::ConfidentIndex:
                    it.x = e.at("index").get<int>();
                    it.conf = e.at("confidences").get<std::vector<double>>();
                    break;
                case ItemKind::ConfidentPair:
                    it.x = e.at("pair").at(0).get<int>();
                    it.x2 = e.at("pair").at(1).get<int>();
                    it.conf = {e.at("confidence").get<double>()};
                    break;
                }
                ch.items.push_back(std::move(it));
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SchemaMismatch, std::string("malformed item: ") + e.what());
        }
        ds.channels.push_back(std::move(ch));
    }
    return ds;
}

inline WeakDataset dataset_from_text(const std::string& text) { return dataset_from_json(detail::parse_text(text)); }

inline json model_to_json(const LinearModel& m) {
    return {{"K", m.K()}, {"d", m.d()}, {"weights", detail::matrix_to_json(m.W)}, {"bias", detail::vector_to_json(m.b)}};
}

/** @throws Error SchemaMismatch */
inline LinearModel model_from_json(const json& o) {
    LinearModel m{detail::matrix_from_json(detail::get_field<json>(o, "weights", "model"), "weights"),
                  detail::vector_from_json(detail::get_field<json>(o, "bias", "model"), "bias")};
    if (m.K() != detail::get_field<int>(o, "K", "model") || m.d() != detail::get_field<int>(o, "d", "model") ||
        m.b.size() != m.W.rows())
        throw Error(ErrorCode::SchemaMismatch, "model shapes disagree with K and d");
    return m;
}

} // namespace wslrr
