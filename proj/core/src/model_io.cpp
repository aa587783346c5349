#include "isingclt/model_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "isingclt/errors.hpp"

namespace isingclt {

using nlohmann::json;

namespace {

std::size_t index_field(const json& t, const char* key, std::size_t n) {
    if (!t.contains(key) || !t[key].is_number_integer())
        throw ValidationError(std::string("model: triplet missing integer field '") + key + "'");
    long long v = t[key].get<long long>();
    if (v < 0 || static_cast<std::size_t>(v) >= n)
        throw ValidationError(std::string("model: triplet index '") + key + "' out of range");
    return static_cast<std::size_t>(v);
}

}  // namespace

IsingModel parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("model: not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("model: document must be an object");
    if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<long long>() <= 0)
        throw ValidationError("model: 'n' must be a positive integer");
    const auto n = static_cast<std::size_t>(doc["n"].get<long long>());
    const auto ni = static_cast<Eigen::Index>(n);

    Matrix a = Matrix::Zero(ni, ni);
    if (doc.contains("A")) {
        const json& ja = doc["A"];
        if (!ja.is_array()) throw ValidationError("model: 'A' must be an array");
        bool dense = !ja.empty() && ja.front().is_array();
        if (dense) {
            if (ja.size() != n) throw ValidationError("model: dense 'A' must have n rows");
            for (std::size_t i = 0; i < n; ++i) {
                if (!ja[i].is_array() || ja[i].size() != n)
                    throw ValidationError("model: dense 'A' row " + std::to_string(i) +
                                          " must have n entries");
                for (std::size_t j = 0; j < n; ++j) {
                    if (!ja[i][j].is_number()) throw ValidationError("model: non-numeric entry in 'A'");
                    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ja[i][j].get<double>();
                }
            }
        } else {
            std::map<std::pair<std::size_t, std::size_t>, double> listed;
            for (const json& t : ja) {
                if (!t.is_object()) throw ValidationError("model: sparse 'A' entries must be objects");
                std::size_t i = index_field(t, "i", n);
                std::size_t j = index_field(t, "j", n);
                if (!t.contains("value") || !t["value"].is_number())
                    throw ValidationError("model: triplet missing numeric 'value'");
                if (!listed.emplace(std::pair{i, j}, t["value"].get<double>()).second)
                    throw ValidationError("model: duplicate triplet (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ")");
            }
            for (const auto& [ij, v] : listed) {
                auto [i, j] = ij;
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                if (!listed.contains({j, i}))
                    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }
        }
    }

    Vector h = Vector::Zero(ni);
    if (doc.contains("h")) {
        const json& jh = doc["h"];
        if (!jh.is_array() || jh.size() != n) throw ValidationError("model: 'h' must be an array of n numbers");
        for (std::size_t i = 0; i < n; ++i) {
            if (!jh[i].is_number()) throw ValidationError("model: non-numeric entry in 'h'");
            h(static_cast<Eigen::Index>(i)) = jh[i].get<double>();
        }
    }

    IsingModel model = validate_model(a, h);
    if (doc.contains("label")) {
        if (!doc["label"].is_string()) throw ValidationError("model: 'label' must be a string");
        model.set_label(doc["label"].get<std::string>());
    }
    return model;
}

IsingModel read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("model: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string model_to_json(const IsingModel& model) {
    const std::size_t n = model.size();
    json doc;
    doc["n"] = n;
    json ja = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < n; ++j) row.push_back(model.coupling(i, j));
        ja.push_back(std::move(row));
    }
    doc["A"] = std::move(ja);
    json jh = json::array();
    for (std::size_t i = 0; i < n; ++i) jh.push_back(model.field(i));
    doc["h"] = std::move(jh);
    if (!model.label().empty()) doc["label"] = model.label();
    return doc.dump(2);
}

void write_model_file(const IsingModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("model: cannot write '" + path + "'");
    out << model_to_json(model) << '\n';
}

}  // namespace isingclt
