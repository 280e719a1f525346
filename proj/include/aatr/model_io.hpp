#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "aatr/fitter.hpp"
#include "aatr/ridge.hpp"

namespace aatr {

struct Model {
    RidgeFit fit;
    Template gamma;  // empty rects for baselines
    int q = 0;
};

inline nlohmann::json model_to_json(const Model& model) {
    nlohmann::json j;
    j["version"] = 1;
    j["grid"] = {{"p", model.fit.grid.size()},
                 {"a", model.fit.grid.a()},
                 {"b", model.fit.grid.b()}};
    j["beta0"] = model.fit.beta0;
    j["beta"] = std::vector<double>(model.fit.beta.begin(), model.fit.beta.end());
    nlohmann::json rects = nlohmann::json::array();
    for (const auto& r : model.gamma.rects)
        rects.push_back({{"A", r.A}, {"t0", r.t0}, {"T", r.T}});
    j["gamma"] = {{"rects", rects}};
    j["lambda"] = model.fit.lambda;
    j["q"] = model.q;
    j["col_means"] =
        std::vector<double>(model.fit.col_means.begin(), model.fit.col_means.end());
    j["col_scales"] =
        std::vector<double>(model.fit.col_scales.begin(), model.fit.col_scales.end());
    return j;
}

inline Model model_from_json(const nlohmann::json& j) {
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw std::runtime_error("model file: unsupported version");
    Grid grid(j["grid"]["p"].get<int>(), j["grid"]["a"].get<double>(),
              j["grid"]["b"].get<double>());
    Model m{RidgeFit(grid), {}, j["q"].get<int>()};
    m.fit.beta0 = j["beta0"].get<double>();
    auto to_vec = [](const nlohmann::json& arr) {
        Vector v(arr.size());
        for (size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
        return v;
    };
    m.fit.beta = to_vec(j["beta"]);
    m.fit.lambda = j["lambda"].get<double>();
    m.fit.col_means = to_vec(j["col_means"]);
    m.fit.col_scales = to_vec(j["col_scales"]);
    for (const auto& r : j["gamma"]["rects"])
        m.gamma.rects.push_back({r["A"].get<double>(), r["t0"].get<double>(),
                                 r["T"].get<double>()});
    m.fit.gamma = m.gamma.rects.empty() ? Vector::Zero(grid.size())
                                        : template_eval(m.gamma, grid);
    if (m.fit.beta.size() != grid.size())
        throw std::runtime_error("model file: beta length does not match grid");
    return m;
}

inline void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << "\n";
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace aatr
