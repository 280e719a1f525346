// Command-line front end: simulate scenarios, fit models, predict and run
// cross-validated benchmarks against the in-house baselines.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aatr/aatr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fnv1a_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= std::uint8_t(c);
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& inputs) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["timestamp"] = timestamp_utc();
    j["library_version"] = "1.0.0";
    json digests = json::object();
    for (const auto& in : inputs) digests[in] = fnv1a_digest(in);
    j["input_digests"] = digests;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << "\n";
}

void write_wide_csv(const fs::path& path, const aatr::FunctionalDataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "y";
    for (int j = 1; j <= ds.p(); ++j) out << ",x_" << j;
    out << "\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        out << fmt17(ds.y[i]);
        for (int j = 0; j < ds.p(); ++j) out << "," << fmt17(ds.x(i, j));
        out << "\n";
    }
}

void write_curve_csv(const fs::path& path, const aatr::Grid& grid,
                     const std::vector<std::pair<std::string, aatr::Vector>>& columns) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t";
    for (const auto& [name, v] : columns) out << "," << name;
    out << "\n";
    for (int j = 0; j < grid.size(); ++j) {
        out << fmt17(grid.point(j));
        for (const auto& [name, v] : columns) out << "," << fmt17(v[j]);
        out << "\n";
    }
}

int count_wide_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error(path + ": empty file");
    return int(std::count(header.begin(), header.end(), ',')) + 1;
}

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    bool seed_set = false;

    void apply_env() {
        if (const char* env = std::getenv("AATR_SEED")) seed = std::stoull(env);
    }
    fs::path ensure_out() const {
        fs::path dir(out_dir);
        fs::create_directories(dir);
        return dir;
    }
};

aatr::FitConfig build_fit_config(int Q, double lambda_min, double lambda_max,
                                 int lambda_count, int folds, int de_init,
                                 int de_reshape, int jobs, std::uint64_t seed) {
    aatr::FitConfig cfg;
    cfg.Q = Q;
    cfg.lambda_grid = aatr::log_spaced(lambda_min, lambda_max, lambda_count);
    cfg.folds = folds;
    cfg.de_init_budget = de_init;
    cfg.de_reshape_budget = de_reshape;
    cfg.jobs = jobs;
    cfg.master_seed = seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scalar-on-function ridge regression with adaptive rectangular templates"};
    app.require_subcommand(1);

    CommonOpts common;
    int p = 200, n = 100;
    double a = -1.0, b = 1.0;
    double sigma = 1.0;
    std::string shape = "rect1", dependence = "independent";
    int Q = 3, lambda_count = 20, folds = 3, outer_folds = 3;
    double lambda_min = 1e-4, lambda_max = 1e4;
    int de_init_budget = 5000, de_reshape_budget = 1000;
    int jobs = int(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    std::string method = "aatr";
    std::string data_file, curves_file, responses_file, model_file;
    std::string response_transform = "identity";
    int min_points = 4;
    std::vector<std::string> methods;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", common.seed, "RNG seed");
        cmd->add_option("-o,--out", common.out_dir, "output directory");
    };
    auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--p", p, "grid size");
        cmd->add_option("--a", a, "domain left endpoint");
        cmd->add_option("--b", b, "domain right endpoint");
    };
    auto add_fit_opts = [&](CLI::App* cmd) {
        cmd->add_option("--Q", Q, "max rectangle count");
        cmd->add_option("--lambda-min", lambda_min);
        cmd->add_option("--lambda-max", lambda_max);
        cmd->add_option("--lambda-count", lambda_count);
        cmd->add_option("--folds", folds, "CV folds for hyperparameter selection");
        cmd->add_option("--de-init-budget", de_init_budget);
        cmd->add_option("--de-reshape-budget", de_reshape_budget);
        cmd->add_option("--jobs", jobs, "concurrent (fold,q,lambda) cells");
    };
    auto add_input = [&](CLI::App* cmd) {
        cmd->add_option("--data", data_file, "wide CSV (y,x_1..x_p)");
        cmd->add_option("--curves", curves_file, "long CSV (unit,time,value)");
        cmd->add_option("--responses", responses_file, "CSV (unit,response)");
        cmd->add_option("--min-points", min_points, "minimum points per unit");
        cmd->add_option("--response-transform", response_transform,
                        "identity, log or mean");
        add_grid(cmd);
    };

    auto* sim = app.add_subcommand("simulate", "generate a simulation scenario");
    sim->add_option("--shape", shape, "rect1, rect2, rect3 or smooth");
    sim->add_option("--dependence", dependence, "independent or dependent");
    sim->add_option("--sigma", sigma, "noise standard deviation");
    sim->add_option("--n", n, "sample size");
    sim->add_option("--p", p, "grid size");
    add_common(sim);

    auto* fit = app.add_subcommand("fit", "fit a model to a dataset");
    fit->add_option("--method", method, "aatr, ridge, roughness or mnlstsq");
    add_input(fit);
    add_fit_opts(fit);
    add_common(fit);

    auto* pred = app.add_subcommand("predict", "predict with a saved model");
    pred->add_option("--model", model_file, "model JSON file")->required();
    pred->add_option("--data", data_file, "wide CSV of curves")->required();
    add_common(pred);

    auto* bench = app.add_subcommand("benchmark", "cross-validated method comparison");
    bench->add_option("--methods", methods, "subset of aatr,ridge,roughness,mnlstsq")
        ->delimiter(',');
    bench->add_option("--outer-folds", outer_folds, "outer CV folds (3 or 5)");
    bench->add_option("--shape", shape, "simulate this scenario when no --data given");
    bench->add_option("--dependence", dependence);
    bench->add_option("--sigma", sigma);
    bench->add_option("--n", n);
    add_input(bench);
    add_fit_opts(bench);
    add_common(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    common.apply_env();

    auto load_input = [&]() -> aatr::FunctionalDataset {
        if (!data_file.empty()) {
            int cols = count_wide_columns(data_file);
            aatr::Grid grid(cols - 1, a, b);
            return aatr::load_wide_csv(data_file, grid);
        }
        if (!curves_file.empty()) {
            if (responses_file.empty())
                throw std::runtime_error("--curves requires --responses");
            aatr::Grid grid(p, a, b);
            aatr::LoadReport report;
            auto series = aatr::load_long_csv(curves_file, grid, min_points, &report);
            if (!report.excluded.empty()) {
                std::cerr << "excluded " << report.excluded.size()
                          << " unit(s) with fewer than " << min_points << " points:";
                for (const auto& u : report.excluded) std::cerr << " " << u;
                std::cerr << "\n";
            }
            auto responses = aatr::load_response_csv(responses_file);
            return aatr::build_dataset(series, responses, grid,
                                       aatr::parse_response_transform(response_transform));
        }
        throw std::runtime_error("no input: pass --data or --curves/--responses");
    };

    try {
        if (*sim) {
            aatr::SimScenario scn;
            scn.n = n;
            scn.p = p;
            scn.noise_sd = sigma;
            scn.seed = common.seed;
            scn.beta_shape = aatr::parse_beta_shape(shape);
            scn.dependence = aatr::parse_dependence(dependence);
            aatr::FunctionalDataset ds = aatr::gen_dataset(scn);
            fs::path dir = common.ensure_out();
            write_wide_csv(dir / "data.csv", ds);
            write_curve_csv(dir / "true_beta.csv", ds.grid,
                            {{"beta", aatr::true_beta(scn.beta_shape, ds.grid)}});
            write_manifest(dir, "simulate",
                           {{"shape", shape}, {"dependence", dependence},
                            {"sigma", sigma}, {"n", n}, {"p", p},
                            {"seed", common.seed}},
                           {});
            std::cout << "wrote " << (dir / "data.csv").string() << " (" << ds.n()
                      << " rows, p=" << ds.p() << ")\n";
            return 0;
        }

        if (*fit) {
            aatr::FunctionalDataset ds = load_input();
            aatr::FitConfig cfg =
                build_fit_config(Q, lambda_min, lambda_max, lambda_count, folds,
                                 de_init_budget, de_reshape_budget, jobs, common.seed);
            fs::path dir = common.ensure_out();
            aatr::Model model{aatr::RidgeFit(ds.grid), {}, 0};
            aatr::Method mth = aatr::parse_method(method);
            if (mth == aatr::Method::aatr) {
                aatr::FitResult res = aatr::fit_aatr(ds, cfg);
                model = {res.fit, res.gamma_star, res.q_star};
                std::ofstream cv(dir / "cv_table.csv");
                cv << "q";
                for (double lam : cfg.lambda_grid) cv << "," << fmt17(lam);
                cv << "\n";
                for (int qi = 0; qi < cfg.Q; ++qi) {
                    cv << (qi + 1);
                    for (int m = 0; m < int(cfg.lambda_grid.size()); ++m)
                        cv << "," << fmt17(res.cv_table(qi, m));
                    cv << "\n";
                }
                std::cout << "selected q=" << res.q_star
                          << " lambda=" << fmt17(res.lambda_star) << "\n";
            } else {
                model.fit = aatr::fit_method(ds, mth, cfg, common.seed);
            }
            aatr::save_model(model, (dir / "model.json").string());
            aatr::Vector gamma_vec = model.gamma.rects.empty()
                                         ? aatr::Vector::Zero(ds.p())
                                         : aatr::template_eval(model.gamma, ds.grid);
            write_curve_csv(dir / "curves.csv", ds.grid,
                            {{"beta", model.fit.beta}, {"gamma", gamma_vec}});
            double train_mse = aatr::mse(aatr::predict(model.fit, ds.x), ds.y);
            std::cout << "training MSE " << fmt17(train_mse) << "\n";
            write_manifest(dir, "fit",
                           {{"method", method}, {"Q", Q}, {"folds", folds},
                            {"lambda_min", lambda_min}, {"lambda_max", lambda_max},
                            {"lambda_count", lambda_count},
                            {"de_init_budget", de_init_budget},
                            {"de_reshape_budget", de_reshape_budget},
                            {"jobs", jobs}, {"seed", common.seed}},
                           data_file.empty()
                               ? std::vector<std::string>{curves_file, responses_file}
                               : std::vector<std::string>{data_file});
            return 0;
        }

        if (*pred) {
            aatr::Model model = aatr::load_model(model_file);
            const int model_p = model.fit.grid.size();
            int cols = count_wide_columns(data_file);
            // Accept either bare x_1..x_p or a wide file with a leading y.
            std::ifstream probe(data_file);
            std::string header;
            std::getline(probe, header);
            bool has_y = header.rfind("y,", 0) == 0 || header == "y";
            int data_p = has_y ? cols - 1 : cols;
            if (data_p != model_p)
                throw std::runtime_error("predict: model expects p=" +
                                         std::to_string(model_p) + " but data has p=" +
                                         std::to_string(data_p));
            fs::path dir = common.ensure_out();
            std::ofstream out(dir / "predictions.csv");
            out << "unit,prediction\n";
            std::string line;
            int unit = 0;
            std::vector<double> row(model_p);
            while (std::getline(probe, line)) {
                if (line.empty()) continue;
                std::stringstream ss(line);
                std::string field;
                int j = 0;
                if (has_y) std::getline(ss, field, ',');
                while (std::getline(ss, field, ',')) {
                    if (j >= model_p) throw std::runtime_error("predict: ragged row");
                    row[j++] = std::stod(field);
                }
                if (j != model_p) throw std::runtime_error("predict: ragged row");
                aatr::Matrix x(1, model_p);
                for (int k = 0; k < model_p; ++k) x(0, k) = row[k];
                out << unit++ << "," << fmt17(aatr::predict(model.fit, x)[0]) << "\n";
            }
            write_manifest(dir, "predict", {{"model", model_file}},
                           {model_file, data_file});
            return 0;
        }

        if (*bench) {
            aatr::FunctionalDataset ds = [&]() {
                if (!data_file.empty() || !curves_file.empty()) return load_input();
                aatr::SimScenario scn;
                scn.n = n;
                scn.p = p;
                scn.noise_sd = sigma;
                scn.seed = common.seed;
                scn.beta_shape = aatr::parse_beta_shape(shape);
                scn.dependence = aatr::parse_dependence(dependence);
                return aatr::gen_dataset(scn);
            }();
            std::vector<aatr::Method> ms;
            if (methods.empty())
                ms = {aatr::Method::aatr, aatr::Method::ridge, aatr::Method::roughness,
                      aatr::Method::mnlstsq};
            else
                for (const auto& s : methods) ms.push_back(aatr::parse_method(s));
            aatr::FitConfig cfg =
                build_fit_config(Q, lambda_min, lambda_max, lambda_count, folds,
                                 de_init_budget, de_reshape_budget, jobs, common.seed);
            auto rows = aatr::run_benchmark(ds, ms, outer_folds, cfg);
            fs::path dir = common.ensure_out();
            std::ofstream out(dir / "results.csv");
            out << "method,mean_mse,sd_mse";
            for (int k = 1; k <= outer_folds; ++k) out << ",fold_" << k;
            out << "\n";
            for (const auto& row : rows) {
                out << aatr::method_name(row.method) << "," << fmt17(row.mean) << ","
                    << fmt17(row.sd);
                for (double v : row.fold_mse) out << "," << fmt17(v);
                out << "\n";
                std::cout << aatr::method_name(row.method) << ": " << fmt17(row.mean)
                          << " +/- " << fmt17(row.sd) << "\n";
            }
            write_manifest(dir, "benchmark",
                           {{"methods", methods}, {"outer_folds", outer_folds},
                            {"folds", folds}, {"seed", common.seed}, {"jobs", jobs}},
                           data_file.empty() ? std::vector<std::string>{}
                                             : std::vector<std::string>{data_file});
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
