#include "sepvar/problem.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using sepvar::cli::json;
using sepvar::cli::ordered_json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return json::parse(in);
}

void emit(const ordered_json& out, const std::string& out_path) {
    std::string text = out.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot open output file: " + out_path);
        f << text;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"separability test for (1,1)-tensor fields and diagonal metric reconstruction"};
    app.require_subcommand(1);

    std::string file, file_b, out_path;
    sepvar::cli::Overrides ov;
    std::uint64_t seed_opt = 0;
    int trials_opt = 0;
    double tol_opt = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("file", file, "problem file (JSON)")->required();
        cmd->add_option("--out", out_path, "write the report to this file instead of stdout");
        cmd->add_option("--seed", seed_opt, "override the sampling seed");
        cmd->add_option("--trials", trials_opt, "override the trial count");
        cmd->add_option("--tol", tol_opt, "override the absolute tolerance");
    };

    auto* check = app.add_subcommand("check", "run the four-question separability test");
    add_common(check);
    auto* reconstruct =
        app.add_subcommand("reconstruct", "reconstruct and verify a diagonal metric");
    add_common(reconstruct);
    reconstruct->add_option("--quad-tol", ov.quad_tol, "quadrature tolerance (default 1e-10)");
    reconstruct->add_option("--grid", ov.grid, "export grid points per axis (default 10)");
    auto* bracket = app.add_subcommand("bracket", "Nijenhuis bracket of two tensor files");
    bracket->add_option("fileA", file, "first tensor file")->required();
    bracket->add_option("fileB", file_b, "second tensor file")->required();
    bracket->add_option("--out", out_path, "write the result to this file instead of stdout");
    auto* oracle = app.add_subcommand("oracle", "diagonal-coordinate oracles and Q3/Q4 verdicts");
    add_common(oracle);

    CLI11_PARSE(app, argc, argv);

    if (check->count("--seed") || reconstruct->count("--seed") || oracle->count("--seed"))
        ov.seed = seed_opt;
    else if (const char* env = std::getenv("SEPVAR_SEED"))
        ov.seed = std::strtoull(env, nullptr, 10);
    if (check->count("--trials") || reconstruct->count("--trials") || oracle->count("--trials"))
        ov.trials = trials_opt;
    if (check->count("--tol") || reconstruct->count("--tol") || oracle->count("--tol"))
        ov.tol = tol_opt;

    try {
        ordered_json out;
        int code = 2;
        if (*check)
            code = sepvar::cli::run_check(read_json_file(file), ov, out);
        else if (*reconstruct)
            code = sepvar::cli::run_reconstruct(read_json_file(file), ov, out);
        else if (*bracket)
            code = sepvar::cli::run_bracket(read_json_file(file), read_json_file(file_b), out);
        else if (*oracle)
            code = sepvar::cli::run_oracle(read_json_file(file), ov, out);
        emit(out, out_path);
        return code;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
