// Writes the synthetic QA fixture used by the tests and the README walkthrough.
#include "cue/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"cue-make-fixture: write the synthetic QA fixture"};
    cue::synthetic::Config config;
    std::string out_dir;
    app.add_option("--out-dir", out_dir)->required();
    app.add_option("--train", config.n_train)->capture_default_str();
    app.add_option("--eval", config.n_eval)->capture_default_str();
    app.add_option("--generations", config.generations)->capture_default_str();
    app.add_option("--seed", config.seed)->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        cue::synthetic::write_dataset(out_dir, cue::synthetic::make_dataset(config));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cout << "wrote fixture to " << out_dir << '\n';
    return 0;
}
