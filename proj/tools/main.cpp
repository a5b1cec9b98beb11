// Command-line front end: model/input ingestion, run-mode selection,
// configuration, the synthetic fixture generator, and report emission.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "spikesim/container.hpp"
#include "spikesim/engine.hpp"
#include "spikesim/generator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDivergence = 1;
constexpr int kExitLoadError = 2;
constexpr int kExitConfigError = 3;

int run_generator(const spikesim::GenOptions &opt, const std::string &out_dir,
        const std::string &inputs_path)
{
    spikesim::ModelGraph model = spikesim::generate_model(opt);
    spikesim::save_model(model, out_dir);
    spikesim::InputBundle bundle = spikesim::generate_inputs(model, opt);
    std::string input_file = inputs_path.empty() ? out_dir + "/inputs.bin" : inputs_path;
    spikesim::save_inputs(bundle, input_file);
    std::cout << "model: " << out_dir << " (" << model.layers.size() << " layers, arch "
              << opt.arch << ", seed " << opt.seed << ")\n";
    std::cout << "inputs: " << input_file << " (" << bundle.images.size() << " images)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Event-driven spiking-network accelerator simulator with a dense golden "
                 "reference"};
    app.require_subcommand(0, 1);

    std::string model_path;
    std::string input_path;
    std::string mode_str = "compare";
    std::string config_path;
    std::string report_path;
    std::string emit = "text";
    int workers = 0;
    bool deterministic = false;

    app.add_option("--model", model_path, "model container directory");
    app.add_option("--input", input_path, "input bundle file");
    app.add_option("--mode", mode_str, "reference | eventdriven | compare")
            ->check(CLI::IsMember({"reference", "eventdriven", "compare"}));
    app.add_option("--config", config_path, "simulator constants (JSON)");
    app.add_option("--report", report_path, "write the report here instead of stdout");
    app.add_option("--emit", emit, "report format")->check(CLI::IsMember({"text", "csv"}));
    app.add_option("--workers", workers, "parallel image workers (overrides config)");
    app.add_flag("--deterministic-output", deterministic,
            "omit timestamps so identical runs emit identical bytes");

    auto *gen = app.add_subcommand("gen", "generate a seeded synthetic model and input bundle");
    spikesim::GenOptions gen_opt;
    std::string gen_out = "model";
    std::string gen_inputs;
    bool no_labels = false;
    gen->add_option("--out", gen_out, "output model directory");
    gen->add_option("--seed", gen_opt.seed, "generator seed");
    gen->add_option("--arch", gen_opt.arch, "fc-min | conv-tiny | qk-resnet-toy");
    gen->add_option("--images", gen_opt.images, "number of input images");
    gen->add_option("--density", gen_opt.density, "input spike density in [0,1]");
    gen->add_option("--frac-bits", gen_opt.frac_bits, "fixed-point fraction bits");
    gen->add_option("--inputs", gen_inputs, "input bundle path (default <out>/inputs.bin)");
    gen->add_flag("--no-labels", no_labels, "omit labels from the bundle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*gen) {
            gen_opt.with_labels = !no_labels;
            return run_generator(gen_opt, gen_out, gen_inputs);
        }

        if (model_path.empty() || input_path.empty()) {
            std::cerr << "error: --model and --input are required (see --help)\n";
            return kExitConfigError;
        }

        spikesim::SimConfig cfg;
        if (!config_path.empty()) {
            cfg = spikesim::load_sim_config(config_path);
        }
        if (workers > 0) {
            cfg.workers = workers;
        }
        cfg.deterministic_output = deterministic;

        spikesim::ModelGraph model = spikesim::load_model(model_path);
        spikesim::InputBundle inputs = spikesim::load_inputs(input_path);
        spikesim::RunMode mode = spikesim::parse_run_mode(mode_str);

        spikesim::RunInputs in{&model, &inputs, model_path, input_path};
        spikesim::RunReport report = spikesim::run_model(mode, in, cfg);

        std::string text =
                emit == "csv" ? report.to_csv() : report.to_text(!cfg.deterministic_output);
        if (report_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
            if (!out) {
                std::cerr << "error: cannot write report to " << report_path << "\n";
                return kExitConfigError;
            }
            out << text;
        }
        return spikesim::exit_code_for(report);
    } catch (const spikesim::LoadError &e) {
        std::cerr << "load error: " << e.what() << "\n";
        return kExitLoadError;
    } catch (const spikesim::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}
