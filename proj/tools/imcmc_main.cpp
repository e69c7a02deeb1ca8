#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "imcmc/config.hpp"
#include "imcmc/models.hpp"
#include "imcmc/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertificateFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config_path;
    std::int64_t seed = -1;
    int workers = -1;
    std::string out_dir;
    bool json = false;
};

imcmc::ExperimentConfig load_with_overrides(const Options& opt) {
    imcmc::ExperimentConfig config = imcmc::load_config(opt.config_path);
    if (opt.seed >= 0) {
        config.seed = static_cast<std::uint64_t>(opt.seed);
        config.has_seed = true;
    }
    if (opt.workers >= 0) config.workers = opt.workers;
    if (!opt.out_dir.empty()) config.out_dir = opt.out_dir;
    return config;
}

int cmd_run(const Options& opt) {
    imcmc::ExperimentConfig config;
    imcmc::ExperimentPlan plan;
    try {
        config = load_with_overrides(opt);
        plan = imcmc::make_plan(config);
    } catch (const imcmc::Error& e) {
        std::cerr << "imcmc run: " << e.what() << "\n";
        return kExitValidation;
    }
    try {
        imcmc::ExperimentResult result = imcmc::run_experiment(plan);
        std::map<std::string, std::string> files;
        files["results.csv"] = imcmc::render_csv(result.series);
        files["summary.json"] = result.summary.dump(2) + "\n";
        files["plots.gp"] =
            imcmc::render_plot_script(result.series, plan.model_name + " / " + plan.kernel_label);
        if (result.exact_flow) files["exact_flow.json"] = result.exact_flow->to_json().dump(2) + "\n";
        imcmc::write_artifacts(config.out_dir, files);
        if (opt.json) std::cout << result.summary.dump(2) << "\n";
        else
            std::cout << "wrote " << files.size() << " artifacts to " << config.out_dir << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "imcmc run: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_verify(const Options& opt) {
    imcmc::ExperimentPlan plan;
    try {
        imcmc::ExperimentConfig config = load_with_overrides(opt);
        plan = imcmc::make_plan(config);
    } catch (const imcmc::InvalidKernelError& e) {
        std::cerr << "imcmc verify: invalid kernel: " << e.what() << "\n";
        return kExitCertificateFailed;
    } catch (const imcmc::DegeneratePotentialError& e) {
        std::cerr << "imcmc verify: " << e.what() << "\n";
        return kExitCertificateFailed;
    } catch (const imcmc::Error& e) {
        std::cerr << "imcmc verify: " << e.what() << "\n";
        return kExitValidation;
    }
    try {
        imcmc::CertificationReport report = imcmc::run_certifications(plan);
        if (opt.json) std::cout << report.to_json().dump(2) << "\n";
        else
            std::cout << report.render_table();
        if (!report.all_pass()) return kExitCertificateFailed;
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "imcmc verify: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_list_models(bool json) {
    const auto& models = imcmc::bundled_models();
    if (json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& m : models)
            j.push_back({{"name", m.name}, {"description", m.description}, {"finite", m.finite}});
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& m : models) std::printf("%-22s %s\n", m.name.c_str(), m.description.c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"imcmc - measure-valued equation solver and experiment runner"};
    app.require_subcommand(1);

    Options run_opt, verify_opt;
    bool list_json = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment config and write artifacts");
    run->add_option("config", run_opt.config_path, "config file (.toml or .json)")->required();
    run->add_option("--seed", run_opt.seed, "override the config seed");
    run->add_option("--workers", run_opt.workers, "replicate worker count (0 = all cores)");
    run->add_option("--out", run_opt.out_dir, "override the output directory");
    run->add_flag("--json", run_opt.json, "print the summary JSON to stdout");

    CLI::App* verify =
        app.add_subcommand("verify", "run the certification suites and print a pass/fail table");
    verify->add_option("config", verify_opt.config_path, "config file (.toml or .json)")
        ->required();
    verify->add_option("--seed", verify_opt.seed, "override the config seed");
    verify->add_option("--workers", verify_opt.workers, "unused; accepted for symmetry");
    verify->add_option("--out", verify_opt.out_dir, "unused; accepted for symmetry");
    verify->add_flag("--json", verify_opt.json, "print the report as JSON");

    CLI::App* list = app.add_subcommand("list-models", "list bundled models");
    list->add_flag("--json", list_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message and usage hint
        return kExitValidation;
    }

    if (run->parsed()) return cmd_run(run_opt);
    if (verify->parsed()) return cmd_verify(verify_opt);
    if (list->parsed()) return cmd_list_models(list_json);
    std::cerr << app.help();
    return kExitValidation;
}
