// henonlab: experiment runner for complex Henon map dynamics.
//
//   henonlab <census|slice|homoclinic|shadow|lyapunov|render|validate>
//            --config <path.(json|toml)> [--out <dir>] [--seed <u64>]
//            [--threads <n>] [--precision double|extended]

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "henon/experiment.hpp"

namespace {

int run_subcommand(const std::string& sub, const std::string& config_path,
                   const std::string& out_dir, long long seed_override, int threads_override,
                   const std::string& precision_override, bool validate_only) {
    std::vector<std::string> errors;
    henon::json doc;
    try {
        doc = henon::parse_config_text(henon::read_file(config_path), config_path, errors);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    henon::ExperimentConfig cfg = henon::parse_experiment_config(doc, sub, errors);
    if (!errors.empty()) {
        std::fprintf(stderr, "config rejected (%zu problem%s):\n", errors.size(),
                     errors.size() == 1 ? "" : "s");
        for (const auto& e : errors) std::fprintf(stderr, "  - %s\n", e.c_str());
        return 2;
    }
    if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
    if (threads_override > 0) cfg.threads = threads_override;
    if (!precision_override.empty()) cfg.precision = precision_override;
    auto warnings = henon::feasibility_warnings(cfg);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (validate_only) {
        std::printf("config ok: subcommand=%s hash=fnv1a:%s warnings=%zu\n", sub.c_str(),
                    henon::hash_hex(henon::fnv1a(cfg.canonical.dump())).c_str(), warnings.size());
        return 0;
    }
    henon::Runner runner(std::move(cfg), out_dir);
    henon::ExperimentRecord rec = runner.run();
    std::printf("%s: status=%s record=%s/record.json\n", sub.c_str(), rec.status.c_str(),
                out_dir.c_str());
    if (rec.status == "error")
        std::fprintf(stderr, "error: %s\n",
                     rec.doc["results"].value("error", std::string("unknown")).c_str());
    return rec.status == "complete" ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for complex Henon map dynamics"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "run", precision;
    long long seed = -1;
    int threads = 0;
    std::string validate_target;

    auto add_common = [&](CLI::App* sc) {
        sc->add_option("--config", config_path, "experiment config (.json or .toml)")
            ->required();
        sc->add_option("--out", out_dir, "output directory (default: run)");
        sc->add_option("--seed", seed, "override the config RNG seed");
        sc->add_option("--threads", threads, "parallelism degree (default: all cores)");
        sc->add_option("--precision", precision, "double or extended");
    };

    for (const auto& name : henon::known_subcommands()) add_common(app.add_subcommand(name));
    CLI::App* val = app.add_subcommand("validate", "check a config without running");
    add_common(val);
    val->add_option("--for", validate_target, "subcommand the config is meant for")
        ->default_val("census");

    CLI11_PARSE(app, argc, argv);

    for (const auto& name : henon::known_subcommands())
        if (app.got_subcommand(name))
            return run_subcommand(name, config_path, out_dir, seed, threads, precision, false);
    if (app.got_subcommand("validate"))
        return run_subcommand(validate_target, config_path, out_dir, seed, threads, precision,
                              true);
    return 2;
}
