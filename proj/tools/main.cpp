#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "privaudio/errors.hpp"
#include "privaudio/harness.hpp"
#include "privaudio/metrics.hpp"
#include "privaudio/resample.hpp"
#include "privaudio/scenarios.hpp"
#include "privaudio/stoi.hpp"
#include "privaudio/svgplot.hpp"
#include "privaudio/wav.hpp"

namespace {

using namespace privaudio;

struct SubFlags {
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    int workers = 1;
    bool full_scale = false;
    bool strict = false;
};

void add_common(CLI::App* sub, SubFlags& f) {
    sub->add_option("--config", f.config, "scenario description (TOML)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory (default: current)");
    sub->add_option("--seed", f.seed, "override the config's base seed");
    sub->add_option("--workers", f.workers, "worker threads (default: config)");
    sub->add_flag("--full-scale", f.full_scale, "paper-sized grid instead of the desk scale");
    sub->add_flag("--strict", f.strict, "exit 4 if any solve finished unconverged");
}

ScenarioConfig load_config(CLI::App* sub, const SubFlags& f, const std::string& scenario) {
    ScenarioConfig cfg = ScenarioConfig::load(f.config);
    cfg.scenario = scenario;  // the subcommand, not the file, names the runner
    if (sub->count("--seed") > 0) {
        cfg.seed = f.seed;
    }
    if (sub->count("--workers") > 0) {
        cfg.workers = std::max(1, f.workers);
    }
    if (f.full_scale) {
        cfg.full_scale = true;
    }
    cfg.strict = f.strict;
    cfg.out_dir = f.out;
    cfg.validate();
    return cfg;
}

int finish_scenario(const ScenarioConfig& cfg, const ResultTable& table) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string csv = cfg.out_dir + "/results.csv";
    table.write_csv(csv);
    write_manifest(cfg.out_dir, cfg);
    for (const std::string& fig : render_svgs(csv, cfg.out_dir)) {
        std::printf("wrote %s\n", fig.c_str());
    }
    std::printf("wrote %s (%zu rows)\n", csv.c_str(), table.rows.size());
    if (cfg.strict && table.any_nonconverged()) {
        std::fprintf(stderr,
                     "error: a solve finished unconverged (see the solver_converged column)\n");
        return 4;
    }
    return 0;
}

int run_scenario_command(CLI::App* sub, const SubFlags& f, const std::string& scenario) {
    const ScenarioConfig cfg = load_config(sub, f, scenario);
    ResultTable table;
    if (scenario == "demo") {
        table = run_reconstruction_demo(cfg);
    } else if (scenario == "heatmap") {
        table = run_heatmap(cfg);
    } else if (scenario == "sweep_variance") {
        table = run_noise_variance_sweep(cfg);
    } else if (scenario == "sweep_length") {
        table = run_noise_length_sweep(cfg);
    } else if (scenario == "robustness") {
        table = run_robustness(cfg);
    } else {
        table = run_measured(cfg);
    }
    return finish_scenario(cfg, table);
}

int run_rir_export(CLI::App* sub, const SubFlags& f) {
    const ScenarioConfig cfg = load_config(sub, f, "rir");
    export_rir_set(cfg, cfg.out_dir);
    std::printf("wrote %s/rirs.json\n", cfg.out_dir.c_str());
    return 0;
}

int run_design_export(CLI::App* sub, const SubFlags& f) {
    const ScenarioConfig cfg = load_config(sub, f, "design");
    const SceneBundle scene = cfg.room.present ? build_scene(cfg, cfg.seed, cfg.workers)
                                               : build_measured_scene(cfg);
    bool all_converged = true;
    for (const std::string& method : cfg.method_list()) {
        const DesignOutput d =
            run_design(method, scene.channels, scene.messages, cfg.design, cfg.seed);
        const std::string dir = cfg.out_dir + "/design_" + method;
        export_design(dir, d, cfg.config_hash(), scene.channels.sample_rate_hz());
        std::printf("wrote %s (iterations=%ld residual=%.3e converged=%s)\n", dir.c_str(),
                    d.report.iterations, d.report.relative_residual,
                    d.report.converged ? "yes" : "no");
        all_converged = all_converged && d.report.converged && d.projection_report.converged;
    }
    if (cfg.strict && !all_converged) {
        std::fprintf(stderr, "error: a solve finished unconverged\n");
        return 4;
    }
    return 0;
}

int run_render(CLI::App* sub, const SubFlags& f, const std::string& design_root) {
    const ScenarioConfig cfg = load_config(sub, f, "render");
    const SceneBundle scene = cfg.room.present ? build_scene(cfg, cfg.seed, cfg.workers)
                                               : build_measured_scene(cfg);
    const std::string root = design_root.empty() ? cfg.out_dir : design_root;
    for (const std::string& method : cfg.method_list()) {
        const DesignOutput d = import_design(root + "/design_" + method);
        if (static_cast<int>(d.drive.size()) != scene.channels.dims.speakers) {
            throw ConfigError("design has " + std::to_string(d.drive.size()) +
                              " speaker drives but the scene has " +
                              std::to_string(scene.channels.dims.speakers) + " speakers");
        }
        const std::string dir = cfg.out_dir + "/render_" + method;
        std::filesystem::create_directories(dir);
        for (int k = 0; k < scene.channels.dims.listeners; ++k) {
            const Signal rendered =
                render_at(d.drive, scene.channels.rirs[static_cast<std::size_t>(k)],
                          scene.channels.dims.message_len);
            write_wav_mono(dir + "/listener" + std::to_string(k + 1) + ".wav", rendered);
            const ListenerScore s = score_listener(d, scene.messages, rendered, k);
            std::printf("%s listener%d stoi=%.4f rel_err=%.3e\n", method.c_str(), k + 1,
                        s.stoi, s.rel_err);
        }
        for (std::size_t e = 0; e < scene.extra_rirs.size(); ++e) {
            const Signal rendered =
                render_at(d.drive, scene.extra_rirs[e], scene.channels.dims.message_len);
            write_wav_mono(dir + "/extra" + std::to_string(e) + ".wav", rendered);
            std::printf("%s extra%zu stoi=%.4f\n", method.c_str(), e,
                        score_offspot(d, scene.messages, rendered));
        }
    }
    return 0;
}

int run_stoi(const std::string& clean_path, const std::string& degraded_path) {
    const Signal clean = read_wav_mono(clean_path);
    Signal degraded = read_wav_mono(degraded_path);
    if (degraded.sample_rate_hz != clean.sample_rate_hz) {
        degraded = resample(degraded, clean.sample_rate_hz);
    }
    const long len = std::min(clean.size(), degraded.size());
    const double score = stoi(segment(clean, 0, len), segment(degraded, 0, len));
    std::printf("%.6f\n", score);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"private audio messaging over speaker arrays: design and experiments"};
    app.require_subcommand(1);

    // One flag set per subcommand so CLI11 option counts stay attributable.
    std::map<std::string, SubFlags> flags;
    std::function<int()> action;

    const std::pair<const char*, const char*> scenario_subs[] = {
        {"demo", "echoic vs echo-free delivery at the designed listeners"},
        {"heatmap", "intelligibility map over a grid of eavesdropping points"},
        {"sweep-variance", "off-spot intelligibility vs jamming noise level"},
        {"sweep-length", "off-spot intelligibility vs noise length (noise-filter design)"},
        {"robustness", "listener intelligibility under speaker dropout and channel error"},
        {"measured", "design and evaluation on an imported channel-measurement set"},
    };
    for (const auto& [name, desc] : scenario_subs) {
        CLI::App* sub = app.add_subcommand(name, desc);
        SubFlags* f = &flags[name];
        add_common(sub, *f);
        std::string canonical(name);
        std::replace(canonical.begin(), canonical.end(), '-', '_');
        sub->callback([sub, f, canonical, &action] {
            action = [sub, f, canonical] { return run_scenario_command(sub, *f, canonical); };
        });
    }

    {
        CLI::App* sub = app.add_subcommand("rir", "simulate and export a channel set");
        SubFlags* f = &flags["rir"];
        add_common(sub, *f);
        sub->callback([sub, f, &action] {
            action = [sub, f] { return run_rir_export(sub, *f); };
        });
    }
    {
        CLI::App* sub = app.add_subcommand("design", "solve drives and export them");
        SubFlags* f = &flags["design"];
        add_common(sub, *f);
        sub->callback([sub, f, &action] {
            action = [sub, f] { return run_design_export(sub, *f); };
        });
    }
    {
        CLI::App* sub = app.add_subcommand("render", "play an exported design through a scene");
        SubFlags* f = &flags["render"];
        add_common(sub, *f);
        auto design_root = std::make_shared<std::string>();
        sub->add_option("--design", *design_root,
                        "directory holding design_<method>/ (default: --out)");
        sub->callback([sub, f, design_root, &action] {
            action = [sub, f, design_root] { return run_render(sub, *f, *design_root); };
        });
    }
    {
        CLI::App* sub = app.add_subcommand("stoi", "intelligibility of a degraded recording");
        auto clean = std::make_shared<std::string>();
        auto degraded = std::make_shared<std::string>();
        sub->add_option("clean", *clean, "reference WAV")->required()->check(CLI::ExistingFile);
        sub->add_option("degraded", *degraded, "degraded WAV")
            ->required()
            ->check(CLI::ExistingFile);
        sub->callback([clean, degraded, &action] {
            action = [clean, degraded] { return run_stoi(*clean, *degraded); };
        });
    }

    try {
        app.parse(argc, argv);
        return action ? action() : 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "infeasible design: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
