#include "privaudio/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include "json.hpp"
#include "privaudio/errors.hpp"
#include "privaudio/metrics.hpp"
#include "privaudio/philox.hpp"
#include "privaudio/resample.hpp"
#include "privaudio/stoi.hpp"
#include "privaudio/sweep.hpp"
#include "privaudio/wav.hpp"

namespace privaudio {
namespace {

RoomScene room_from_spec(const RoomSpec& spec, double absorption) {
    RoomScene room = RoomScene::make(spec.width, spec.height, absorption, spec.sample_rate_hz,
                                     spec.rir_len);
    room.speed_of_sound = spec.speed_of_sound;
    room.max_order = spec.max_order;
    return room;
}

/// out[r][s] = channel from sources[s] to receivers[r].
std::vector<std::vector<Signal>> simulate_set(const RoomScene& room,
                                              const std::vector<Point>& sources,
                                              const std::vector<Point>& receivers,
                                              int workers) {
    const long ns = static_cast<long>(sources.size());
    std::vector<std::vector<Signal>> out(receivers.size(), std::vector<Signal>(sources.size()));
    parallel_for(static_cast<long>(receivers.size()) * ns, workers, [&](long idx) {
        const long r = idx / ns;
        const long s = idx % ns;
        out[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] =
            simulate_rir(room, sources[static_cast<std::size_t>(s)],
                         receivers[static_cast<std::size_t>(r)]);
    });
    return out;
}

ResultRow base_row(const ScenarioConfig& cfg, const std::string& hash, std::uint64_t seed) {
    ResultRow r;
    r.scenario = cfg.scenario;
    r.seed = seed;
    r.config_hash = hash;
    return r;
}

/// Convergence covers both solves of a nullspace design; the headline
/// iteration count and residual stay those of the message-carrying solve.
void fill_solver(ResultRow& row, const DesignOutput& d) {
    row.solver_iterations = d.report.iterations;
    row.solver_relative_residual = d.report.relative_residual;
    row.solver_converged = (d.report.converged && d.projection_report.converged) ? 1 : 0;
    row.solver_tolerance = d.report.tolerance;
}

ResultRow listener_row(const ScenarioConfig& cfg, const std::string& hash,
                       const SceneBundle& scene, const DesignOutput& d, int k,
                       std::uint64_t seed) {
    const Signal rendered =
        render_at(d.drive, scene.channels.rirs[static_cast<std::size_t>(k)],
                  scene.channels.dims.message_len);
    const ListenerScore s = score_listener(d, scene.messages, rendered, k);
    ResultRow row = base_row(cfg, hash, seed);
    row.method = d.method;
    row.label = "listener" + std::to_string(k + 1);
    if (static_cast<std::size_t>(k) < scene.placement.listeners.size()) {
        row.x_m = scene.placement.listeners[static_cast<std::size_t>(k)].x;
        row.y_m = scene.placement.listeners[static_cast<std::size_t>(k)].y;
    }
    row.stoi = s.stoi;
    row.relative_error = s.rel_err;
    row.relative_error_optscale = s.rel_err_optscale;
    row.snr_db = s.snr_db;
    row.align_lag = s.lag;
    fill_solver(row, d);
    return row;
}

ResultRow offspot_row(const ScenarioConfig& cfg, const std::string& hash,
                      const SceneBundle& scene, const DesignOutput& d, std::size_t extra_index,
                      const std::string& label, std::uint64_t seed) {
    const Signal rendered = render_at(d.drive, scene.extra_rirs[extra_index],
                                      scene.channels.dims.message_len);
    ResultRow row = base_row(cfg, hash, seed);
    row.method = d.method;
    row.label = label;
    row.x_m = scene.placement.extras[extra_index].x;
    row.y_m = scene.placement.extras[extra_index].y;
    row.stoi = score_offspot(d, scene.messages, rendered);
    fill_solver(row, d);
    return row;
}

std::vector<int> shuffled_speakers(int speakers, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(speakers));
    std::iota(perm.begin(), perm.end(), 0);
    const Philox gen(seed, 0x9d2c5680f4a7c15ULL);
    for (int i = speakers - 1; i > 0; --i) {
        const double u = gen.uniform(static_cast<std::uint64_t>(i));
        const int j = std::min(i, static_cast<int>(u * (i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

void json_report(nlohmann::json& j, const char* key, const SolveReport& r) {
    j[key] = {{"iterations", r.iterations},
              {"relative_residual", r.relative_residual},
              {"normal_residual", r.normal_residual},
              {"converged", r.converged},
              {"tolerance", r.tolerance}};
}

SolveReport report_from_json(const nlohmann::json& j) {
    SolveReport r;
    r.iterations = j.at("iterations").get<long>();
    r.relative_residual = j.at("relative_residual").get<double>();
    r.normal_residual = j.at("normal_residual").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.tolerance = j.at("tolerance").get<double>();
    return r;
}

nlohmann::json load_json(const std::string& path, const char* what) {
    std::ifstream f(path);
    if (!f) {
        throw IoError(std::string(what) + " not found: " + path);
    }
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

}  // namespace

MessageSet load_messages(const MessageSpec& spec, int listeners, double rate) {
    if (spec.files.empty()) {
        throw ConfigError("messages: no files configured");
    }
    std::vector<Signal> msgs;
    msgs.reserve(static_cast<std::size_t>(listeners));
    for (int k = 0; k < listeners; ++k) {
        const std::string& path = spec.files[static_cast<std::size_t>(k) % spec.files.size()];
        Signal s = read_wav_mono(path);
        if (s.sample_rate_hz != rate) {
            s = resample(s, rate);
        }
        s.samples.resize(static_cast<std::size_t>(spec.message_len), 0.0);
        msgs.push_back(std::move(s));
    }
    return MessageSet::make(std::move(msgs));
}

SceneBundle build_scene_with_absorption(const ScenarioConfig& cfg, std::uint64_t trial_seed,
                                        double absorption, int workers) {
    if (!cfg.room.present) {
        throw ConfigError("this scenario requires a [room] section");
    }
    SceneBundle b;
    b.room = room_from_spec(cfg.room, absorption);
    b.has_room = true;
    b.placement = place_points(b.room, cfg.placement, trial_seed);
    b.channels = ChannelSet::make(
        simulate_set(b.room, b.placement.speakers, b.placement.listeners, workers),
        cfg.messages.message_len);
    b.extra_rirs = simulate_set(b.room, b.placement.speakers, b.placement.extras, workers);
    b.messages = load_messages(cfg.messages, b.channels.dims.listeners, b.room.sample_rate_hz);
    return b;
}

SceneBundle build_scene(const ScenarioConfig& cfg, std::uint64_t trial_seed, int workers) {
    return build_scene_with_absorption(cfg, trial_seed, cfg.room.absorption, workers);
}

DesignOutput run_design(const std::string& method, const ChannelSet& channels,
                        const MessageSet& msgs, const DesignSpec& spec, std::uint64_t seed) {
    const SolveOptions opts{spec.tolerance, spec.max_iter};
    DesignOutput out;
    out.method = method;
    out.seed = seed;
    out.noise_std = spec.noise_std;
    if (method == "mccs") {
        long noise_len = std::lround(spec.noise_len_ratio *
                                     static_cast<double>(channels.dims.drive_len));
        noise_len = std::clamp(noise_len, 1L, channels.dims.drive_len);
        MccsDesign d = design_mccs(channels, msgs, noise_len, spec.noise_std, seed, opts);
        out.drive = std::move(d.drive);
        out.latencies = std::move(d.latencies);
        out.window_lens = std::move(d.window_lens);
        out.report = d.report;
        out.projection_report.converged = true;  // no second solve to wait on
    } else if (method == "nullspace") {
        const SolveOptions proj{spec.projection_tolerance, spec.projection_max_iter};
        NullspaceDesign d = design_nullspace(channels, msgs, spec.noise_std, seed, opts, proj);
        out.drive = std::move(d.drive);
        out.latencies = std::move(d.latencies);
        out.window_lens = std::move(d.window_lens);
        out.report = d.carrier_report;
        out.projection_report = d.projection_report;
    } else {
        throw ConfigError("unknown design method: " + method);
    }
    if (spec.target_power > 0.0) {
        auto [scaled, factor] = normalize_power(out.drive, spec.target_power);
        out.drive = std::move(scaled);
        out.scale = factor;
    }
    return out;
}

ListenerScore score_listener(const DesignOutput& d, const MessageSet& msgs,
                             const Signal& rendered, int k) {
    const long start = d.latencies[static_cast<std::size_t>(k)];
    const long wlen = d.window_lens[static_cast<std::size_t>(k)];
    Signal ref = segment(msgs.messages[static_cast<std::size_t>(k)], 0, wlen);
    for (double& v : ref.samples) {
        v *= d.scale;
    }
    const Signal got = segment(rendered, start, wlen);
    ListenerScore s;
    s.stoi = stoi(ref, got);
    s.rel_err = relative_error(ref, got);
    s.rel_err_optscale = relative_error_optscale(ref, got);
    s.snr_db = snr_db(ref, got);
    s.lag = align_lag(ref, got);
    return s;
}

double score_offspot(const DesignOutput& d, const MessageSet& msgs, const Signal& rendered) {
    double best = 0.0;
    for (int k = 0; k < msgs.listeners(); ++k) {
        const long start = d.latencies[static_cast<std::size_t>(k)];
        const long wlen = d.window_lens[static_cast<std::size_t>(k)];
        const Signal ref = segment(msgs.messages[static_cast<std::size_t>(k)], 0, wlen);
        const Signal got = segment(rendered, start, wlen);
        best = std::max(best, stoi(ref, got));
    }
    return best;
}

ResultTable run_reconstruction_demo(const ScenarioConfig& cfg) {
    cfg.validate();
    const std::string hash = cfg.config_hash();
    ResultTable table;
    struct Variant {
        const char* name;
        double absorption;
    };
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed_t = cfg.seed + static_cast<std::uint64_t>(t);
        const std::array<Variant, 2> variants = {
            {{"reverberant", cfg.room.absorption}, {"anechoic", 1.0}}};
        for (const Variant& var : variants) {
            const SceneBundle scene =
                build_scene_with_absorption(cfg, seed_t, var.absorption, cfg.workers);
            for (const std::string& method : cfg.method_list()) {
                DesignOutput d;
                try {
                    d = run_design(method, scene.channels, scene.messages, cfg.design, seed_t);
                } catch (const InfeasibleError&) {
                    ResultRow row = base_row(cfg, hash, seed_t);
                    row.variant = var.name;
                    row.method = method;
                    row.label = "infeasible";
                    table.rows.push_back(std::move(row));
                    continue;
                }
                for (int k = 0; k < scene.channels.dims.listeners; ++k) {
                    ResultRow row = listener_row(cfg, hash, scene, d, k, seed_t);
                    row.variant = var.name;
                    table.rows.push_back(std::move(row));
                }
                for (std::size_t e = 0; e < scene.extra_rirs.size(); ++e) {
                    ResultRow row = offspot_row(cfg, hash, scene, d, e,
                                                "extra" + std::to_string(e), seed_t);
                    row.variant = var.name;
                    table.rows.push_back(std::move(row));
                }
            }
        }
    }
    return table;
}

ResultTable run_heatmap(const ScenarioConfig& cfg) {
    cfg.validate();
    const std::string hash = cfg.config_hash();
    const int nx = cfg.full_scale ? cfg.grid.full_nx : cfg.grid.nx;
    const int ny = cfg.full_scale ? cfg.grid.full_ny : cfg.grid.ny;
    if (nx < 1 || ny < 1) {
        throw ConfigError("heatmap: grid must have at least one cell per axis");
    }
    const RoomScene room = room_from_spec(cfg.room, cfg.room.absorption);
    const double margin = cfg.grid.margin;
    const double cw = (room.width - 2.0 * margin) / nx;
    const double ch = (room.height - 2.0 * margin) / ny;
    if (cw <= 0.0 || ch <= 0.0) {
        throw ConfigError("heatmap: grid margin leaves no area inside the room");
    }
    auto cell_of = [&](const Point& p) {
        const int ix = std::clamp(static_cast<int>(std::floor((p.x - margin) / cw)), 0, nx - 1);
        const int iy = std::clamp(static_cast<int>(std::floor((p.y - margin) / ch)), 0, ny - 1);
        return std::pair<int, int>{ix, iy};
    };
    auto center_of = [&](std::pair<int, int> c) {
        return Point{margin + (c.first + 0.5) * cw, margin + (c.second + 0.5) * ch};
    };

    // Listeners are snapped onto cell centers so their cells carry their true
    // scores; a rare snap collision (shared cell, or a speaker's cell) moves
    // to the next deterministic placement.
    Placement pl;
    std::set<std::pair<int, int>> speaker_cells;
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
        pl = place_points(room, cfg.placement, cfg.seed + 7919ULL * attempt);
        speaker_cells.clear();
        for (const Point& p : pl.speakers) {
            speaker_cells.insert(cell_of(p));
        }
        std::set<std::pair<int, int>> used;
        placed = true;
        for (Point& lp : pl.listeners) {
            const auto c = cell_of(lp);
            if (used.count(c) != 0 || speaker_cells.count(c) != 0) {
                placed = false;
                break;
            }
            used.insert(c);
            lp = center_of(c);
        }
    }
    if (!placed) {
        throw ConfigError("heatmap: could not settle listeners on distinct grid cells");
    }

    SceneBundle scene;
    scene.room = room;
    scene.has_room = true;
    scene.placement = pl;
    scene.channels = ChannelSet::make(simulate_set(room, pl.speakers, pl.listeners, cfg.workers),
                                      cfg.messages.message_len);
    scene.extra_rirs = simulate_set(room, pl.speakers, pl.extras, cfg.workers);
    scene.messages =
        load_messages(cfg.messages, scene.channels.dims.listeners, room.sample_rate_hz);

    const std::vector<std::string> methods = cfg.method_list();
    std::vector<DesignOutput> designs;
    designs.reserve(methods.size());
    for (const std::string& m : methods) {
        designs.push_back(run_design(m, scene.channels, scene.messages, cfg.design, cfg.seed));
    }

    std::vector<std::pair<int, int>> cells;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            if (speaker_cells.count({ix, iy}) == 0) {
                cells.emplace_back(ix, iy);
            }
        }
    }
    std::vector<std::vector<double>> scores(methods.size(),
                                            std::vector<double>(cells.size(), 0.0));
    const long n_speakers = static_cast<long>(pl.speakers.size());
    parallel_for(static_cast<long>(cells.size()), cfg.workers, [&](long ci) {
        const Point p = center_of(cells[static_cast<std::size_t>(ci)]);
        std::vector<Signal> rirs(static_cast<std::size_t>(n_speakers));
        for (long i = 0; i < n_speakers; ++i) {
            rirs[static_cast<std::size_t>(i)] =
                simulate_rir(room, pl.speakers[static_cast<std::size_t>(i)], p);
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const Signal rendered =
                render_at(designs[mi].drive, rirs, scene.channels.dims.message_len);
            scores[mi][static_cast<std::size_t>(ci)] =
                score_offspot(designs[mi], scene.messages, rendered);
        }
    });

    ResultTable table;
    {
        ResultRow row = base_row(cfg, hash, cfg.seed);
        row.label = "room";
        row.x_m = room.width;
        row.y_m = room.height;
        table.rows.push_back(std::move(row));
    }
    for (const Point& p : pl.speakers) {
        ResultRow row = base_row(cfg, hash, cfg.seed);
        row.label = "speaker";
        row.x_m = p.x;
        row.y_m = p.y;
        table.rows.push_back(std::move(row));
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        for (int k = 0; k < scene.channels.dims.listeners; ++k) {
            table.rows.push_back(listener_row(cfg, hash, scene, designs[mi], k, cfg.seed));
        }
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const Point p = center_of(cells[ci]);
            ResultRow row = base_row(cfg, hash, cfg.seed);
            row.method = methods[mi];
            row.label = "grid";
            row.x_m = p.x;
            row.y_m = p.y;
            row.stoi = scores[mi][ci];
            fill_solver(row, designs[mi]);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

ResultTable run_noise_variance_sweep(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.sweep.noise_stds.empty()) {
        throw ConfigError("variance sweep: [sweep] noise_stds must be non-empty");
    }
    const std::string hash = cfg.config_hash();
    ResultTable table;
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed_t = cfg.seed + static_cast<std::uint64_t>(t);
        const SceneBundle scene = build_scene(cfg, seed_t, cfg.workers);
        if (scene.extra_rirs.empty()) {
            throw ConfigError("variance sweep: needs at least one extra point");
        }
        for (const std::string& method : cfg.method_list()) {
            if (method == "mccs") {
                for (double std_v : cfg.sweep.noise_stds) {
                    DesignSpec ds = cfg.design;
                    ds.noise_std = std_v;
                    const DesignOutput d =
                        run_design("mccs", scene.channels, scene.messages, ds, seed_t);
                    for (int k = 0; k < scene.channels.dims.listeners; ++k) {
                        ResultRow row = listener_row(cfg, hash, scene, d, k, seed_t);
                        row.sweep_name = "noise_std";
                        row.sweep_value = std_v;
                        table.rows.push_back(std::move(row));
                    }
                    ResultRow row = offspot_row(cfg, hash, scene, d, 0, "offspot", seed_t);
                    row.sweep_name = "noise_std";
                    row.sweep_value = std_v;
                    table.rows.push_back(std::move(row));
                }
            } else {
                // One unit-scale design serves every std: the jam is linear in
                // it, and swept values are multiples of the carrier's RMS.
                const SolveOptions opts{cfg.design.tolerance, cfg.design.max_iter};
                const SolveOptions proj{cfg.design.projection_tolerance,
                                        cfg.design.projection_max_iter};
                const NullspaceDesign base = design_nullspace(scene.channels, scene.messages,
                                                              1.0, seed_t, opts, proj);
                double sum = 0.0;
                long n = 0;
                for (const Signal& s : base.carrier) {
                    for (double v : s.samples) {
                        sum += v * v;
                    }
                    n += s.size();
                }
                const double carrier_rms = std::sqrt(sum / static_cast<double>(n));
                for (double mult : cfg.sweep.noise_stds) {
                    DesignOutput d;
                    d.method = "nullspace";
                    d.seed = seed_t;
                    d.noise_std = mult * carrier_rms;
                    d.latencies = base.latencies;
                    d.window_lens = base.window_lens;
                    d.report = base.carrier_report;
                    d.projection_report = base.projection_report;
                    d.drive.reserve(base.carrier.size());
                    for (std::size_t i = 0; i < base.carrier.size(); ++i) {
                        Signal x = base.carrier[i];
                        for (long j = 0; j < x.size(); ++j) {
                            x.samples[static_cast<std::size_t>(j)] +=
                                mult * carrier_rms *
                                base.jam[i].samples[static_cast<std::size_t>(j)];
                        }
                        d.drive.push_back(std::move(x));
                    }
                    if (cfg.design.target_power > 0.0) {
                        auto [scaled, factor] = normalize_power(d.drive, cfg.design.target_power);
                        d.drive = std::move(scaled);
                        d.scale = factor;
                    }
                    for (int k = 0; k < scene.channels.dims.listeners; ++k) {
                        ResultRow row = listener_row(cfg, hash, scene, d, k, seed_t);
                        row.sweep_name = "noise_std";
                        row.sweep_value = mult;
                        table.rows.push_back(std::move(row));
                    }
                    ResultRow row = offspot_row(cfg, hash, scene, d, 0, "offspot", seed_t);
                    row.sweep_name = "noise_std";
                    row.sweep_value = mult;
                    table.rows.push_back(std::move(row));
                }
            }
        }
    }
    return table;
}

ResultTable run_noise_length_sweep(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.sweep.noise_len_ratios.empty()) {
        throw ConfigError("length sweep: [sweep] noise_len_ratios must be non-empty");
    }
    const std::string hash = cfg.config_hash();
    ResultTable table;
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed_t = cfg.seed + static_cast<std::uint64_t>(t);
        const SceneBundle scene = build_scene(cfg, seed_t, cfg.workers);
        if (scene.extra_rirs.empty()) {
            throw ConfigError("length sweep: needs at least one extra point");
        }
        for (double ratio : cfg.sweep.noise_len_ratios) {
            DesignSpec ds = cfg.design;
            ds.noise_len_ratio = ratio;
            DesignOutput d;
            try {
                d = run_design("mccs", scene.channels, scene.messages, ds, seed_t);
            } catch (const InfeasibleError&) {
                // The ratio leaves too few filter samples to pin every
                // message sample; report the exclusion instead of a score.
                ResultRow row = base_row(cfg, hash, seed_t);
                row.method = "mccs";
                row.label = "excluded_infeasible";
                row.sweep_name = "noise_len_ratio";
                row.sweep_value = ratio;
                table.rows.push_back(std::move(row));
                continue;
            }
            for (int k = 0; k < scene.channels.dims.listeners; ++k) {
                ResultRow row = listener_row(cfg, hash, scene, d, k, seed_t);
                row.sweep_name = "noise_len_ratio";
                row.sweep_value = ratio;
                table.rows.push_back(std::move(row));
            }
            ResultRow row = offspot_row(cfg, hash, scene, d, 0, "offspot", seed_t);
            row.sweep_name = "noise_len_ratio";
            row.sweep_value = ratio;
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

ResultTable run_robustness(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.sweep.dropout_counts.empty() && cfg.sweep.rir_snr_db.empty()) {
        throw ConfigError("robustness: [sweep] needs dropout_counts and/or rir_snr_db");
    }
    const std::string hash = cfg.config_hash();
    ResultTable table;
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed_t = cfg.seed + static_cast<std::uint64_t>(t);
        const SceneBundle scene = build_scene(cfg, seed_t, cfg.workers);
        const int L = scene.channels.dims.speakers;
        for (int c : cfg.sweep.dropout_counts) {
            if (c < 0 || c >= L) {
                throw ConfigError("robustness: dropout count " + std::to_string(c) +
                                  " must lie in [0, speakers)");
            }
        }
        for (const std::string& method : cfg.method_list()) {
            if (!cfg.sweep.dropout_counts.empty()) {
                const DesignOutput d =
                    run_design(method, scene.channels, scene.messages, cfg.design, seed_t);
                const std::vector<int> order = shuffled_speakers(L, seed_t);
                for (int c : cfg.sweep.dropout_counts) {
                    DesignOutput dc = d;  // same design; c speakers fall silent
                    dc.drive = apply_dropout(
                        d.drive, std::vector<int>(order.begin() + c, order.end()));
                    for (int k = 0; k < scene.channels.dims.listeners; ++k) {
                        ResultRow row = listener_row(cfg, hash, scene, dc, k, seed_t);
                        row.variant = "dropout";
                        row.sweep_name = "dropout_count";
                        row.sweep_value = c;
                        table.rows.push_back(std::move(row));
                    }
                }
            }
            for (double snr : cfg.sweep.rir_snr_db) {
                // Design against a corrupted channel estimate, listen through
                // the true room.
                const ChannelSet perturbed = perturb_channels(scene.channels, snr, seed_t);
                const DesignOutput d =
                    run_design(method, perturbed, scene.messages, cfg.design, seed_t);
                for (int k = 0; k < scene.channels.dims.listeners; ++k) {
                    ResultRow row = listener_row(cfg, hash, scene, d, k, seed_t);
                    row.variant = "rir_snr";
                    row.sweep_name = "rir_snr_db";
                    row.sweep_value = snr;
                    table.rows.push_back(std::move(row));
                }
            }
        }
    }
    return table;
}

SceneBundle build_measured_scene(const ScenarioConfig& cfg) {
    if (!cfg.measured.present) {
        throw ConfigError("this scenario requires a [measured] section");
    }
    const std::string dir =
        cfg.measured.rir_dir.empty() ? cfg.measured.sweep_dir : cfg.measured.rir_dir;
    const RirSet set = import_rir_set(dir, cfg.measured.rir_len, cfg.measured.reference_sweep);

    SceneBundle b;
    b.placement.speakers = set.speakers;
    std::vector<std::vector<Signal>> listener_rirs;
    for (std::size_t j = 0; j < set.points.size(); ++j) {
        if (set.roles[j] == "listener") {
            listener_rirs.push_back(set.rirs[j]);
            b.placement.listeners.push_back(set.points[j]);
        } else {
            b.extra_rirs.push_back(set.rirs[j]);
            b.placement.extras.push_back(set.points[j]);
        }
    }
    if (listener_rirs.empty()) {
        throw ConfigError("measured set has no points with role \"listener\"");
    }
    b.channels = ChannelSet::make(std::move(listener_rirs), cfg.messages.message_len);
    b.messages = load_messages(cfg.messages, b.channels.dims.listeners, set.sample_rate_hz);
    return b;
}

ResultTable run_measured(const ScenarioConfig& cfg) {
    cfg.validate();
    const std::string hash = cfg.config_hash();
    const SceneBundle scene = build_measured_scene(cfg);

    auto spot_distance = [&](const Point& p) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& lp : scene.placement.listeners) {
            best = std::min(best, std::hypot(p.x - lp.x, p.y - lp.y));
        }
        return best;
    };

    ResultTable table;
    for (const std::string& method : cfg.method_list()) {
        const DesignOutput d =
            run_design(method, scene.channels, scene.messages, cfg.design, cfg.seed);
        for (int k = 0; k < scene.channels.dims.listeners; ++k) {
            ResultRow row = listener_row(cfg, hash, scene, d, k, cfg.seed);
            row.sweep_name = "distance_m";
            row.sweep_value =
                spot_distance(scene.placement.listeners[static_cast<std::size_t>(k)]);
            table.rows.push_back(std::move(row));
        }
        for (std::size_t e = 0; e < scene.extra_rirs.size(); ++e) {
            ResultRow row =
                offspot_row(cfg, hash, scene, d, e, "mic" + std::to_string(e), cfg.seed);
            row.sweep_name = "distance_m";
            row.sweep_value = spot_distance(scene.placement.extras[e]);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

void export_rir_set(const ScenarioConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (!cfg.room.present) {
        throw ConfigError("rir export requires a [room] section");
    }
    const RoomScene room = room_from_spec(cfg.room, cfg.room.absorption);
    const Placement pl = place_points(room, cfg.placement, cfg.seed);
    std::filesystem::create_directories(out_dir);

    std::vector<Point> points = pl.listeners;
    std::vector<std::string> roles(pl.listeners.size(), "listener");
    points.insert(points.end(), pl.extras.begin(), pl.extras.end());
    roles.insert(roles.end(), pl.extras.size(), "mic");

    nlohmann::json j;
    j["kind"] = "rir";
    j["sample_rate_hz"] = room.sample_rate_hz;
    j["rir_len"] = room.rir_len;
    for (const Point& p : pl.speakers) {
        j["speakers"].push_back({p.x, p.y});
    }
    for (std::size_t idx = 0; idx < points.size(); ++idx) {
        const std::string file = "point_" + std::to_string(idx) + ".wav";
        WavData wd;
        wd.sample_rate_hz = room.sample_rate_hz;
        for (const Point& spk : pl.speakers) {
            wd.channels.push_back(simulate_rir(room, spk, points[idx]).samples);
        }
        write_wav(out_dir + "/" + file, wd, WavFormat::Float64);
        j["points"].push_back({{"file", file},
                               {"role", roles[idx]},
                               {"x", points[idx].x},
                               {"y", points[idx].y}});
    }
    std::ofstream f(out_dir + "/rirs.json", std::ios::binary);
    if (!f) {
        throw IoError("cannot write " + out_dir + "/rirs.json");
    }
    f << j.dump(2) << '\n';
}

RirSet import_rir_set(const std::string& dir, long rir_len,
                      const std::string& fallback_reference) {
    const nlohmann::json j = load_json(dir + "/rirs.json", "measured-set manifest");
    RirSet set;
    set.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    const std::string kind = j.value("kind", "rir");
    if (kind != "rir" && kind != "sweep") {
        throw IoError(dir + "/rirs.json: kind must be \"rir\" or \"sweep\"");
    }
    if (j.contains("speakers")) {
        for (const auto& sp : j.at("speakers")) {
            set.speakers.push_back({sp.at(0).get<double>(), sp.at(1).get<double>()});
        }
    }
    Signal sweep;
    if (kind == "sweep") {
        std::string ref = j.value("reference_sweep", fallback_reference);
        if (ref.empty()) {
            throw IoError(dir + ": sweep set needs a reference_sweep file");
        }
        if (ref.find('/') == std::string::npos) {
            ref = dir + "/" + ref;
        }
        sweep = read_wav_mono(ref);
    }
    if (!j.contains("points") || j.at("points").empty()) {
        throw IoError(dir + "/rirs.json: no measurement points listed");
    }
    std::size_t expected_channels = 0;
    for (const auto& entry : j.at("points")) {
        const std::string file = entry.at("file").get<std::string>();
        const std::string role = entry.value("role", "mic");
        if (role != "listener" && role != "mic") {
            throw IoError(file + ": role must be \"listener\" or \"mic\"");
        }
        if (!entry.contains("x") || !entry.contains("y")) {
            throw IoError(file + ": point needs x and y coordinates");
        }
        const WavData wd = read_wav(dir + "/" + file);
        if (wd.sample_rate_hz != set.sample_rate_hz) {
            throw IoError(file + ": sample rate differs from the manifest");
        }
        if (expected_channels == 0) {
            expected_channels = wd.channels.size();
        } else if (wd.channels.size() != expected_channels) {
            throw IoError(file + ": speaker channel count differs from earlier files");
        }
        std::vector<Signal> rirs;
        for (const std::vector<double>& chan : wd.channels) {
            Signal raw(chan, set.sample_rate_hz);
            if (kind == "rir") {
                if (raw.size() < rir_len) {
                    throw IoError(file + ": impulse response shorter than rir_len (" +
                                  std::to_string(raw.size()) + " < " +
                                  std::to_string(rir_len) + ")");
                }
                raw.samples.resize(static_cast<std::size_t>(rir_len));
                rirs.push_back(std::move(raw));
            } else {
                rirs.push_back(deconvolve_rir(raw, sweep, rir_len).rir);
            }
        }
        set.rirs.push_back(std::move(rirs));
        set.points.push_back({entry.at("x").get<double>(), entry.at("y").get<double>()});
        set.roles.push_back(role);
    }
    return set;
}

void export_design(const std::string& dir, const DesignOutput& d,
                   const std::string& config_hash, double sample_rate_hz) {
    std::filesystem::create_directories(dir);
    WavData wd;
    wd.sample_rate_hz = sample_rate_hz;
    for (const Signal& s : d.drive) {
        wd.channels.push_back(s.samples);
    }
    write_wav(dir + "/drive.wav", wd, WavFormat::Float64);

    nlohmann::json j;
    j["method"] = d.method;
    j["seed"] = d.seed;
    j["noise_std"] = d.noise_std;
    j["scale"] = d.scale;
    j["latencies"] = d.latencies;
    j["window_lens"] = d.window_lens;
    j["config_hash"] = config_hash;
    json_report(j, "report", d.report);
    json_report(j, "projection_report", d.projection_report);
    std::ofstream f(dir + "/design.json", std::ios::binary);
    if (!f) {
        throw IoError("cannot write " + dir + "/design.json");
    }
    f << j.dump(2) << '\n';
}

DesignOutput import_design(const std::string& dir) {
    const nlohmann::json j = load_json(dir + "/design.json", "design description");
    DesignOutput d;
    d.method = j.at("method").get<std::string>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.noise_std = j.at("noise_std").get<double>();
    d.scale = j.at("scale").get<double>();
    d.latencies = j.at("latencies").get<std::vector<long>>();
    d.window_lens = j.at("window_lens").get<std::vector<long>>();
    d.report = report_from_json(j.at("report"));
    d.projection_report = report_from_json(j.at("projection_report"));
    const WavData wd = read_wav(dir + "/drive.wav");
    for (const std::vector<double>& chan : wd.channels) {
        d.drive.emplace_back(chan, wd.sample_rate_hz);
    }
    return d;
}

}  // namespace privaudio
