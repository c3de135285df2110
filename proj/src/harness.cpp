#include "privaudio/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "privaudio/errors.hpp"
#include "privaudio/philox.hpp"

namespace privaudio {

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t basis) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = basis;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t basis) {
    return fnv1a64(s.data(), s.size(), basis);
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void parallel_for(long count, int workers, const std::function<void(long)>& body) {
    if (count <= 0) {
        return;
    }
    const int n_threads = static_cast<int>(std::min<long>(std::max(workers, 1), count));
    if (n_threads == 1) {
        for (long i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mtx;
    auto worker = [&]() {
        while (true) {
            const long i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mtx);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                next.store(count);  // drain remaining work
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

void append_double(std::string& s, const char* key, double v) {
    s += key;
    s += '=';
    s += fmt_double(v);
    s += ';';
}

void append_points(std::string& s, const char* key, const std::vector<Point>& pts) {
    s += key;
    s += '=';
    for (const Point& p : pts) {
        s += fmt_double(p.x);
        s += ',';
        s += fmt_double(p.y);
        s += '|';
    }
    s += ';';
}

std::vector<Point> parse_point_list(const TomlTable& t, const std::string& key) {
    std::vector<Point> out;
    if (!t.has(key)) {
        return out;
    }
    for (const TomlValue& entry : t.at(key).as_array(key)) {
        const auto& pair = entry.as_array(key);
        if (pair.size() != 2) {
            throw ConfigError("config: '" + key + "' entries must be [x, y] pairs");
        }
        out.push_back({pair[0].as_double(key), pair[1].as_double(key)});
    }
    return out;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_toml(const TomlDoc& doc) {
    ScenarioConfig cfg;
    cfg.scenario = doc.root.get_string("scenario", cfg.scenario);
    cfg.method = doc.root.get_string("method", cfg.method);
    cfg.seed = static_cast<std::uint64_t>(doc.root.get_int("seed", 1));
    cfg.trials = static_cast<int>(doc.root.get_int("trials", cfg.trials));

    if (doc.has_table("room")) {
        const TomlTable& t = doc.table("room");
        cfg.room.present = true;
        cfg.room.width = t.get_double("width", cfg.room.width);
        cfg.room.height = t.get_double("height", cfg.room.height);
        cfg.room.absorption = t.get_double("absorption", cfg.room.absorption);
        cfg.room.sample_rate_hz = t.get_double("sample_rate_hz", cfg.room.sample_rate_hz);
        cfg.room.speed_of_sound = t.get_double("speed_of_sound", cfg.room.speed_of_sound);
        cfg.room.rir_len = t.get_int("rir_len", cfg.room.rir_len);
        cfg.room.max_order = static_cast<int>(t.get_int("max_order", cfg.room.max_order));
    }
    if (doc.has_table("measured")) {
        const TomlTable& t = doc.table("measured");
        cfg.measured.present = true;
        cfg.measured.rir_dir = t.get_string("rir_dir", "");
        cfg.measured.sweep_dir = t.get_string("sweep_dir", "");
        cfg.measured.reference_sweep = t.get_string("reference_sweep", "");
        cfg.measured.rir_len = t.get_int("rir_len", cfg.measured.rir_len);
    }
    {
        const TomlTable& t = doc.table("placement");
        cfg.placement.speakers = parse_point_list(t, "speakers");
        cfg.placement.listeners = parse_point_list(t, "listeners");
        cfg.placement.extra_points = parse_point_list(t, "extra_points");
        cfg.placement.speaker_count =
            static_cast<int>(t.get_int("speaker_count", cfg.placement.speaker_count));
        cfg.placement.listener_count =
            static_cast<int>(t.get_int("listener_count", cfg.placement.listener_count));
        cfg.placement.extra_count =
            static_cast<int>(t.get_int("extra_count", cfg.placement.extra_count));
        cfg.placement.margin = t.get_double("margin", cfg.placement.margin);
        cfg.placement.min_separation =
            t.get_double("min_separation", cfg.placement.min_separation);
    }
    {
        const TomlTable& t = doc.table("messages");
        cfg.messages.files = t.get_strings("files");
        cfg.messages.message_len = t.get_int("message_len", cfg.messages.message_len);
    }
    {
        const TomlTable& t = doc.table("design");
        cfg.design.noise_std = t.get_double("noise_std", cfg.design.noise_std);
        cfg.design.noise_len_ratio = t.get_double("noise_len_ratio", cfg.design.noise_len_ratio);
        cfg.design.tolerance = t.get_double("tolerance", cfg.design.tolerance);
        cfg.design.max_iter = t.get_int("max_iter", cfg.design.max_iter);
        cfg.design.projection_tolerance =
            t.get_double("projection_tolerance", cfg.design.projection_tolerance);
        cfg.design.projection_max_iter =
            t.get_int("projection_max_iter", cfg.design.projection_max_iter);
        cfg.design.target_power = t.get_double("target_power", cfg.design.target_power);
    }
    {
        const TomlTable& t = doc.table("grid");
        cfg.grid.nx = static_cast<int>(t.get_int("nx", cfg.grid.nx));
        cfg.grid.ny = static_cast<int>(t.get_int("ny", cfg.grid.ny));
        cfg.grid.margin = t.get_double("margin", cfg.grid.margin);
        cfg.grid.full_nx = static_cast<int>(t.get_int("full_nx", cfg.grid.full_nx));
        cfg.grid.full_ny = static_cast<int>(t.get_int("full_ny", cfg.grid.full_ny));
    }
    {
        const TomlTable& t = doc.table("sweep");
        cfg.sweep.noise_stds = t.get_doubles("noise_stds");
        cfg.sweep.noise_len_ratios = t.get_doubles("noise_len_ratios");
        for (long long c : t.get_ints("dropout_counts")) {
            cfg.sweep.dropout_counts.push_back(static_cast<int>(c));
        }
        cfg.sweep.rir_snr_db = t.get_doubles("rir_snr_db");
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    return from_toml(parse_toml_file(path));
}

std::vector<std::string> ScenarioConfig::method_list() const {
    if (method == "both") {
        return {"mccs", "nullspace"};
    }
    if (method == "mccs" || method == "nullspace") {
        return {method};
    }
    throw ConfigError("config: method must be mccs, nullspace, or both (got '" + method + "')");
}

std::string ScenarioConfig::canonical_description() const {
    std::string s;
    s.reserve(512);
    s += "scenario=" + scenario + ";method=" + method + ";";
    s += "seed=" + std::to_string(seed) + ";trials=" + std::to_string(trials) + ";";
    if (room.present) {
        s += "room:";
        append_double(s, "w", room.width);
        append_double(s, "h", room.height);
        append_double(s, "a", room.absorption);
        append_double(s, "fs", room.sample_rate_hz);
        append_double(s, "c", room.speed_of_sound);
        s += "rir=" + std::to_string(room.rir_len) + ";";
        s += "order=" + std::to_string(room.max_order) + ";";
    }
    if (measured.present) {
        s += "measured:" + measured.rir_dir + "," + measured.sweep_dir + "," +
             measured.reference_sweep + "," + std::to_string(measured.rir_len) + ";";
    }
    s += "place:";
    append_points(s, "spk", placement.speakers);
    append_points(s, "lst", placement.listeners);
    append_points(s, "ext", placement.extra_points);
    s += "counts=" + std::to_string(placement.speaker_count) + "," +
         std::to_string(placement.listener_count) + "," +
         std::to_string(placement.extra_count) + ";";
    append_double(s, "margin", placement.margin);
    append_double(s, "sep", placement.min_separation);
    s += "msgs:";
    for (const std::string& f : messages.files) {
        s += f + "|";
    }
    s += "len=" + std::to_string(messages.message_len) + ";";
    s += "design:";
    append_double(s, "std", design.noise_std);
    append_double(s, "ratio", design.noise_len_ratio);
    append_double(s, "tol", design.tolerance);
    s += "iter=" + std::to_string(design.max_iter) + ";";
    append_double(s, "ptol", design.projection_tolerance);
    s += "piter=" + std::to_string(design.projection_max_iter) + ";";
    append_double(s, "power", design.target_power);
    s += "grid:" + std::to_string(grid.nx) + "," + std::to_string(grid.ny) + ",";
    s += fmt_double(grid.margin) + "," + std::to_string(grid.full_nx) + "," +
         std::to_string(grid.full_ny) + ";";
    s += "sweep:stds=";
    for (double v : sweep.noise_stds) {
        s += fmt_double(v) + "|";
    }
    s += ";ratios=";
    for (double v : sweep.noise_len_ratios) {
        s += fmt_double(v) + "|";
    }
    s += ";drops=";
    for (int v : sweep.dropout_counts) {
        s += std::to_string(v) + "|";
    }
    s += ";snrs=";
    for (double v : sweep.rir_snr_db) {
        s += fmt_double(v) + "|";
    }
    s += ";full_scale=" + std::string(full_scale ? "1" : "0") + ";";
    return s;
}

std::string ScenarioConfig::config_hash() const {
    return hash_hex(fnv1a64(canonical_description()));
}

void ScenarioConfig::validate() const {
    if (room.present == measured.present) {
        throw ConfigError(
            "config: exactly one of [room] and [measured] must be present");
    }
    if (room.present) {
        if (room.width <= 0.0 || room.height <= 0.0) {
            throw ConfigError("config: room dimensions must be positive");
        }
        if (room.absorption < 0.0 || room.absorption > 1.0) {
            throw ConfigError("config: absorption must lie in [0, 1]");
        }
        if (room.sample_rate_hz <= 0.0 || room.rir_len < 1) {
            throw ConfigError("config: room sample rate and rir_len must be positive");
        }
    }
    if (measured.present && measured.rir_dir.empty() &&
        (measured.sweep_dir.empty() || measured.reference_sweep.empty())) {
        throw ConfigError(
            "config: [measured] needs rir_dir, or sweep_dir plus reference_sweep");
    }
    if (messages.files.empty()) {
        throw ConfigError("config: [messages] files must list at least one WAV");
    }
    for (const std::string& f : messages.files) {
        std::ifstream probe(f);
        if (!probe) {
            throw ConfigError("config: message file not found: " + f);
        }
    }
    if (messages.message_len < 2) {
        throw ConfigError("config: message_len too small");
    }
    if (trials < 1) {
        throw ConfigError("config: trials must be >= 1");
    }
    const int listeners = placement.listeners.empty()
                              ? placement.listener_count
                              : static_cast<int>(placement.listeners.size());
    const int speakers = placement.speakers.empty()
                             ? placement.speaker_count
                             : static_cast<int>(placement.speakers.size());
    if (listeners < 1 || speakers < 1) {
        throw ConfigError("config: need at least one speaker and one listener");
    }
    if (design.tolerance <= 0.0 || design.max_iter < 1) {
        throw ConfigError("config: solver tolerance and max_iter must be positive");
    }
    method_list();  // validates the method string
}

ResultRow::ResultRow()
    : x_m(kNan),
      y_m(kNan),
      sweep_value(kNan),
      stoi(kNan),
      relative_error(kNan),
      relative_error_optscale(kNan),
      snr_db(kNan),
      solver_relative_residual(kNan),
      solver_tolerance(kNan) {}

const std::string& ResultTable::header() {
    static const std::string h =
        "scenario,variant,method,label,x_m,y_m,sweep_name,sweep_value,stoi,"
        "relative_error,relative_error_optscale,snr_db,align_lag,solver_iterations,"
        "solver_relative_residual,solver_converged,solver_tolerance,seed,config_hash";
    return h;
}

namespace {

void check_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") != std::string::npos) {
        throw InvalidInput("results: text fields may not contain commas, quotes, or newlines");
    }
}

std::string cell(double v) {
    return std::isnan(v) ? std::string() : fmt_double(v);
}

double parse_cell(const std::string& s) {
    if (s.empty()) {
        return kNan;
    }
    return std::strtod(s.c_str(), nullptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void ResultTable::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open for writing: " + path);
    }
    f << header() << '\n';
    for (const ResultRow& r : rows) {
        check_field(r.scenario);
        check_field(r.variant);
        check_field(r.method);
        check_field(r.label);
        check_field(r.sweep_name);
        check_field(r.config_hash);
        f << r.scenario << ',' << r.variant << ',' << r.method << ',' << r.label << ','
          << cell(r.x_m) << ',' << cell(r.y_m) << ',' << r.sweep_name << ','
          << cell(r.sweep_value) << ',' << cell(r.stoi) << ',' << cell(r.relative_error) << ','
          << cell(r.relative_error_optscale) << ',' << cell(r.snr_db) << ','
          << (r.align_lag == kNoLag ? std::string() : std::to_string(r.align_lag)) << ','
          << (r.solver_iterations < 0 ? std::string() : std::to_string(r.solver_iterations))
          << ',' << cell(r.solver_relative_residual) << ','
          << (r.solver_converged < 0 ? std::string() : std::to_string(r.solver_converged))
          << ',' << cell(r.solver_tolerance) << ',' << std::to_string(r.seed) << ','
          << r.config_hash << '\n';
    }
    if (!f) {
        throw IoError("failed while writing: " + path);
    }
}

ResultTable ResultTable::read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open results file: " + path);
    }
    std::string line;
    if (!std::getline(f, line)) {
        throw IoError("empty results file: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != header()) {
        throw IoError("results header mismatch in " + path);
    }
    ResultTable table;
    long line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != 19) {
            throw IoError("results row " + std::to_string(line_no) + " has " +
                          std::to_string(cells.size()) + " cells, expected 19");
        }
        ResultRow r;
        r.scenario = cells[0];
        r.variant = cells[1];
        r.method = cells[2];
        r.label = cells[3];
        r.x_m = parse_cell(cells[4]);
        r.y_m = parse_cell(cells[5]);
        r.sweep_name = cells[6];
        r.sweep_value = parse_cell(cells[7]);
        r.stoi = parse_cell(cells[8]);
        r.relative_error = parse_cell(cells[9]);
        r.relative_error_optscale = parse_cell(cells[10]);
        r.snr_db = parse_cell(cells[11]);
        r.align_lag = cells[12].empty() ? kNoLag : std::strtol(cells[12].c_str(), nullptr, 10);
        r.solver_iterations =
            cells[13].empty() ? -1 : std::strtol(cells[13].c_str(), nullptr, 10);
        r.solver_relative_residual = parse_cell(cells[14]);
        r.solver_converged =
            cells[15].empty() ? -1 : static_cast<int>(std::strtol(cells[15].c_str(), nullptr, 10));
        r.solver_tolerance = parse_cell(cells[16]);
        r.seed = std::strtoull(cells[17].c_str(), nullptr, 10);
        r.config_hash = cells[18];
        table.rows.push_back(std::move(r));
    }
    return table;
}

std::string ResultTable::single_hash() const {
    std::string hash;
    for (const ResultRow& r : rows) {
        if (r.config_hash.empty()) {
            continue;
        }
        if (hash.empty()) {
            hash = r.config_hash;
        } else if (hash != r.config_hash) {
            throw IoError("results mix rows from different config hashes: " + hash + " vs " +
                          r.config_hash);
        }
    }
    if (hash.empty()) {
        throw IoError("results carry no config hash");
    }
    return hash;
}

bool ResultTable::any_nonconverged() const {
    for (const ResultRow& r : rows) {
        if (r.solver_converged == 0) {
            return true;
        }
    }
    return false;
}

double median(std::vector<double> xs) {
    if (xs.empty()) {
        throw InvalidInput("median of an empty sample");
    }
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) {
        return xs[n / 2];
    }
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

Placement place_points(const RoomScene& room, const PlacementSpec& spec, std::uint64_t seed) {
    Placement out;
    const double lo_x = spec.margin;
    const double hi_x = room.width - spec.margin;
    const double lo_y = spec.margin;
    const double hi_y = room.height - spec.margin;
    if (hi_x <= lo_x || hi_y <= lo_y) {
        throw ConfigError("placement: margin leaves no interior");
    }

    std::vector<Point> placed;
    auto admissible = [&](const Point& p) {
        for (const Point& q : placed) {
            const double dx = p.x - q.x;
            const double dy = p.y - q.y;
            if (dx * dx + dy * dy < spec.min_separation * spec.min_separation) {
                return false;
            }
        }
        return true;
    };
    auto take_explicit = [&](const std::vector<Point>& pts, const char* what) {
        for (const Point& p : pts) {
            if (!room.inside(p)) {
                throw ConfigError(std::string("placement: explicit ") + what +
                                  " position lies outside the room");
            }
            placed.push_back(p);
        }
        return pts;
    };

    Philox gen(seed, /*stream=*/0x9e3779b97f4a7c15ULL);
    std::uint64_t draw = 0;
    auto sample = [&](int count, const char* what) {
        std::vector<Point> pts;
        for (int i = 0; i < count; ++i) {
            bool ok = false;
            for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
                Point p{lo_x + (hi_x - lo_x) * gen.uniform(draw++),
                        lo_y + (hi_y - lo_y) * gen.uniform(draw++)};
                if (admissible(p)) {
                    placed.push_back(p);
                    pts.push_back(p);
                    ok = true;
                }
            }
            if (!ok) {
                throw ConfigError(std::string("placement: cannot fit ") + what +
                                  " with the requested separation");
            }
        }
        return pts;
    };

    out.speakers = spec.speakers.empty() ? sample(spec.speaker_count, "speakers")
                                         : take_explicit(spec.speakers, "speaker");
    out.listeners = spec.listeners.empty() ? sample(spec.listener_count, "listeners")
                                           : take_explicit(spec.listeners, "listener");
    out.extras = spec.extra_points.empty() ? sample(spec.extra_count, "extra points")
                                           : take_explicit(spec.extra_points, "extra point");
    return out;
}

void write_manifest(const std::string& dir, const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["scenario"] = cfg.scenario;
    j["method"] = cfg.method;
    j["config_hash"] = cfg.config_hash();
    j["seed"] = cfg.seed;
    j["trials"] = cfg.trials;
    j["full_scale"] = cfg.full_scale;
    j["columns"] = ResultTable::header();
    j["generator"] = "privaudio 1.0";
    std::ofstream f(dir + "/manifest.json", std::ios::binary);
    if (!f) {
        throw IoError("cannot write manifest in " + dir);
    }
    f << j.dump(2) << '\n';
}

}  // namespace privaudio
