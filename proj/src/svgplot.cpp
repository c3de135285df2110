#include "privaudio/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

// 33 evenly spaced anchors of the standard viridis map; linear interpolation
// between them stays within 1/255 of the reference table.
constexpr double kViridis[33][3] = {
    {0.2670, 0.0049, 0.3294}, {0.2770, 0.0503, 0.3757}, {0.2823, 0.0950, 0.4173},
    {0.2829, 0.1359, 0.4534}, {0.2788, 0.1755, 0.4834}, {0.2706, 0.2141, 0.5071},
    {0.2590, 0.2515, 0.5247}, {0.2450, 0.2877, 0.5373}, {0.2297, 0.3224, 0.5457},
    {0.2143, 0.3556, 0.5512}, {0.1994, 0.3876, 0.5546}, {0.1856, 0.4186, 0.5568},
    {0.1727, 0.4488, 0.5579}, {0.1607, 0.4785, 0.5581}, {0.1490, 0.5081, 0.5573},
    {0.1378, 0.5375, 0.5549}, {0.1276, 0.5669, 0.5506}, {0.1206, 0.5964, 0.5436},
    {0.1206, 0.6258, 0.5335}, {0.1323, 0.6550, 0.5197}, {0.1579, 0.6838, 0.5017},
    {0.1966, 0.7118, 0.4792}, {0.2461, 0.7389, 0.4520}, {0.3041, 0.7647, 0.4199},
    {0.3692, 0.7889, 0.3829}, {0.4401, 0.8111, 0.3410}, {0.5160, 0.8312, 0.2943},
    {0.5958, 0.8487, 0.2433}, {0.6785, 0.8637, 0.1895}, {0.7624, 0.8764, 0.1371},
    {0.8456, 0.8873, 0.0997}, {0.9261, 0.8973, 0.1041}, {0.9932, 0.9062, 0.1439}};

const char* kMethodColor(const std::string& method) {
    if (method == "mccs") return "#1f6fb4";
    if (method == "nullspace") return "#d1462f";
    return "#555555";
}

std::string fmt(double v, const char* spec = "%.4g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return std::string(buf);
}

/// Accumulates SVG markup; all drawing helpers append deterministic text.
class SvgCanvas {
  public:
    SvgCanvas(int width, int height) : w_(width), h_(height) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\""
             << h_ << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n"
             << "<rect width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"#ffffff\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none", double stroke_w = 0.0) {
        out_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
             << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"";
        if (stroke != "none") {
            out_ << " stroke=\"" << stroke << "\" stroke-width=\"" << fmt(stroke_w) << "\"";
        }
        out_ << "/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double width = 1.0) {
        out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
             << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color << "\" stroke-width=\""
             << fmt(width) << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double width = 2.0) {
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
             << fmt(width) << "\" points=\"";
        for (const auto& [x, y] : pts) {
            out_ << fmt(x) << "," << fmt(y) << " ";
        }
        out_ << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& stroke = "none", double stroke_w = 0.0) {
        out_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
             << "\" fill=\"" << fill << "\"";
        if (stroke != "none") {
            out_ << " stroke=\"" << stroke << "\" stroke-width=\"" << fmt(stroke_w) << "\"";
        }
        out_ << "/>\n";
    }

    void triangle(double cx, double cy, double r, const std::string& fill,
                  const std::string& stroke) {
        out_ << "<polygon points=\"" << fmt(cx) << "," << fmt(cy - r) << " " << fmt(cx - r)
             << "," << fmt(cy + r * 0.8) << " " << fmt(cx + r) << "," << fmt(cy + r * 0.8)
             << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 13,
              const std::string& anchor = "start", const std::string& color = "#222222") {
        out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y)
             << "\" font-family=\"monospace\" font-size=\"" << size << "\" text-anchor=\""
             << anchor << "\" fill=\"" << color << "\">" << s << "</text>\n";
    }

    void save(const std::string& path) {
        out_ << "</svg>\n";
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            throw IoError("cannot write figure: " + path);
        }
        f << out_.str();
    }

  private:
    int w_;
    int h_;
    std::ostringstream out_;
};

struct Frame {
    double left, right, top, bottom;  // pixel edges of the plotting area
    double x0, x1;                    // data range mapped onto [left, right]
    double y0, y1;
    bool log_x = false;

    double px(double x) const {
        const double t = log_x ? (std::log10(x) - std::log10(x0)) /
                                     (std::log10(x1) - std::log10(x0))
                               : (x - x0) / (x1 - x0);
        return left + t * (right - left);
    }
    double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }
};

void draw_axes(SvgCanvas& svg, const Frame& fr, const std::string& title,
               const std::string& xlabel, const std::string& ylabel,
               const std::vector<double>& xticks) {
    svg.rect(fr.left, fr.top, fr.right - fr.left, fr.bottom - fr.top, "none", "#222222", 1.0);
    svg.text((fr.left + fr.right) / 2.0, fr.top - 16.0, title, 15, "middle");
    svg.text((fr.left + fr.right) / 2.0, fr.bottom + 40.0, xlabel, 13, "middle");
    svg.text(18.0, (fr.top + fr.bottom) / 2.0, ylabel, 13, "middle");

    for (double v = fr.y0; v <= fr.y1 + 1e-9; v += (fr.y1 - fr.y0) / 5.0) {
        const double y = fr.py(v);
        svg.line(fr.left - 4, y, fr.left, y, "#222222", 1.0);
        svg.line(fr.left, y, fr.right, y, "#e0e0e0", 0.6);
        svg.text(fr.left - 8, y + 4, fmt(v, "%.2f"), 11, "end");
    }
    for (double v : xticks) {
        const double x = fr.px(v);
        svg.line(x, fr.bottom, x, fr.bottom + 4, "#222222", 1.0);
        svg.text(x, fr.bottom + 18, fmt(v, "%g"), 11, "middle");
    }
}

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;  // sorted by x
};

void line_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                const std::vector<Series>& series, bool log_x) {
    SvgCanvas svg(760, 480);
    Frame fr{70, 600, 50, 410, 0, 1, 0.0, 1.0, log_x};
    std::set<double> xs;
    for (const Series& s : series) {
        for (const auto& [x, y] : s.points) {
            (void)y;
            xs.insert(x);
        }
    }
    if (xs.empty()) {
        throw InvalidInput("figure '" + title + "' has no data");
    }
    fr.x0 = *xs.begin();
    fr.x1 = *xs.rbegin();
    if (fr.x0 == fr.x1) {
        fr.x0 -= 0.5;
        fr.x1 += 0.5;
        fr.log_x = false;
    }
    draw_axes(svg, fr, title, xlabel, "median STOI", std::vector<double>(xs.begin(), xs.end()));

    double legend_y = 70;
    for (const Series& s : series) {
        const std::string color = kMethodColor(s.name);
        std::vector<std::pair<double, double>> px;
        for (const auto& [x, y] : s.points) {
            px.emplace_back(fr.px(x), fr.py(y));
        }
        svg.polyline(px, color, 2.0);
        for (const auto& [x, y] : px) {
            svg.circle(x, y, 4.0, color);
        }
        svg.line(615, legend_y, 645, legend_y, color, 3.0);
        svg.text(650, legend_y + 4, s.name, 12);
        legend_y += 22;
    }
    svg.save(path);
}

void bar_chart(const std::string& path, const std::string& title,
               const std::vector<std::string>& categories,
               const std::vector<std::string>& series_names,
               const std::map<std::pair<std::string, std::string>, double>& values) {
    SvgCanvas svg(900, 500);
    Frame fr{70, 740, 50, 380, 0, 1, 0.0, 1.0, false};
    draw_axes(svg, fr, title, "", "median STOI", {});

    const double slot = (fr.right - fr.left) / static_cast<double>(categories.size());
    const double bar =
        slot * 0.7 / static_cast<double>(std::max<std::size_t>(series_names.size(), 1));
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const double x0 = fr.left + slot * static_cast<double>(c) + slot * 0.15;
        for (std::size_t s = 0; s < series_names.size(); ++s) {
            auto it = values.find({categories[c], series_names[s]});
            if (it == values.end()) {
                continue;
            }
            const double top = fr.py(it->second);
            svg.rect(x0 + bar * static_cast<double>(s), top, bar * 0.92, fr.bottom - top,
                     kMethodColor(series_names[s]));
        }
        // Slanted labels stay readable for long category names.
        const double lx = fr.left + slot * (static_cast<double>(c) + 0.5);
        svg.text(lx, fr.bottom + 16, categories[c], 10, "middle");
    }
    double legend_y = 70;
    for (const std::string& s : series_names) {
        svg.rect(760, legend_y - 9, 16, 12, kMethodColor(s));
        svg.text(782, legend_y + 2, s, 12);
        legend_y += 22;
    }
    svg.save(path);
}

void heatmap_chart(const std::string& path, const ResultTable& table,
                   const std::string& method) {
    double room_w = 0.0;
    double room_h = 0.0;
    std::vector<const ResultRow*> cells;
    std::vector<const ResultRow*> speakers;
    std::vector<const ResultRow*> listeners;
    for (const ResultRow& r : table.rows) {
        if (r.label == "room") {
            room_w = r.x_m;
            room_h = r.y_m;
        } else if (r.label == "speaker") {
            speakers.push_back(&r);
        } else if (r.method == method && r.label == "grid") {
            cells.push_back(&r);
        } else if (r.method == method && r.label.rfind("listener", 0) == 0 &&
                   !std::isnan(r.x_m)) {
            listeners.push_back(&r);
        }
    }
    if (room_w <= 0.0 || room_h <= 0.0) {
        throw IoError("heatmap results lack the room-bounds row");
    }
    if (cells.empty()) {
        throw IoError("heatmap results lack grid rows for method " + method);
    }

    std::set<double> xs, ys;
    for (const ResultRow* r : cells) {
        xs.insert(r->x_m);
        ys.insert(r->y_m);
    }
    auto min_step = [](const std::set<double>& v) {
        double step = 0.0;
        double prev = 0.0;
        bool first = true;
        for (double x : v) {
            if (!first) {
                const double d = x - prev;
                if (step == 0.0 || d < step) {
                    step = d;
                }
            }
            prev = x;
            first = false;
        }
        return step > 0.0 ? step : 1.0;
    };
    const double dx = min_step(xs);
    const double dy = min_step(ys);

    const double plot_h = 440.0;
    const double scale = plot_h / room_h;
    const double plot_w = room_w * scale;
    const double left = 60.0;
    const double top = 50.0;
    SvgCanvas svg(static_cast<int>(left + plot_w + 150.0), static_cast<int>(top + plot_h + 60.0));
    auto px = [&](double x) { return left + x * scale; };
    auto py = [&](double y) { return top + plot_h - y * scale; };

    for (const ResultRow* r : cells) {
        svg.rect(px(r->x_m - dx / 2.0), py(r->y_m + dy / 2.0), dx * scale, dy * scale,
                 viridis_hex(r->stoi));
    }
    svg.rect(left, top, plot_w, plot_h, "none", "#222222", 1.2);
    for (const ResultRow* r : speakers) {
        svg.triangle(px(r->x_m), py(r->y_m), 7.0, "#ffffff", "#222222");
    }
    for (const ResultRow* r : listeners) {
        svg.circle(px(r->x_m), py(r->y_m), 6.0, "none", "#ff4444", 2.2);
    }
    svg.text(left + plot_w / 2.0, top - 14.0, "intelligibility at eavesdropping points: " + method,
             15, "middle");
    svg.text(left + plot_w / 2.0, top + plot_h + 34.0, "x (m)", 12, "middle");
    svg.text(20.0, top + plot_h / 2.0, "y (m)", 12, "middle");

    // Color scale.
    const double bar_x = left + plot_w + 30.0;
    const int steps = 64;
    for (int i = 0; i < steps; ++i) {
        const double t0 = static_cast<double>(i) / steps;
        svg.rect(bar_x, top + plot_h * (1.0 - static_cast<double>(i + 1) / steps), 18.0,
                 plot_h / steps + 0.5, viridis_hex(t0 + 0.5 / steps));
    }
    svg.rect(bar_x, top, 18.0, plot_h, "none", "#222222", 1.0);
    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        svg.text(bar_x + 24.0, top + plot_h * (1.0 - v) + 4.0, fmt(v, "%.2f"), 11);
    }
    svg.text(bar_x + 9.0, top - 8.0, "STOI", 11, "middle");
    svg.save(path);
}

std::vector<Series> sweep_series(const ResultTable& table, const std::string& label_prefix,
                                 const std::string& variant = "") {
    std::map<std::string, std::map<double, std::vector<double>>> agg;
    for (const ResultRow& r : table.rows) {
        if (!variant.empty() && r.variant != variant) {
            continue;
        }
        if (r.label.rfind(label_prefix, 0) == 0 && !std::isnan(r.sweep_value) &&
            !std::isnan(r.stoi)) {
            agg[r.method][r.sweep_value].push_back(r.stoi);
        }
    }
    std::vector<Series> out;
    for (auto& [method, by_x] : agg) {
        Series s;
        s.name = method;
        for (auto& [x, ys] : by_x) {
            s.points.emplace_back(x, median(ys));
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return dir.empty() ? name : dir + "/" + name;
}

}  // namespace

std::string viridis_hex(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 32.0;
    const int i = std::min(static_cast<int>(pos), 31);
    const double f = pos - i;
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
        const double v = kViridis[i][c] * (1.0 - f) + kViridis[i + 1][c] * f;
        rgb[c] = std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255);
    }
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return std::string(buf);
}

std::vector<std::string> render_svgs(const std::string& csv_path, const std::string& out_dir) {
    const ResultTable table = ResultTable::read_csv(csv_path);
    if (table.rows.empty()) {
        throw IoError("no rows in " + csv_path);
    }
    table.single_hash();  // refuse mixed result sets
    const std::string scenario = table.rows.front().scenario;
    std::vector<std::string> written;

    if (scenario == "demo") {
        std::vector<std::string> cats;
        std::set<std::string> methods_seen;
        std::map<std::pair<std::string, std::string>, std::vector<double>> agg;
        for (const ResultRow& r : table.rows) {
            if (std::isnan(r.stoi)) {
                continue;
            }
            const std::string cat = r.variant + "/" + r.label;
            if (!agg.count({cat, r.method})) {
                if (std::find(cats.begin(), cats.end(), cat) == cats.end()) {
                    cats.push_back(cat);
                }
            }
            agg[{cat, r.method}].push_back(r.stoi);
            methods_seen.insert(r.method);
        }
        std::map<std::pair<std::string, std::string>, double> values;
        for (auto& [key, ys] : agg) {
            values[key] = median(ys);
        }
        const std::string path = join_path(out_dir, "demo.svg");
        bar_chart(path, "reconstruction with and without echoes", cats,
                  {methods_seen.begin(), methods_seen.end()}, values);
        written.push_back(path);
    } else if (scenario == "heatmap") {
        std::set<std::string> methods;
        for (const ResultRow& r : table.rows) {
            if (r.label == "grid") {
                methods.insert(r.method);
            }
        }
        for (const std::string& m : methods) {
            const std::string path = join_path(out_dir, "heatmap_" + m + ".svg");
            heatmap_chart(path, table, m);
            written.push_back(path);
        }
    } else if (scenario == "sweep_variance") {
        const std::string path = join_path(out_dir, "sweep_variance.svg");
        line_chart(path, "off-spot intelligibility vs jamming noise level",
                   "noise std (multiples of carrier RMS)", sweep_series(table, "offspot"),
                   /*log_x=*/true);
        written.push_back(path);
    } else if (scenario == "sweep_length") {
        const std::string path = join_path(out_dir, "sweep_length.svg");
        line_chart(path, "off-spot intelligibility vs noise length",
                   "noise length / drive length", sweep_series(table, "offspot"),
                   /*log_x=*/false);
        written.push_back(path);
    } else if (scenario == "robustness") {
        const std::string drop_path = join_path(out_dir, "robustness_dropout.svg");
        line_chart(drop_path, "listener intelligibility vs dropped speakers",
                   "speakers dropped", sweep_series(table, "listener", "dropout"),
                   /*log_x=*/false);
        written.push_back(drop_path);
        const std::string snr_path = join_path(out_dir, "robustness_rir_snr.svg");
        line_chart(snr_path, "listener intelligibility vs channel-estimate noise",
                   "channel-estimate SNR (dB)", sweep_series(table, "listener", "rir_snr"),
                   /*log_x=*/false);
        written.push_back(snr_path);
    } else if (scenario == "measured") {
        std::vector<std::string> cats;
        std::set<std::string> methods_seen;
        std::map<std::pair<std::string, std::string>, std::vector<double>> agg;
        for (const ResultRow& r : table.rows) {
            if (std::isnan(r.stoi)) {
                continue;
            }
            if (std::find(cats.begin(), cats.end(), r.label) == cats.end()) {
                cats.push_back(r.label);
            }
            agg[{r.label, r.method}].push_back(r.stoi);
            methods_seen.insert(r.method);
        }
        std::map<std::pair<std::string, std::string>, double> values;
        for (auto& [key, ys] : agg) {
            values[key] = median(ys);
        }
        const std::string path = join_path(out_dir, "measured.svg");
        bar_chart(path, "intelligibility at measured points", cats,
                  {methods_seen.begin(), methods_seen.end()}, values);
        written.push_back(path);
    } else {
        throw IoError("unknown scenario in results: " + scenario);
    }
    return written;
}

}  // namespace privaudio
