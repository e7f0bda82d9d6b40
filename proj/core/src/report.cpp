#include "fairpsm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairpsm/csv.hpp"
#include "fairpsm/errors.hpp"

namespace fairpsm {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

std::string format_double(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

std::string curve_to_csv(const FairnessCurve& curve) {
    std::ostringstream out;
    out << "fraction,mean,std";
    for (size_t s = 0; s < curve.per_seed.size(); ++s) out << ",seed" << s;
    out << "\n";
    for (size_t g = 0; g < curve.fractions.size(); ++g) {
        out << format_double(curve.fractions[g], 2) << ',';
        if (curve.mean[g]) out << format_double(*curve.mean[g], 6);
        out << ',' << format_double(curve.std_dev[g], 6);
        for (size_t s = 0; s < curve.per_seed.size(); ++s) {
            out << ',';
            if (curve.per_seed[s][g]) out << format_double(*curve.per_seed[s][g], 6);
        }
        out << "\n";
    }
    return out.str();
}

std::string curve_to_svg(const FairnessCurve& curve, const std::string& title) {
    const double width = 640, height = 420;
    const double ml = 64, mr = 20, mt = 40, mb = 48; // margins
    const double pw = width - ml - mr, ph = height - mt - mb;

    double y_max = 1.0;
    for (size_t g = 0; g < curve.fractions.size(); ++g) {
        if (curve.mean[g]) y_max = std::max(y_max, *curve.mean[g] + curve.std_dev[g]);
    }
    y_max *= 1.05;

    auto px = [&](double f) { return ml + f * pw; };
    auto py = [&](double v) { return mt + ph - (v / y_max) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << title << "</text>\n";

    // +-1 std band over the defined stretch
    std::ostringstream band;
    std::vector<size_t> defined;
    for (size_t g = 0; g < curve.fractions.size(); ++g) {
        if (curve.mean[g]) defined.push_back(g);
    }
    if (defined.size() >= 2) {
        band << "<polygon fill=\"#bbbbbb\" fill-opacity=\"0.45\" stroke=\"none\" points=\"";
        for (size_t g : defined) {
            band << format_double(px(curve.fractions[g]), 1) << ','
                 << format_double(py(*curve.mean[g] + curve.std_dev[g]), 1) << ' ';
        }
        for (auto it = defined.rbegin(); it != defined.rend(); ++it) {
            band << format_double(px(curve.fractions[*it]), 1) << ','
                 << format_double(py(std::max(0.0, *curve.mean[*it] - curve.std_dev[*it])), 1) << ' ';
        }
        band << "\"/>\n";
        svg << band.str();
    }

    // axes + ticks
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; i += 2) {
        const double f = i / 10.0;
        svg << "<line x1=\"" << px(f) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(f) << "\" y2=\""
            << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px(f) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(f, 1) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = y_max * i / 4.0;
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(v) << "\" x2=\"" << ml << "\" y2=\""
            << py(v) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << ml - 9 << "\" y=\"" << py(v) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(v, 1) << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">fraction of unmatched samples included</text>\n";
    svg << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
        << mt + ph / 2 << ")\">" << fair_metric_name(curve.metric) << "</text>\n";

    // mean line, broken at undefined points
    std::ostringstream line;
    bool open = false;
    for (size_t g = 0; g < curve.fractions.size(); ++g) {
        if (curve.mean[g]) {
            if (!open) {
                line << "<polyline fill=\"none\" stroke=\"#2a2a2a\" stroke-width=\"2\" points=\"";
                open = true;
            }
            line << format_double(px(curve.fractions[g]), 1) << ','
                 << format_double(py(*curve.mean[g]), 1) << ' ';
        } else if (open) {
            line << "\"/>\n";
            open = false;
        }
    }
    if (open) line << "\"/>\n";
    svg << line.str();

    if (curve.f_auc) {
        svg << "<text x=\"" << ml + pw - 6 << "\" y=\"" << mt + 16
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">f-AUC = "
            << format_double(*curve.f_auc, 2) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

namespace {

std::string int_cell(const std::optional<double>& value) {
    if (!value) return "";
    return std::to_string(round_half_away(*value));
}

} // namespace

std::string subgroup_to_csv(const SubgroupReport& report) {
    std::ostringstream out;
    out << "subset,ratio";
    for (const auto& name : MetricReport::column_names()) out << ',' << name;
    out << ",error\n";
    for (const auto& row : report.rows) {
        out << row.subset << ',' << format_double(row.ratio, 2);
        for (const auto& value : row.report.values()) out << ',' << int_cell(value);
        out << ',' << csv_escape(row.error) << "\n";
    }
    return out.str();
}

std::string subgroup_to_json(const SubgroupReport& report) {
    nlohmann::ordered_json j;
    j["dataset"] = report.dataset;
    j["seed"] = report.seed;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json rj;
        rj["subset"] = row.subset;
        rj["ratio"] = row.ratio;
        rj["metrics"] = nlohmann::ordered_json::parse(row.report.to_json());
        auto& dj = rj["deltas"] = nlohmann::ordered_json::object();
        const auto& names = MetricReport::column_names();
        for (size_t c = 0; c < names.size() && c < row.deltas.size(); ++c) {
            if (row.deltas[c]) dj[names[c]] = *row.deltas[c];
            else dj[names[c]] = nullptr;
        }
        if (!row.error.empty()) rj["error"] = row.error;
        rows.push_back(std::move(rj));
    }
    return j.dump(2);
}

std::string subgroup_deltas_to_csv(const SubgroupReport& report) {
    std::ostringstream out;
    out << "subset";
    for (const auto& name : MetricReport::column_names()) out << ",delta_" << name << ",flag_" << name;
    out << "\n";
    for (const auto& row : report.rows) {
        if (row.subset == "original") continue;
        out << row.subset;
        for (size_t c = 0; c < row.deltas.size(); ++c) {
            if (row.deltas[c]) {
                const double d = *row.deltas[c];
                out << ',' << format_double(d, 2) << ','
                    << (d == 0.0 ? "flat" : delta_is_improvement(c, d) ? "better" : "worse");
            } else {
                out << ",,";
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string delta_table_to_csv(const DeltaTable& table, bool std_dev) {
    std::ostringstream out;
    out << "subset";
    for (const auto& name : MetricReport::column_names()) out << ',' << name;
    out << "\n";
    for (const auto& [subset, cells] : table) {
        out << subset;
        for (const auto& cell : cells) {
            out << ',';
            if (cell.n > 0) out << format_double(std_dev ? cell.std_dev : cell.mean, 2);
        }
        out << "\n";
    }
    return out.str();
}

std::string rank_table_to_csv(const RankTable& table) {
    std::ostringstream out;
    out << "treatment,median,rank\n";
    for (const auto& entry : table.entries) {
        out << csv_escape(entry.name) << ',' << format_double(entry.median, 6) << ','
            << entry.rank << "\n";
    }
    return out.str();
}

} // namespace fairpsm
