#include "hsfuse/report.hpp"

#include "hsfuse/raster_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace hsfuse {

namespace {

std::string num(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double from_json_number(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string report_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "method,CC,SAM,RMSE,ERGAS,time_s\n";
    for (const MethodOutcome& m : report.methods) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const QualityReport& q = m.quality;
        out << m.name << ',' << num(m.ok ? q.cc : nan) << ',' << num(m.ok ? q.sam_deg : nan) << ','
            << num(m.ok ? q.rmse : nan) << ',' << num(m.ok ? q.ergas : nan) << ',' << num(m.ok ? q.wall_time_s : nan)
            << '\n';
    }
    return out.str();
}

nlohmann::json report_json(const BenchmarkReport& report) {
    nlohmann::json j;
    j["config"] = echo_config(report.config);
    j["seed"] = report.config.seed;
    j["threads"] = report.config.threads;
    j["noise_generator"] = report.noise_generator;
    j["methods"] = nlohmann::json::array();
    for (const MethodOutcome& m : report.methods) {
        nlohmann::json e;
        e["method"] = m.name;
        e["ok"] = m.ok;
        e["error"] = m.error;
        e["CC"] = finite_or_null(m.quality.cc);
        e["SAM"] = finite_or_null(m.quality.sam_deg);
        e["RMSE"] = finite_or_null(m.quality.rmse);
        e["ERGAS"] = finite_or_null(m.quality.ergas);
        e["time_s"] = finite_or_null(m.quality.wall_time_s);
        e["rmse_per_band"] = m.quality.rmse_per_band;
        e["settings"] = m.settings;
        e["percentiles"] = nlohmann::json::array();
        for (const PercentileSpectrum& p : m.percentiles)
            e["percentiles"].push_back({{"q", p.q},
                                        {"pixel", p.pixel},
                                        {"rmse", p.error},
                                        {"reference", p.reference},
                                        {"estimate", p.estimate}});
        j["methods"].push_back(std::move(e));
    }
    return j;
}

BenchmarkReport report_from_json(const nlohmann::json& j) {
    BenchmarkReport r;
    r.config = parse_config_text(j.at("config").get<std::string>());
    r.noise_generator = j.at("noise_generator").get<std::string>();
    for (const nlohmann::json& e : j.at("methods")) {
        MethodOutcome m;
        m.name = e.at("method").get<std::string>();
        m.ok = e.at("ok").get<bool>();
        m.error = e.at("error").get<std::string>();
        m.quality.cc = from_json_number(e.at("CC"));
        m.quality.sam_deg = from_json_number(e.at("SAM"));
        m.quality.rmse = from_json_number(e.at("RMSE"));
        m.quality.ergas = from_json_number(e.at("ERGAS"));
        m.quality.wall_time_s = from_json_number(e.at("time_s"));
        m.quality.rmse_per_band = e.at("rmse_per_band").get<std::vector<double>>();
        m.settings = e.at("settings").get<std::map<std::string, double>>();
        for (const nlohmann::json& p : e.at("percentiles")) {
            PercentileSpectrum ps;
            ps.q = p.at("q").get<double>();
            ps.pixel = p.at("pixel").get<Eigen::Index>();
            ps.error = p.at("rmse").get<double>();
            ps.reference = p.at("reference").get<std::vector<double>>();
            ps.estimate = p.at("estimate").get<std::vector<double>>();
            m.percentiles.push_back(std::move(ps));
        }
        r.methods.push_back(std::move(m));
    }
    return r;
}

void emit_report(const BenchmarkReport& report, const std::filesystem::path& path, ReportFormat format) {
    write_text(path, format == ReportFormat::csv ? report_csv(report) : report_json(report).dump(2) + "\n");
}

void write_artifacts(const BenchmarkReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const MethodOutcome& m : report.methods) {
        if (!m.ok) continue;
        save_raster(m.quality.rmse_map, dir / ("rmse_map_" + m.name + ".hdr"));
        std::ostringstream csv;
        csv << "q,pixel,band,reference,estimate\n";
        for (const PercentileSpectrum& p : m.percentiles)
            for (std::size_t k = 0; k < p.reference.size(); ++k)
                csv << num(p.q) << ',' << p.pixel << ',' << k << ',' << num(p.reference[k]) << ','
                    << num(p.estimate[k]) << '\n';
        write_text(dir / ("spectra_" + m.name + ".csv"), csv.str());
    }
}

}  // namespace hsfuse
