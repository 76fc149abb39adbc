// Command-line front end: synth, degrade, fuse, eval, bench.

#include "hsfuse/config.hpp"
#include "hsfuse/metrics.hpp"
#include "hsfuse/raster_io.hpp"
#include "hsfuse/report.hpp"
#include "hsfuse/scene.hpp"
#include "hsfuse/wald.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> ratio;
    std::optional<double> gnyq;
    std::optional<std::string> pan_response;
    std::optional<std::string> hs_noise;
    std::optional<std::string> pan_noise;
    std::optional<std::string> methods;
    std::optional<std::string> output_dir;
    std::optional<int> threads;
    std::optional<std::string> timing;
    std::optional<std::string> range;
    std::optional<std::string> input;
};

hsfuse::RunConfig resolve_config(const Overrides& o) {
    hsfuse::RunConfig c = o.config_path ? hsfuse::load_config(*o.config_path) : hsfuse::default_config();
    if (o.input) hsfuse::apply_setting(c, "input", *o.input);
    if (o.seed) hsfuse::apply_setting(c, "seed", std::to_string(*o.seed));
    if (o.ratio) hsfuse::apply_setting(c, "ratio", std::to_string(*o.ratio));
    if (o.gnyq) c.gnyq = *o.gnyq;
    if (o.pan_response) hsfuse::apply_setting(c, "pan_response", *o.pan_response);
    if (o.hs_noise) hsfuse::apply_setting(c, "hs_noise", *o.hs_noise);
    if (o.pan_noise) hsfuse::apply_setting(c, "pan_noise", *o.pan_noise);
    if (o.methods) hsfuse::apply_setting(c, "methods", *o.methods);
    if (o.output_dir) hsfuse::apply_setting(c, "output_dir", *o.output_dir);
    if (o.threads) hsfuse::apply_setting(c, "threads", std::to_string(*o.threads));
    if (o.timing) hsfuse::apply_setting(c, "timing", *o.timing);
    if (o.range) hsfuse::apply_setting(c, "range", *o.range);
    c.validate();
    return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "Config file (key = value, [Method] sections)");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--ratio", o.ratio, "Resolution ratio");
    cmd->add_option("--gnyq", o.gnyq, "MTF gain at Nyquist");
    cmd->add_option("--pan-response", o.pan_response, "auto | range:<lo>-<hi> | weights:<list>");
    cmd->add_option("--hs-noise", o.hs_noise, "none | snr:<dB> | std:<value>");
    cmd->add_option("--pan-noise", o.pan_noise, "none | snr:<dB> | std:<value>");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperspectral pansharpening toolkit"};
    app.require_subcommand(1);

    Overrides o;

    auto* synth = app.add_subcommand("synth", "Write a synthetic reference scene");
    int endmembers = 3, height = 100, width = 100, bands = 60;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--seed", synth_seed, "Scene seed");
    synth->add_option("--endmembers", endmembers, "Number of endmembers");
    synth->add_option("--height", height, "Lines");
    synth->add_option("--width", width, "Samples");
    synth->add_option("--bands", bands, "Bands");
    synth->add_option("--out", synth_out, "Output header (.hdr)")->required();

    auto* degrade = app.add_subcommand("degrade", "Simulate HS and PAN observations of a reference");
    std::string out_hs, out_pan;
    add_common(degrade, o);
    degrade->add_option("--input", o.input, "Reference header")->required();
    degrade->add_option("--out-hs", out_hs, "HS output header")->required();
    degrade->add_option("--out-pan", out_pan, "PAN output header")->required();

    auto* fuse = app.add_subcommand("fuse", "Fuse an HS image with a PAN image");
    std::string method, hs_path, pan_path, fuse_out;
    add_common(fuse, o);
    fuse->add_option("--method", method, "Method name")->required();
    fuse->add_option("--hs", hs_path, "HS header")->required();
    fuse->add_option("--pan", pan_path, "PAN header")->required();
    fuse->add_option("--range", o.range, "Clipping range lo,hi (default derived from the HS image)");
    fuse->add_option("--out", fuse_out, "Fused output header")->required();

    auto* eval = app.add_subcommand("eval", "Quality metrics of an estimate against a reference");
    std::string est_path, ref_path, eval_format = "csv", eval_out;
    int eval_ratio = 5;
    eval->add_option("--estimate", est_path, "Estimate header")->required();
    eval->add_option("--reference", ref_path, "Reference header")->required();
    eval->add_option("--ratio", eval_ratio, "Resolution ratio (ERGAS uses 1/ratio)");
    eval->add_option("--format", eval_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    eval->add_option("--out", eval_out, "Output file (default: stdout)");

    auto* bench = app.add_subcommand("bench", "Wald-protocol benchmark of the configured methods");
    add_common(bench, o);
    bench->add_option("--input", o.input, "synthetic or a reference header");
    bench->add_option("--methods", o.methods, "Comma-separated method list");
    bench->add_option("--output-dir", o.output_dir, "Report directory");
    bench->add_option("--threads", o.threads, "Concurrent methods");
    bench->add_option("--timing", o.timing, "wall | off");
    bench->add_option("--range", o.range, "Clipping range lo,hi or auto");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*synth) {
            const auto scene = hsfuse::synth_scene(synth_seed, endmembers, height, width, bands);
            hsfuse::save_raster(scene.image, synth_out);
            return 0;
        }
        if (*degrade) {
            const hsfuse::RunConfig c = resolve_config(o);
            const hsfuse::WaldInputs in = hsfuse::degrade_reference(hsfuse::load_raster(c.input), c);
            hsfuse::save_raster(in.hs, out_hs);
            hsfuse::save_raster(in.pan, out_pan);
            return 0;
        }
        if (*fuse) {
            const hsfuse::RunConfig c = resolve_config(o);
            const hsfuse::SpectralImage hs = hsfuse::load_raster(hs_path);
            const hsfuse::SpectralImage pan = hsfuse::load_raster(pan_path);
            if (hsfuse::find_method(method) == nullptr) throw hsfuse::ConfigError("unknown method '" + method + "'");
            const hsfuse::MethodSpec* configured = c.method(method);
            const hsfuse::MethodSpec spec = configured ? *configured : hsfuse::MethodSpec{method, {}};
            hsfuse::SensorModel model;
            model.ratio = c.ratio;
            model.phase = hsfuse::default_phase(c.ratio);
            model.blur = hsfuse::kernel_from_mtf(c.ratio, c.gnyq);
            model.spectral_response = hsfuse::resolve_pan_response(c.pan_response, hs);
            const hsfuse::DynamicRange range = c.range ? *c.range : hsfuse::default_range(hs);
            try {
                const hsfuse::SpectralImage fused =
                    hsfuse::run_method(spec, hs, pan, model, range, c.gnyq, hsfuse::derive_seed(c.seed, 0));
                hsfuse::save_raster(fused, fuse_out);
            } catch (const hsfuse::ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                std::cerr << "hsfuse: " << method << " failed: " << e.what() << "\n";
                return kExitPartial;
            }
            return 0;
        }
        if (*eval) {
            if (eval_ratio < 1) throw hsfuse::ConfigError("ratio must be >= 1");
            const hsfuse::SpectralImage est = hsfuse::load_raster(est_path);
            const hsfuse::SpectralImage ref = hsfuse::load_raster(ref_path);
            const hsfuse::QualityReport q = hsfuse::evaluate(est, ref, 1.0 / eval_ratio);
            std::ostringstream text;
            if (eval_format == "csv") {
                char buf[160];
                std::snprintf(buf, sizeof buf, "CC,SAM,RMSE,ERGAS\n%.12g,%.12g,%.12g,%.12g\n", q.cc, q.sam_deg, q.rmse,
                              q.ergas);
                text << buf;
            } else {
                nlohmann::json j{{"CC", q.cc}, {"SAM", q.sam_deg}, {"RMSE", q.rmse}, {"ERGAS", q.ergas},
                                 {"rmse_per_band", q.rmse_per_band}};
                text << j.dump(2) << "\n";
            }
            if (eval_out.empty()) {
                std::cout << text.str();
            } else {
                std::ofstream out(eval_out);
                if (!out) throw std::runtime_error("cannot write " + eval_out);
                out << text.str();
            }
            return 0;
        }
        if (*bench) {
            const hsfuse::RunConfig c = resolve_config(o);
            const hsfuse::BenchmarkReport report = hsfuse::run_wald(c);
            const std::filesystem::path dir = c.output_dir;
            std::filesystem::create_directories(dir);
            hsfuse::emit_report(report, dir / "report.csv", hsfuse::ReportFormat::csv);
            hsfuse::emit_report(report, dir / "report.json", hsfuse::ReportFormat::json);
            hsfuse::write_artifacts(report, dir / "artifacts");
            for (const auto& m : report.methods)
                if (!m.ok) std::cerr << "hsfuse: " << m.name << " failed: " << m.error << "\n";
            return report.all_ok() ? 0 : kExitPartial;
        }
    } catch (const std::exception& e) {
        std::cerr << "hsfuse: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
