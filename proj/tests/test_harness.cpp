#include "oracles.hpp"

#include "hsfuse/config.hpp"
#include "hsfuse/raster_io.hpp"
#include "hsfuse/report.hpp"
#include "hsfuse/scene.hpp"
#include "hsfuse/wald.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#ifndef HSFUSE_CLI_PATH
#define HSFUSE_CLI_PATH "hsfuse"
#endif

using namespace hsfuse;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(std::filesystem::temp_directory_path() /
                ("hsfuse_" + tag + "_" + std::to_string(std::random_device{}()))) {
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Small noiseless synthetic run.
RunConfig small_config(const std::string& methods) {
    RunConfig c = parse_config_text("scene_height = 20\nscene_width = 20\nscene_bands = 12\nratio = 2\n"
                                    "hs_noise = none\npan_noise = none\ntiming = off\nmethods = " +
                                    methods + "\n");
    c.scene_endmembers = 2;
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + HSFUSE_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, DefaultsValidateAndListEveryMethod) {
    const RunConfig c = default_config();
    EXPECT_NO_THROW(c.validate());
    ASSERT_EQ(c.methods.size(), method_registry().size());
    for (std::size_t i = 0; i < c.methods.size(); ++i) EXPECT_EQ(c.methods[i].name, method_registry()[i].name);
    EXPECT_NE(find_method("GSA"), nullptr);
    EXPECT_EQ(find_method("gsa"), nullptr);
}

TEST(Config, ParsesKeysSectionsAndComments) {
    const RunConfig c = parse_config_text(
        "# comment\n"
        "ratio = 4 ; trailing\n"
        "gnyq = 0.25\n"
        "scene_height = 40\nscene_width = 40\n"
        "hs_noise = std:0.01\n"
        "pan_response = range:0.45-0.9\n"
        "methods = GSA, HySure\n"
        "seed = 17\n"
        "range = 0,2\n"
        "[HySure]\n"
        "lambda_phi = 0.002\n");
    EXPECT_EQ(c.ratio, 4);
    EXPECT_DOUBLE_EQ(c.gnyq, 0.25);
    EXPECT_EQ(c.hs_noise, (NoiseSpec{NoiseSpec::Kind::std, 0.01}));
    EXPECT_EQ(c.pan_response.kind, PanResponseSpec::Kind::range);
    EXPECT_DOUBLE_EQ(c.pan_response.lo, 0.45);
    EXPECT_DOUBLE_EQ(c.pan_response.hi, 0.9);
    ASSERT_EQ(c.methods.size(), 2u);
    EXPECT_EQ(c.methods[0].name, "GSA");
    ASSERT_NE(c.method("HySure"), nullptr);
    EXPECT_DOUBLE_EQ(c.method("HySure")->params.at("lambda_phi"), 0.002);
    EXPECT_EQ(c.seed, 17u);
    ASSERT_TRUE(c.range.has_value());
    EXPECT_EQ(c.range->lo, 0.0);
    EXPECT_EQ(c.range->hi, 2.0);
}

TEST(Config, EchoRoundTrips) {
    RunConfig c = default_config();
    apply_setting(c, "pan_response", "weights:0.1,0.2,0.7");
    apply_setting(c, "pan_noise", "snr:25.5");
    apply_setting(c, "range", "-0.1,1.3");
    apply_setting(c, "timing", "off");
    c.methods[0].params["gnyq"] = 0.123456789012345;
    c.methods.erase(c.methods.begin());
    const RunConfig back = parse_config_text(echo_config(c));
    EXPECT_TRUE(back == c);
    EXPECT_EQ(echo_config(back), echo_config(c));
    EXPECT_TRUE(parse_config_text(echo_config(default_config())) == default_config());
}

TEST(Config, ErrorsCarryLineNumbers) {
    try {
        parse_config_text("ratio = 3\n\nbogus = 1\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config_text("ratio = two\n"), ConfigError);
    EXPECT_THROW(parse_config_text("[NoSuchMethod]\n"), ConfigError);
    EXPECT_THROW(parse_config_text("[GSA\n"), ConfigError);
    EXPECT_THROW(parse_config_text("[PCA]\nsubspace = 3\n"), ConfigError);
    EXPECT_THROW(parse_config_text("just text\n"), ConfigError);
    EXPECT_THROW(parse_config_text("methods = GSA,Unknown\n"), ConfigError);
    EXPECT_THROW(parse_config_text("range = 2,1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("timing = maybe\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/hsfuse.ini"), ConfigError);
}

TEST(Config, ValidateRejectsBadValues) {
    RunConfig c = default_config();
    c.ratio = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = default_config();
    c.scene_height = 101;
    EXPECT_THROW(c.validate(), ConfigError);
    c = default_config();
    c.gnyq = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = default_config();
    c.threads = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Specs, NoiseParseAndPrint) {
    EXPECT_EQ(NoiseSpec::parse("none").kind, NoiseSpec::Kind::none);
    EXPECT_EQ(NoiseSpec::parse("snr:30"), (NoiseSpec{NoiseSpec::Kind::snr, 30.0}));
    EXPECT_EQ(NoiseSpec::parse(NoiseSpec{NoiseSpec::Kind::std, 0.25}.str()), (NoiseSpec{NoiseSpec::Kind::std, 0.25}));
    EXPECT_THROW(NoiseSpec::parse("std:-1"), ConfigError);
    EXPECT_THROW(NoiseSpec::parse("loud"), ConfigError);
}

TEST(Specs, PanResponseParseAndPrint) {
    EXPECT_EQ(PanResponseSpec::parse("auto").kind, PanResponseSpec::Kind::automatic);
    const PanResponseSpec w = PanResponseSpec::parse("weights:1,0,2");
    EXPECT_EQ(w.weights, (std::vector<double>{1.0, 0.0, 2.0}));
    EXPECT_EQ(PanResponseSpec::parse(w.str()), w);
    EXPECT_THROW(PanResponseSpec::parse("range:0.9-0.4"), ConfigError);
    EXPECT_THROW(PanResponseSpec::parse("weights:1,-1"), ConfigError);
    EXPECT_THROW(PanResponseSpec::parse("weights:"), ConfigError);
}

TEST(Raster, Float32SinglePixel) {
    TempDir dir("f32");
    const std::filesystem::path hdr = dir.path() / "one.hdr";
    save_raster(SpectralImage(1, 1, Matrix::Constant(1, 1, 7.0)), hdr, SampleType::float32);
    const std::string bytes = slurp(raster_payload_path(hdr));
    ASSERT_EQ(bytes.size(), 4u);
    float v = 0.0f;
    std::memcpy(&v, bytes.data(), 4);
    EXPECT_EQ(v, 7.0f);
    const SpectralImage back = load_raster(hdr);
    EXPECT_EQ(back.bands(), 1);
    EXPECT_EQ(back.data()(0, 0), 7.0);
}

TEST(Raster, Float64RoundTripIsBitExact) {
    TempDir dir("f64");
    std::mt19937_64 gen(1);
    const SpectralImage one = oracle::random_image(1, 3, 5, gen, -1e3, 1e3);
    const SpectralImage three = oracle::random_image(3, 4, 2, gen);
    const SpectralImage annotated(4, 3, oracle::random_matrix(5, 12, gen), scene_wavelengths(5));
    int i = 0;
    for (const SpectralImage* img : {&one, &three, &annotated}) {
        const std::filesystem::path hdr = dir.path() / ("img" + std::to_string(i++) + ".hdr");
        save_raster(*img, hdr);
        EXPECT_EQ(load_raster(hdr), *img);
        EXPECT_EQ(load_raster(hdr).wavelengths(), img->wavelengths());
    }
}

TEST(Raster, NanometreWavelengthsAndPayloadMismatch) {
    TempDir dir("hdr");
    const std::filesystem::path hdr = dir.path() / "x.hdr";
    save_raster(SpectralImage(2, 2, Matrix::Constant(2, 4, 0.5)), hdr);
    write_file(hdr,
               "ENVI\nsamples = 2\nlines = 2\nbands = 2\ndata type = 5\ninterleave = bsq\nbyte order = 0\n"
               "wavelength units = Nanometers\nwavelength = {500, 1500}\n");
    const SpectralImage img = load_raster(hdr);
    EXPECT_NEAR(img.wavelengths()[0], 0.5, 1e-15);
    EXPECT_NEAR(img.wavelengths()[1], 1.5, 1e-15);
    write_file(hdr, "ENVI\nsamples = 3\nlines = 2\nbands = 2\ndata type = 5\ninterleave = bsq\nbyte order = 0\n");
    EXPECT_THROW(load_raster(hdr), RasterError);
    write_file(hdr, "ENVI\nsamples = 2\nlines = 2\nbands = 2\ndata type = 12\ninterleave = bsq\nbyte order = 0\n");
    EXPECT_THROW(load_raster(hdr), RasterError);
    EXPECT_THROW(load_raster(dir.path() / "missing.hdr"), RasterError);
}

TEST(Scene, AbundancesOnSimplexAndRank) {
    const SyntheticScene s = synth_scene(3, 4, 20, 30, 25);
    EXPECT_EQ(s.image.height(), 20);
    EXPECT_EQ(s.image.width(), 30);
    EXPECT_EQ(s.image.bands(), 25);
    EXPECT_GE(s.abundances.minCoeff(), 0.0);
    EXPECT_LE((s.abundances.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_LE((s.endmembers * s.abundances - s.image.data()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::JacobiSVD<Matrix> svd(s.image.data());
    const Vector sv = svd.singularValues();
    EXPECT_GT(sv[3], 1e-8 * sv[0]);
    EXPECT_LT(sv[4], 1e-10 * sv[0]);
    EXPECT_EQ(synth_scene(3, 4, 20, 30, 25).image, s.image);
    EXPECT_NE(synth_scene(4, 4, 20, 30, 25).image, s.image);
}

TEST(Wald, DegradationShapesAndDefaultRange) {
    const RunConfig c = small_config("PCA");
    const SpectralImage ref = load_reference(c);
    const WaldInputs in = degrade_reference(ref, c);
    EXPECT_EQ(in.hs.height(), 10);
    EXPECT_EQ(in.hs.bands(), 12);
    EXPECT_EQ(in.pan.bands(), 1);
    EXPECT_EQ(in.pan.height(), 20);
    const DynamicRange r = default_range(in.hs);
    const double hi = in.hs.data().maxCoeff();
    const double lo = std::min(0.0, in.hs.data().minCoeff());
    EXPECT_EQ(r.lo, lo);
    EXPECT_DOUBLE_EQ(r.hi, hi + (hi - lo));
}

TEST(Wald, SingleMethodSmokeRun) {
    const BenchmarkReport rep = run_wald(small_config("PCA"));
    ASSERT_EQ(rep.methods.size(), 1u);
    const MethodOutcome& m = rep.methods[0];
    EXPECT_TRUE(m.ok) << m.error;
    EXPECT_TRUE(std::isfinite(m.quality.rmse));
    EXPECT_EQ(m.quality.wall_time_s, 0.0);
    EXPECT_EQ(m.percentiles.size(), 3u);
    const std::string csv = report_csv(rep);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    EXPECT_EQ(csv.rfind("method,CC,SAM,RMSE,ERGAS,time_s\nPCA,", 0), 0u);
}

TEST(Wald, DeterministicAcrossThreadCounts) {
    RunConfig c = small_config("SFIM,GSA,GFPCA");
    c.hs_noise = NoiseSpec::parse("snr:30");
    c.pan_noise = NoiseSpec::parse("snr:30");
    const std::string one = report_csv(run_wald(c));
    c.threads = 3;
    EXPECT_EQ(report_csv(run_wald(c)), one);
    c.seed = 1;
    EXPECT_NE(report_csv(run_wald(c)), one);
}

TEST(Wald, FailingMethodIsIsolated) {
    RunConfig c = small_config("GSA,BayesNaive,SFIM");
    c.methods[1].params["max_iters"] = 1;
    const BenchmarkReport rep = run_wald(c);
    ASSERT_EQ(rep.methods.size(), 3u);
    EXPECT_TRUE(rep.methods[0].ok);
    EXPECT_FALSE(rep.methods[1].ok);
    EXPECT_FALSE(rep.methods[1].error.empty());
    EXPECT_TRUE(rep.methods[2].ok);
    EXPECT_FALSE(rep.all_ok());
    EXPECT_NE(report_csv(rep).find("BayesNaive,nan,nan,nan,nan,nan\n"), std::string::npos);
}

TEST(Wald, DerivedSeedsDiffer) {
    EXPECT_EQ(derive_seed(5, 2), derive_seed(5, 2));
    EXPECT_NE(derive_seed(5, 2), derive_seed(5, 3));
    EXPECT_NE(derive_seed(5, 2), derive_seed(6, 2));
}

TEST(Percentile, NearestRankWithLowestIndexTie) {
    const SpectralImage est(1, 4, (Matrix(2, 4) << 1, 2, 3, 4, 5, 6, 7, 8).finished());
    const SpectralImage ref(1, 4, Matrix::Zero(2, 4));
    const SpectralImage flat(1, 4, Matrix::Constant(1, 4, 0.5));
    EXPECT_EQ(percentile_spectrum(est, ref, flat, 90).pixel, 0);
    const SpectralImage map(1, 4, (Matrix(1, 4) << 3, 1, 4, 2).finished());
    const PercentileSpectrum mid = percentile_spectrum(est, ref, map, 50);
    EXPECT_EQ(mid.error, 2.0);
    EXPECT_EQ(mid.pixel, 3);
    EXPECT_EQ(mid.estimate, (std::vector<double>{4.0, 8.0}));
    EXPECT_EQ(mid.reference, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(percentile_spectrum(est, ref, map, 99.9).error, 4.0);
    EXPECT_EQ(percentile_spectrum(est, ref, map, 0).error, 1.0);
    EXPECT_THROW(percentile_spectrum(est, ref, est, 50), std::invalid_argument);
}

TEST(Report, CsvForEmptyAndJsonRoundTrip) {
    BenchmarkReport empty;
    empty.config = default_config();
    EXPECT_EQ(report_csv(empty), "method,CC,SAM,RMSE,ERGAS,time_s\n");

    RunConfig c = small_config("GSA,BayesNaive");
    c.methods[1].params["max_iters"] = 1;
    const BenchmarkReport rep = run_wald(c);
    const nlohmann::json j = report_json(rep);
    const BenchmarkReport back = report_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_TRUE(back.config == rep.config);
    EXPECT_EQ(report_csv(back), report_csv(rep));
    EXPECT_EQ(report_json(back), j);
}

TEST(Report, ArtifactsWrittenForSuccessfulMethods) {
    TempDir dir("art");
    RunConfig c = small_config("GSA,BayesNaive");
    c.methods[1].params["max_iters"] = 1;
    const BenchmarkReport rep = run_wald(c);
    write_artifacts(rep, dir.path());
    const SpectralImage map = load_raster(dir.path() / "rmse_map_GSA.hdr");
    EXPECT_EQ(map, rep.methods[0].quality.rmse_map);
    EXPECT_FALSE(std::filesystem::exists(dir.path() / "rmse_map_BayesNaive.hdr"));
}

TEST(Cli, ExitCodes) {
    TempDir dir("cli");
    const std::filesystem::path good = dir.path() / "good.ini";
    const std::filesystem::path partial = dir.path() / "partial.ini";
    const std::filesystem::path bad = dir.path() / "bad.ini";
    const std::string base = "scene_height = 20\nscene_width = 20\nscene_bands = 12\nratio = 2\ntiming = off\n";
    write_file(good, base + "methods = GSA\n");
    write_file(partial, base + "methods = GSA,BayesNaive\n[BayesNaive]\nmax_iters = 1\n");
    write_file(bad, base + "ratio = zero\n");
    const std::string out = " --output-dir \"" + (dir.path() / "out").string() + "\"";
    EXPECT_EQ(run_cli("bench --config \"" + good.string() + "\"" + out), 0);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "report.csv"));
    EXPECT_EQ(run_cli("bench --config \"" + partial.string() + "\"" + out), 2);
    EXPECT_EQ(run_cli("bench --config \"" + bad.string() + "\"" + out), 1);
}
