#include <gtest/gtest.h>

#include <sstream>

#include "polarlink/scenario.hpp"

using namespace polarlink;

namespace {

const char* kMinimal = R"(
[link]
frequency_hz = 2.44e9
tx_power_dbm = 0
tx_orientation_deg = 0
rx_orientation_deg = 90
tx_rx_distance_m = 0.24
)";

ScenarioBundle parse(const std::string& text) {
    std::stringstream ss(text);
    return parse_scenario(ss);
}

}  // namespace

TEST(ScenarioParse, MinimalDocumentUsesDefaults) {
    const ScenarioBundle b = parse(kMinimal);
    EXPECT_DOUBLE_EQ(b.link.frequency_hz, 2.44e9);
    EXPECT_DOUBLE_EQ(b.link.rx_orientation.degrees, 90.0);
    EXPECT_FALSE(b.link.surface.has_value());
    EXPECT_DOUBLE_EQ(b.link.tx_surface_distance_m, 0.12);  // defaults to midway
    EXPECT_DOUBLE_EQ(b.link.crosspol_floor_db, -30.0);
    EXPECT_DOUBLE_EQ(b.link.noise_sigma_db, 0.5);
    EXPECT_EQ(b.link.rng_seed, 42u);
    EXPECT_EQ(b.controller.n_iterations, 2);
    EXPECT_EQ(b.controller.steps_per_axis, 5);
    EXPECT_DOUBLE_EQ(b.controller.settle_time_s, 0.02);
    EXPECT_DOUBLE_EQ(b.estimator.resolution_deg, 1.0);
}

TEST(ScenarioParse, FullDocument) {
    const ScenarioBundle b = parse(std::string(kMinimal) + R"(
tx_surface_distance_m = 0.1
bypass_fraction = 0.25
combining_phase_deg = 30
crosspol_floor_db = -25
noise_floor_dbm = -85
noise_sigma_db = 0
n_averages = 3
tx_gain_dbi = 2
rx_gain_dbi = 1
rng_seed = 7
extra_ray = 0.1, 45, 90
extra_ray = 0.05, 0, 0

[surface]
mode = reflective
insertion_loss_db = -4.5
reflective_rotation_factor = 0.4
side_m = 0.5

[controller]
n_iterations = 3
steps_per_axis = 4
v_min = 1
v_max = 29
settle_time_s = 0.01
refinement = centered
attribution_lag = 2

[estimator]
resolution_deg = 0.5
bias_step_volts = 2
alignment_mode = surface_absent

[sweep]
distances_m = 0.24, 0.30
frequencies_hz = 2.4e9, 2.5e9
tx_powers_dbm = -10, 0, 10
min_detectable_snr_db = 3
)");
    EXPECT_DOUBLE_EQ(*b.link.bypass_fraction, 0.25);
    ASSERT_TRUE(b.link.surface.has_value());
    EXPECT_EQ(b.link.surface->mode, SurfaceMode::reflective);
    EXPECT_DOUBLE_EQ(b.link.surface->reflective_rotation_factor, 0.4);
    EXPECT_DOUBLE_EQ(b.link.surface_side_m, 0.5);
    ASSERT_EQ(b.link.extra_rays.size(), 2u);
    EXPECT_DOUBLE_EQ(b.link.extra_rays[0].phase_deg, 45.0);
    EXPECT_EQ(b.controller.refinement, RefinementRule::centered);
    EXPECT_EQ(b.controller.attribution_lag, 2);
    EXPECT_EQ(b.estimator.alignment_mode, AlignmentMode::surface_absent);
    ASSERT_EQ(b.sweep.distances_m.size(), 2u);
    ASSERT_EQ(b.sweep.tx_powers_dbm.size(), 3u);
    EXPECT_DOUBLE_EQ(*b.sweep.min_detectable_snr_db, 3.0);
}

TEST(ScenarioParse, AutoBypassFraction) {
    const ScenarioBundle b = parse(std::string(kMinimal) + "bypass_fraction = auto\n");
    EXPECT_FALSE(b.link.bypass_fraction.has_value());
    const double f = b.link.effective_bypass_fraction();
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, 1.0);
}

TEST(ScenarioParse, DiagnosticsNameTheOffendingKey) {
    try {
        parse(std::string(kMinimal) + "mystery_knob = 1\n");
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find("mystery_knob"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("[link]"), std::string::npos);
    }

    try {
        parse("[link]\nfrequency_hz = 2.4e9\n");
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find("tx_power_dbm"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("required"), std::string::npos);
    }
}

TEST(ScenarioParse, RejectsUnknownSection) {
    EXPECT_THROW(parse(std::string(kMinimal) + "[turbo]\nboost = 11\n"), config_error);
}

TEST(ScenarioParse, RejectsMalformedValues) {
    EXPECT_THROW(parse(std::string(kMinimal) + "noise_floor_dbm = loud\n"), config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "n_averages = 1.5\n"), config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "bypass_fraction = 1.5\n"), config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "rng_seed = -1\n"), config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "extra_ray = 0.1, 45\n"), config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "crosspol_floor_db = 3\n"), config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "frequency_hz = 1e9\nfrequency_hz = 2e9\n"),
                 config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "[surface]\nmode = diagonal\n"), config_error);
    EXPECT_THROW(parse("frequency_hz = 2.4e9\n"), config_error);  // key before any section
    EXPECT_THROW(parse("[link\n"), config_error);
}

TEST(ScenarioParse, SurfaceCanBeDisabled) {
    const ScenarioBundle b =
        parse(std::string(kMinimal) + "[surface]\npresent = false\nmode = transmissive\n");
    EXPECT_FALSE(b.link.surface.has_value());
}

TEST(ScenarioParse, ValidationErrorsSurfaceAsConfigErrors) {
    EXPECT_THROW(parse(std::string(kMinimal) + "[controller]\nsteps_per_axis = 1\n"),
                 config_error);
    EXPECT_THROW(parse(std::string(kMinimal) + "[sweep]\ndistances_m = 0.24, -1\n"), config_error);
}

TEST(ScenarioFiles, BundledScenariosLoad) {
    const std::filesystem::path dir = POLARLINK_SCENARIO_DIR;
    for (const char* name : {"transmissive.scn", "reflective.scn", "estimator.scn",
                             "frequency_sweep.scn", "power_sweep.scn", "heatmap_noisy.scn"}) {
        SCOPED_TRACE(name);
        const ScenarioBundle b = load_scenario(dir / name);
        EXPECT_TRUE(b.link.surface.has_value());
    }
    const ScenarioBundle freq = load_scenario(dir / "frequency_sweep.scn");
    EXPECT_EQ(freq.sweep.frequencies_hz.size(), 11u);
    EXPECT_FALSE(freq.link.surface->loss_table.empty());
    const ScenarioBundle power = load_scenario(dir / "power_sweep.scn");
    EXPECT_EQ(power.sweep.tx_powers_dbm.size(), 26u);
    ASSERT_TRUE(power.sweep.min_detectable_snr_db.has_value());
}

TEST(ScenarioFiles, MissingFileIsConfigError) {
    EXPECT_THROW(load_scenario("/nonexistent/path.scn"), config_error);
}
