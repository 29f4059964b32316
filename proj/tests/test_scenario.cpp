#include "rotip/errors.hpp"
#include "rotip/runner.hpp"
#include "rotip/scenario.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <iterator>
#include <sstream>

using namespace rotip;
using namespace testing_support;

namespace {

const char* kMinimal = R"({
  "gripper": {"base": {"position_mm": [0, 0, 70]}, "aperture_mm": 30},
  "commands": [{"type": "spin", "omega_deg_s": 10, "duration_s": 1}]
})";

std::string bundled(const std::string& name)
{
    return std::string(ROTIP_SCENARIO_DIR) + "/" + name + ".json";
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string validation_path(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "<accepted>";
}

ScenarioConfig no_frames(ScenarioConfig cfg)
{
    cfg.output.frame_period_s = 0.0;
    return cfg;
}

} // namespace

TEST_CASE("a minimal file fills in every default")
{
    const ScenarioConfig c = parse_scenario(kMinimal);
    CHECK(c.finger == FingerConfig{});
    CHECK(c.gripper.aperture_mm == 30.0);
    CHECK(c.objects.empty());
    CHECK_FALSE(c.fabric.has_value());
    CHECK(c.friction == 1.0);
    CHECK(c.dt_s == 0.01);
    CHECK(c.output == OutputConfig{});
    REQUIRE(c.commands.size() == 1);
    CHECK(std::get<SpinCommand>(c.commands[0]) == SpinCommand{10, 1});
}

TEST_CASE("unknown keys are rejected by name")
{
    const std::string text = R"({
      "finger": {"transmission": {"gaer_ratio": 2}},
      "gripper": {"base": {"position_mm": [0, 0, 70]}, "aperture_mm": 30}
    })";
    try {
        parse_scenario(text);
        FAIL("accepted an unknown key");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("gaer_ratio") != std::string::npos);
    }
}

TEST_CASE("range errors carry a dotted path")
{
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0,70]}, "aperture_mm": 30},
        "commands": [{"type": "spin", "omega_deg_s": 10, "duration_s": -1}]})") == "commands[0].duration_s");
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0,70]}, "aperture_mm": 30}, "dt_s": 0.5})") ==
          "dt_s");
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0,70]}, "aperture_mm": 30},
        "finger": {"transmission": {"gear_num": 0}}})") == "finger.transmission.gear_num");
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0,70]}, "aperture_mm": 30},
        "commands": [{"type": "rollgrasp", "press_depth_mm": 3}]})") == "commands[0].press_depth_mm");
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0,70]}, "aperture_mm": 30},
        "commands": [{"type": "wiggle"}]})") == "commands[0].type");
    CHECK(parse_scenario(R"({"gripper": {"base": {"position_mm": [0,0,70]}}})").gripper.aperture_mm == 30.0);
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0]}, "aperture_mm": 30}})") ==
          "gripper.base.position_mm");
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0,70]}, "aperture_mm": "wide"}})") ==
          "gripper.aperture_mm");
    CHECK(validation_path(R"({"gripper": {"base": {"position_mm": [0,0,70]}, "aperture_mm": 30},
        "output": {"image_format": "png"}})") == "output.image_format");
}

TEST_CASE("malformed JSON reports the line")
{
    const std::string text = "{\n  \"gripper\": {\n    \"aperture_mm\": 30,,\n  }\n}\n";
    try {
        parse_scenario(text);
        FAIL("accepted malformed JSON");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("missing files name the path")
{
    try {
        load_scenario("/nonexistent/where.json");
        FAIL("opened a missing file");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/where.json") != std::string::npos);
    }
}

TEST_CASE("serialize then parse gives the same config")
{
    for (const char* name : {"spin_hexkey", "translate_card", "rollgrasp_fabric"}) {
        const ScenarioConfig c = load_scenario(bundled(name));
        CHECK(parse_scenario(serialize_scenario(c)) == c);
    }

    ScenarioConfig c = parse_scenario(kMinimal);
    c.finger.shape.tip = TipShape::Flat;
    c.finger.lighting = white_ring_lighting();
    c.finger.lighting.diffuser = true;
    c.finger.mapping = FisheyeMapping{};
    c.finger.elastomer.thickness = 1.5;
    c.objects.push_back({"box", Box{1, 2, 3}, {Vec3(1, 2, 3), Vec3(10, 20, 30)}, ConstraintTag::OnTable});
    c.objects.push_back({"plane", HalfSpace{Vec3(0, 0, 1), -2}, {}, ConstraintTag::Fixed});
    c.objects.push_back({"rod", Cylinder{2, 40}, {}, ConstraintTag::GraspedVertical});
    c.fabric = FabricConfig{};
    c.fabric->segments = 7;
    c.commands.push_back(TranslateCommand{-3, 0.25});
    c.commands.push_back(RollGraspCommand{0.5, 90, 45});
    c.commands.push_back(CloseCommand{12});
    c.commands.push_back(MoveBaseCommand{Vec3(1, 2, 3), Vec3(0, 0, 45), 0.5});
    c.dt_s = 0.005;
    c.output.out_dir = "elsewhere";
    CHECK(parse_scenario(serialize_scenario(c)) == c);
    CHECK(serialize_scenario(parse_scenario(serialize_scenario(c))) == serialize_scenario(c));
}

TEST_CASE("empty command list logs only the start")
{
    ScenarioConfig c = parse_scenario(kMinimal);
    c.commands.clear();
    const std::filesystem::path dir = scratch_dir("empty_commands");
    const RunOutputs out = run(c, dir);
    std::istringstream log(slurp(out.log_path));
    std::string line;
    int lines = 0;
    while (std::getline(log, line))
        ++lines;
    CHECK(lines == 2);
    const std::string summary = slurp(out.summary_path);
    CHECK(summary.find("\"success\": []") != std::string::npos);
}

TEST_CASE("bundled translate_card moves the card 13 mm")
{
    const RunArtifacts a = simulate(no_frames(load_scenario(bundled("translate_card"))));
    REQUIRE(a.log.back().obj_position.has_value());
    CHECK(a.log.back().obj_position->y() == doctest::Approx(-13.0).epsilon(0.01));
    CHECK(a.log.front().t == 0.0);
}

TEST_CASE("bundled rollgrasp_fabric succeeds")
{
    const RunArtifacts a = simulate(no_frames(load_scenario(bundled("rollgrasp_fabric"))));
    REQUIRE(a.success.size() == 1);
    REQUIRE(a.success[0].has_value());
    CHECK(*a.success[0]);
}

TEST_CASE("repeated runs are byte-identical")
{
    const ScenarioConfig c = load_scenario(bundled("spin_hexkey"));
    const std::filesystem::path d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
    const RunOutputs a = run(c, d1), b = run(c, d2);
    CHECK(slurp(a.log_path) == slurp(b.log_path));
    REQUIRE(a.frame_paths.size() == b.frame_paths.size());
    CHECK(a.frame_paths.size() >= 10);
    for (std::size_t k = 0; k < a.frame_paths.size(); ++k) {
        CHECK(a.frame_paths[k].filename() == b.frame_paths[k].filename());
        REQUIRE(slurp(a.frame_paths[k]) == slurp(b.frame_paths[k]));
    }
}

TEST_CASE("frames are numbered densely from zero")
{
    const RunArtifacts a = simulate(load_scenario(bundled("translate_card")));
    std::size_t a_frames = 0;
    for (const auto& [name, bytes] : a.frames) {
        if (name.rfind("fingerA_", 0) != 0)
            continue;
        char expected[32];
        std::snprintf(expected, sizeof expected, "fingerA_%06zu.ppm", a_frames++);
        CHECK(name == expected);
        CHECK(bytes.rfind("P6", 0) == 0);
    }
    CHECK(a_frames == 11);
}

TEST_CASE("log columns follow the fixed order")
{
    CHECK(log_csv_header() ==
          "t_s,fingerA_angle_deg,fingerB_angle_deg,aperture_mm,obj_x_mm,obj_y_mm,obj_z_mm,obj_yaw_deg,"
          "n_contacts,max_penetration_mm,fabric_tip_x_mm,fabric_tip_z_mm,success_flag\n");
    LogRecord r;
    r.t = 0.5;
    r.aperture = 30;
    CHECK(log_csv_row(r) == "0.5,0,0,30,,,,,0,0,,,\n");
}

TEST_CASE("a failing command leaves no summary")
{
    ScenarioConfig c = parse_scenario(kMinimal); // spin with nothing to hold
    const std::filesystem::path dir = scratch_dir("failing");
    std::ofstream(dir / "summary.json") << "{}";
    try {
        run(c, dir);
        FAIL("spin without a grasp ran");
    } catch (const SimulationError& e) {
        CHECK(e.command_index() == 0);
    }
    CHECK_FALSE(std::filesystem::exists(dir / "summary.json"));
}

TEST_CASE("make_world mirrors the config")
{
    const ScenarioConfig c = load_scenario(bundled("rollgrasp_fabric"));
    const World w = make_world(c);
    CHECK(w.gripper.aperture == c.gripper.aperture_mm);
    CHECK(w.gripper.base_pose == c.gripper.base.transform());
    REQUIRE(w.fabric.has_value());
    CHECK(w.fabric->segments() == static_cast<std::size_t>(c.fabric->segments));
    CHECK(w.objects.size() == c.objects.size());
    CHECK(w.gripper.fingers[0].shape == c.finger.shape);
    CHECK(w.gripper.fingers[1].transmission == c.finger.transmission);
}
