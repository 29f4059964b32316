#include "rotip/errors.hpp"
#include "rotip/image_io.hpp"
#include "rotip/perception.hpp"
#include "rotip/runner.hpp"
#include "rotip/scenario.hpp"
#include "rotip/version.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kSimulation = 3;

struct RenderArgs
{
    std::string scene;
    std::string out;
    std::string ref_out;
    std::string diffuser;
    std::string mapping;
    std::string finger = "A";
};

struct PerceiveArgs
{
    std::string image;
    std::string ref;
    double tau = 0.05;
    double min_area = 1.0;
    std::string scene;
};

rotip::CameraMapping mapping_from_flag(const std::string& flag, const rotip::CameraMapping& fallback)
{
    if (flag == "unwrapped")
        return rotip::UnwrappedMapping{};
    if (flag == "fisheye")
        return std::holds_alternative<rotip::FisheyeMapping>(fallback) ? fallback : rotip::FisheyeMapping{};
    return fallback;
}

int cmd_render(const RenderArgs& a)
{
    using namespace rotip;
    ScenarioConfig cfg = load_scenario(a.scene);
    if (!a.diffuser.empty())
        cfg.finger.lighting.diffuser = a.diffuser == "on";
    cfg.finger.mapping = mapping_from_flag(a.mapping, cfg.finger.mapping);

    const World w = make_world(cfg);
    std::vector<PosedObject> objs;
    for (const ObjectState& o : w.objects)
        objs.push_back({o.shape, o.pose});
    const FingerConfig& f = cfg.finger;
    const int k = a.finger == "B" ? 1 : 0;
    const PenetrationField field = penetration_field(f.shape, finger_pose(w.gripper, k), objs, w.params.grid);
    const DepthMap depth = deformation_map(field, f.elastomer.thickness, f.elastomer.smoothing_sigma);
    write_ppm(a.out, render(depth, f.shape, f.lighting, f.mapping));
    if (!a.ref_out.empty())
        write_ppm(a.ref_out, render(zero_depth(f.shape, w.params.grid), f.shape, f.lighting, f.mapping));
    return kOk;
}

int cmd_perceive(const PerceiveArgs& a)
{
    using namespace rotip;
    FingerConfig finger;
    if (!a.scene.empty())
        finger = load_scenario(a.scene).finger;
    for (const std::string& p : {a.image, a.ref})
        if (!std::filesystem::is_regular_file(p))
            throw ValidationError(p, "cannot open image file");
    const TactileImage img = read_ppm(a.image);
    const TactileImage ref = read_ppm(a.ref);

    // Image size tells the two mappings apart.
    const ChartGrid chart;
    CameraMapping mapping = finger.mapping;
    if (img.width == chart.n_phi && img.height == chart.n_s) {
        mapping = UnwrappedMapping{};
    } else if (auto* fe = std::get_if<FisheyeMapping>(&mapping)) {
        fe->width = img.width;
        fe->height = img.height;
    } else {
        FisheyeMapping m;
        m.width = img.width;
        m.height = img.height;
        mapping = m;
    }
    for (const ContactDetection& d : perceive(img, ref, a.tau, a.min_area, mapping, finger.shape, chart))
        std::cout << to_json_line(d) << "\n";
    return kOk;
}

int cmd_run(const std::string& scenario, const std::string& out_dir)
{
    using namespace rotip;
    const ScenarioConfig cfg = load_scenario(scenario);
    const RunOutputs out = run(cfg, std::filesystem::path(out_dir.empty() ? cfg.output.out_dir : out_dir));
    std::cout << out.summary_path.string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"RoTip rotating-fingertip simulator"};
    app.require_subcommand(1);

    RenderArgs ra;
    CLI::App* render = app.add_subcommand("render", "Render one tactile image of a scenario's initial state");
    render->add_option("--scene", ra.scene, "Scenario JSON")->required();
    render->add_option("--out", ra.out, "Output PPM")->required();
    render->add_option("--ref-out", ra.ref_out, "Also write the no-contact reference image");
    render->add_option("--diffuser", ra.diffuser, "Override the diffuser")->check(CLI::IsMember({"on", "off"}));
    render->add_option("--mapping", ra.mapping, "Override the camera mapping")
        ->check(CLI::IsMember({"unwrapped", "fisheye"}));
    render->add_option("--finger", ra.finger, "Which finger to render")->check(CLI::IsMember({"A", "B"}));

    std::string scenario, out_dir;
    CLI::App* runc = app.add_subcommand("run", "Run a scenario and write log, frames and summary");
    runc->add_option("--scenario", scenario, "Scenario JSON")->required();
    runc->add_option("--out-dir", out_dir, "Output directory (defaults to output.out_dir)");

    PerceiveArgs pa;
    CLI::App* perc = app.add_subcommand("perceive", "Detect contacts in a tactile image");
    perc->add_option("--image", pa.image, "Tactile PPM")->required();
    perc->add_option("--ref", pa.ref, "Reference PPM")->required();
    perc->add_option("--tau", pa.tau, "Binarization threshold")->required()->check(CLI::PositiveNumber);
    perc->add_option("--min-area", pa.min_area, "Smallest blob kept, mm^2")->check(CLI::NonNegativeNumber);
    perc->add_option("--scene", pa.scene, "Scenario JSON supplying the finger geometry");

    CLI::App* version = app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (render->parsed())
            return cmd_render(ra);
        if (runc->parsed())
            return cmd_run(scenario, out_dir);
        if (perc->parsed())
            return cmd_perceive(pa);
        if (version->parsed()) {
            std::cout << rotip::kVersion << "\n";
            return kOk;
        }
    } catch (const rotip::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const rotip::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const rotip::SimulationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSimulation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSimulation;
    }
    return kUsage;
}
