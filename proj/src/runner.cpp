#include "rotip/runner.hpp"

#include "rotip/errors.hpp"
#include "rotip/image_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>

namespace rotip {

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    std::string s = buf;
    if (s == "-0")
        s = "0";
    return s;
}

std::string frame_name(int finger, std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "finger%c_%06zu.ppm", finger == 0 ? 'A' : 'B', index);
    return buf;
}

class FrameSampler
{
public:
    FrameSampler(const ScenarioConfig& cfg, std::vector<std::pair<std::string, std::string>>& out)
        : cfg_(cfg), out_(out)
    {
    }

    // Renders every sample instant the world clock has reached.
    void update(const World& w)
    {
        const double period = cfg_.output.frame_period_s;
        if (period <= 0.0)
            return;
        const double eps = 1e-9 * cfg_.dt_s;
        while (static_cast<double>(index_) * period <= w.time + eps) {
            capture(w);
            ++index_;
        }
    }

private:
    void capture(const World& w)
    {
        std::vector<PosedObject> objs;
        for (const ObjectState& o : w.objects)
            objs.push_back({o.shape, o.pose});
        const FingerConfig& f = cfg_.finger;
        for (int k = 0; k < 2; ++k) {
            const PenetrationField field = penetration_field(f.shape, finger_pose(w.gripper, k), objs, w.params.grid);
            const DepthMap depth = deformation_map(field, f.elastomer.thickness, f.elastomer.smoothing_sigma);
            out_.emplace_back(frame_name(k, index_), encode_ppm(render(depth, f.shape, f.lighting, f.mapping)));
        }
    }

    const ScenarioConfig& cfg_;
    std::vector<std::pair<std::string, std::string>>& out_;
    std::size_t index_ = 0;
};

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

std::string summary_json(const RunArtifacts& a, double wall_s)
{
    using nlohmann::ordered_json;
    ordered_json objects = ordered_json::array();
    for (const ObjectState& o : a.final_world.objects)
        objects.push_back({{"name", o.name},
                           {"position_mm", vec_json(o.pose.translation())},
                           {"yaw_deg", o.pose.yaw_deg()}});
    ordered_json success = ordered_json::array();
    for (const auto& s : a.success)
        if (s)
            success.push_back(*s);
    ordered_json doc;
    doc["final_time_s"] = a.final_world.time;
    doc["objects"] = objects;
    doc["aperture_mm"] = a.final_world.gripper.aperture;
    doc["base_position_mm"] = vec_json(a.final_world.gripper.base_pose.translation());
    if (a.final_world.fabric) {
        const Vec2 tip = a.final_world.fabric->tip();
        doc["fabric_tip_mm"] = {tip.x(), tip.y()};
    }
    doc["success"] = success;
    doc["wall_time_s"] = wall_s;
    return doc.dump(2) + "\n";
}

} // namespace

std::string log_csv_header()
{
    return "t_s,fingerA_angle_deg,fingerB_angle_deg,aperture_mm,obj_x_mm,obj_y_mm,obj_z_mm,obj_yaw_deg,"
           "n_contacts,max_penetration_mm,fabric_tip_x_mm,fabric_tip_z_mm,success_flag\n";
}

std::string log_csv_row(const LogRecord& r)
{
    std::string s = num(r.t) + "," + num(r.finger_a_deg) + "," + num(r.finger_b_deg) + "," + num(r.aperture) + ",";
    if (r.obj_position)
        s += num(r.obj_position->x()) + "," + num(r.obj_position->y()) + "," + num(r.obj_position->z()) + ",";
    else
        s += ",,,";
    s += (r.obj_yaw_deg ? num(*r.obj_yaw_deg) : "") + ",";
    s += std::to_string(r.n_contacts) + "," + num(r.max_penetration) + ",";
    if (r.fabric_tip)
        s += num(r.fabric_tip->x()) + "," + num(r.fabric_tip->y()) + ",";
    else
        s += ",,";
    if (r.success)
        s += *r.success ? "1" : "0";
    return s + "\n";
}

RunArtifacts simulate(const ScenarioConfig& cfg)
{
    RunArtifacts a;
    World w = make_world(cfg);

    LogRecord first = make_log_record(w, static_cast<int>(find_contacts(w).size()));
    first.max_penetration = max_penetration(w);
    a.log.push_back(first);

    FrameSampler sampler(cfg, a.frames);
    sampler.update(w);
    const StepObserver obs = [&](const World& cur, const StepReport&) { sampler.update(cur); };

    for (std::size_t i = 0; i < cfg.commands.size(); ++i) {
        PrimitiveResult res;
        try {
            res = execute(w, cfg.commands[i], cfg.dt_s, obs);
        } catch (const SimulationError&) {
            throw;
        } catch (const Error& e) {
            throw SimulationError(i, e.what());
        }
        w = std::move(res.world);
        a.log.insert(a.log.end(), res.log.begin(), res.log.end());
        a.success.push_back(res.success);
    }

    a.log_csv = log_csv_header();
    for (const LogRecord& r : a.log)
        a.log_csv += log_csv_row(r);
    a.final_world = std::move(w);
    return a;
}

RunOutputs run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir)
{
    const auto t0 = std::chrono::steady_clock::now();
    RunOutputs out;
    // A summary left by an earlier run must not outlive a failed one.
    std::filesystem::remove(out_dir / "summary.json");
    out.artifacts = simulate(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::filesystem::create_directories(out_dir);
    out.log_path = out_dir / "log.csv";
    write_file(out.log_path, out.artifacts.log_csv);
    for (const auto& [name, bytes] : out.artifacts.frames) {
        out.frame_paths.push_back(out_dir / name);
        write_file(out.frame_paths.back(), bytes);
    }
    out.summary_path = out_dir / "summary.json";
    write_file(out.summary_path, summary_json(out.artifacts, wall));
    return out;
}

} // namespace rotip
