#include "rotip/scenario.hpp"

#include "rotip/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rotip {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

std::string at_index(const std::string& base, std::size_t i)
{
    return base + "[" + std::to_string(i) + "]";
}

// Object reader that remembers which keys were consumed so the rest can be
// reported as unknown.
class Reader
{
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ValidationError(path_.empty() ? "(root)" : path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string path_of(const std::string& key) const { return join(path_, key); }

    const json* find(const std::string& key)
    {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key)
    {
        const json* v = find(key);
        if (!v)
            throw ValidationError(path_of(key), "missing required key");
        return *v;
    }

    double number(const std::string& key, double def) { return find(key) ? number_req(key) : def; }

    double number_req(const std::string& key)
    {
        const json& v = require(key);
        if (!v.is_number())
            throw ValidationError(path_of(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw ValidationError(path_of(key), "must be finite");
        return d;
    }

    long integer(const std::string& key, long def)
    {
        const json* v = find(key);
        if (!v)
            return def;
        if (!v->is_number_integer())
            throw ValidationError(path_of(key), "expected an integer");
        return v->get<long>();
    }

    bool boolean(const std::string& key, bool def)
    {
        const json* v = find(key);
        if (!v)
            return def;
        if (!v->is_boolean())
            throw ValidationError(path_of(key), "expected true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& def)
    {
        return find(key) ? string_req(key) : def;
    }

    std::string string_req(const std::string& key)
    {
        const json& v = require(key);
        if (!v.is_string())
            throw ValidationError(path_of(key), "expected a string");
        return v.get<std::string>();
    }

    template <int N>
    Eigen::Matrix<double, N, 1> vec(const std::string& key, const Eigen::Matrix<double, N, 1>& def)
    {
        const json* v = find(key);
        if (!v)
            return def;
        if (!v->is_array() || v->size() != static_cast<std::size_t>(N))
            throw ValidationError(path_of(key), "expected an array of " + std::to_string(N) + " numbers");
        Eigen::Matrix<double, N, 1> out;
        for (int i = 0; i < N; ++i) {
            const json& e = (*v)[static_cast<std::size_t>(i)];
            if (!e.is_number() || !std::isfinite(e.get<double>()))
                throw ValidationError(at_index(path_of(key), static_cast<std::size_t>(i)), "expected a finite number");
            out(i) = e.get<double>();
        }
        return out;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw ValidationError(path_of(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

// Re-raises a component's validation error under the scenario path.
template <typename F>
void validate_under(const std::string& prefix, F&& f)
{
    try {
        f();
    } catch (const ValidationError& e) {
        const std::string& p = e.path();
        const std::string msg = std::string(e.what()).substr(p.size() + 2);
        throw ValidationError(p.rfind(prefix, 0) == 0 ? p : join(prefix, p), msg);
    }
}

void check(bool ok, const std::string& path, const char* msg)
{
    if (!ok)
        throw ValidationError(path, msg);
}

PoseConfig read_pose(Reader r)
{
    PoseConfig p;
    p.position_mm = r.vec<3>("position_mm", p.position_mm);
    p.rpy_deg = r.vec<3>("rpy_deg", p.rpy_deg);
    r.finish();
    return p;
}

TransmissionConfig read_transmission(Reader r)
{
    TransmissionConfig t;
    t.gear_num = static_cast<int>(r.integer("gear_num", t.gear_num));
    t.gear_den = static_cast<int>(r.integer("gear_den", t.gear_den));
    t.counts_per_rev = r.integer("counts_per_rev", t.counts_per_rev);
    t.max_speed = r.number("max_speed_deg_s", t.max_speed);
    r.finish();
    return t;
}

LightingConfig read_lighting(Reader r)
{
    const std::string preset = r.string("preset", "tricolor");
    LightingConfig l;
    if (preset == "tricolor")
        l = default_lighting();
    else if (preset == "white")
        l = white_ring_lighting();
    else
        throw ValidationError(r.path_of("preset"), "expected \"tricolor\" or \"white\"");
    l.diffuser = r.boolean("diffuser", l.diffuser);
    l.k_d = r.number("k_d", l.k_d);
    l.k_s = r.number("k_s", l.k_s);
    l.phong_exp = r.number("phong_exp", l.phong_exp);
    l.ambient = r.number("ambient", l.ambient);
    l.attenuation_length = r.number("attenuation_mm", l.attenuation_length);
    if (const json* leds = r.find("leds")) {
        const std::string path = r.path_of("leds");
        if (!leds->is_array())
            throw ValidationError(path, "expected an array");
        l.leds.clear();
        for (std::size_t i = 0; i < leds->size(); ++i) {
            Reader lr((*leds)[i], at_index(path, i));
            Led led;
            led.position = lr.vec<3>("position_mm", Vec3::Zero());
            led.color = lr.vec<3>("color", Vec3::Ones());
            led.intensity = lr.number("intensity", 1.0);
            lr.finish();
            l.leds.push_back(led);
        }
    }
    r.finish();
    return l;
}

CameraMapping read_mapping(Reader r)
{
    const std::string type = r.string("type", "unwrapped");
    if (type == "unwrapped") {
        r.finish();
        return UnwrappedMapping{};
    }
    if (type != "fisheye")
        throw ValidationError(r.path_of("type"), "expected \"unwrapped\" or \"fisheye\"");
    FisheyeMapping m;
    m.focal_px = r.number("focal_px", m.focal_px);
    m.width = static_cast<int>(r.integer("width", m.width));
    m.height = static_cast<int>(r.integer("height", m.height));
    m.camera_z = r.number("camera_z_mm", m.camera_z);
    r.finish();
    return m;
}

ElastomerConfig read_elastomer(Reader r)
{
    ElastomerConfig e;
    e.thickness = r.number("thickness_mm", e.thickness);
    e.smoothing_sigma = r.number("smoothing_sigma_mm", e.smoothing_sigma);
    r.finish();
    return e;
}

FingerConfig read_finger(Reader r)
{
    FingerConfig f;
    const std::string tip = r.string("tip", "hemisphere");
    if (tip == "hemisphere")
        f.shape.tip = TipShape::Hemisphere;
    else if (tip == "flat")
        f.shape.tip = TipShape::Flat;
    else
        throw ValidationError(r.path_of("tip"), "expected \"hemisphere\" or \"flat\"");
    f.shape.radius = r.number("radius_mm", f.shape.radius);
    f.shape.body_length = r.number("body_length_mm", f.shape.body_length);
    f.shape.sensing_arclength = r.number("sensing_arclength_mm", f.shape.sensing_arclength);
    if (const json* v = r.find("transmission"))
        f.transmission = read_transmission(Reader(*v, r.path_of("transmission")));
    if (const json* v = r.find("lighting"))
        f.lighting = read_lighting(Reader(*v, r.path_of("lighting")));
    if (const json* v = r.find("mapping"))
        f.mapping = read_mapping(Reader(*v, r.path_of("mapping")));
    if (const json* v = r.find("elastomer"))
        f.elastomer = read_elastomer(Reader(*v, r.path_of("elastomer")));
    r.finish();

    validate_under("finger", [&] {
        f.shape.validate();
        f.transmission.validate();
        f.lighting.validate();
        validate(f.mapping);
        f.elastomer.validate();
    });
    return f;
}

ObjectShape read_shape(Reader r)
{
    const std::string type = r.string_req("type");
    ObjectShape s;
    if (type == "sphere") {
        s = Sphere{r.number_req("radius_mm")};
    } else if (type == "cylinder") {
        s = Cylinder{r.number_req("radius_mm"), r.number_req("height_mm")};
    } else if (type == "box") {
        const Vec3 size = r.vec<3>("size_mm", Vec3::Zero());
        if (!r.find("size_mm"))
            throw ValidationError(r.path_of("size_mm"), "missing required key");
        s = Box{size.x(), size.y(), size.z()};
    } else if (type == "halfspace") {
        const Vec3 n = r.vec<3>("normal", Vec3::UnitZ());
        s = HalfSpace{n, r.number("offset_mm", 0.0)};
    } else {
        throw ValidationError(r.path_of("type"), "expected sphere, cylinder, box or halfspace");
    }
    r.finish();
    validate_under(r.path(), [&] { validate(s); });
    return s;
}

ConstraintTag parse_tag(const std::string& s, const std::string& path)
{
    if (s == "free")
        return ConstraintTag::Free;
    if (s == "on_table")
        return ConstraintTag::OnTable;
    if (s == "grasped_vertical")
        return ConstraintTag::GraspedVertical;
    if (s == "fixed")
        return ConstraintTag::Fixed;
    throw ValidationError(path, "expected free, on_table, grasped_vertical or fixed");
}

const char* tag_name(ConstraintTag t)
{
    switch (t) {
    case ConstraintTag::Free:
        return "free";
    case ConstraintTag::OnTable:
        return "on_table";
    case ConstraintTag::GraspedVertical:
        return "grasped_vertical";
    case ConstraintTag::Fixed:
        return "fixed";
    }
    return "free";
}

ObjectConfig read_object(Reader r, std::size_t index)
{
    ObjectConfig o;
    o.name = r.string("name", "object" + std::to_string(index));
    o.shape = read_shape(Reader(r.require("shape"), r.path_of("shape")));
    if (const json* v = r.find("pose"))
        o.pose = read_pose(Reader(*v, r.path_of("pose")));
    o.constraint = parse_tag(r.string("constraint", "free"), r.path_of("constraint"));
    r.finish();
    return o;
}

FabricConfig read_fabric(Reader r)
{
    FabricConfig f;
    f.pin_mm = r.vec<2>("pin_mm", f.pin_mm);
    f.plane_y_mm = r.number("plane_y_mm", f.plane_y_mm);
    f.segments = static_cast<int>(r.integer("segments", f.segments));
    f.segment_length_mm = r.number("segment_length_mm", f.segment_length_mm);
    f.bend_stiffness = r.number("bend_stiffness", f.bend_stiffness);
    f.friction = r.number("friction", f.friction);
    r.finish();
    check(f.segments >= 1, r.path_of("segments"), "must be >= 1");
    check(f.segment_length_mm > 0.0, r.path_of("segment_length_mm"), "must be > 0");
    check(f.bend_stiffness > 0.0, r.path_of("bend_stiffness"), "must be > 0");
    check(f.friction >= 0.0, r.path_of("friction"), "must be >= 0");
    return f;
}

PrimitiveCommand read_command(Reader r, double elastomer_thickness)
{
    const std::string type = r.string_req("type");
    auto positive = [&](const std::string& key) {
        const double v = r.number_req(key);
        check(v > 0.0, r.path_of(key), "must be > 0");
        return v;
    };
    PrimitiveCommand cmd;
    if (type == "spin" || type == "translate") {
        const double omega = r.number_req("omega_deg_s");
        const double duration = positive("duration_s");
        if (type == "spin")
            cmd = SpinCommand{omega, duration};
        else
            cmd = TranslateCommand{omega, duration};
    } else if (type == "rollgrasp") {
        RollGraspCommand c;
        c.press_depth_mm = r.number("press_depth_mm", c.press_depth_mm);
        check(c.press_depth_mm > 0.0 && c.press_depth_mm <= elastomer_thickness, r.path_of("press_depth_mm"),
              "must lie in (0, elastomer thickness]");
        c.roll_angle_deg = r.number("roll_angle_deg", c.roll_angle_deg);
        c.roll_speed_deg_s = r.number("roll_speed_deg_s", c.roll_speed_deg_s);
        check(c.roll_speed_deg_s > 0.0, r.path_of("roll_speed_deg_s"), "must be > 0");
        cmd = c;
    } else if (type == "close") {
        const double a = r.number_req("aperture_mm");
        check(a >= 0.0, r.path_of("aperture_mm"), "must be >= 0");
        cmd = CloseCommand{a};
    } else if (type == "move_base") {
        MoveBaseCommand c;
        c.position_mm = r.vec<3>("position_mm", Vec3::Zero());
        if (!r.find("position_mm"))
            throw ValidationError(r.path_of("position_mm"), "missing required key");
        c.rpy_deg = r.vec<3>("rpy_deg", c.rpy_deg);
        c.duration_s = positive("duration_s");
        cmd = c;
    } else {
        throw ValidationError(r.path_of("type"), "expected spin, translate, rollgrasp, close or move_base");
    }
    r.finish();
    return cmd;
}

OutputConfig read_output(Reader r)
{
    OutputConfig o;
    o.frame_period_s = r.number("frame_period_s", o.frame_period_s);
    check(o.frame_period_s >= 0.0, r.path_of("frame_period_s"), "must be >= 0");
    o.image_format = r.string("image_format", o.image_format);
    check(o.image_format == "ppm", r.path_of("image_format"), "only \"ppm\" is supported");
    o.out_dir = r.string("out_dir", o.out_dir);
    r.finish();
    return o;
}

std::size_t line_of(std::string_view text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

} // namespace

ScenarioConfig parse_scenario(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
        std::string msg = e.what();
        if (auto pos = msg.find("parse error"); pos != std::string::npos)
            msg = msg.substr(pos);
        throw ParseError(line_of(text, byte), msg);
    }

    Reader r(doc, "");
    ScenarioConfig cfg;
    if (const json* v = r.find("finger"))
        cfg.finger = read_finger(Reader(*v, "finger"));
    {
        Reader g(r.require("gripper"), "gripper");
        if (const json* v = g.find("base"))
            cfg.gripper.base = read_pose(Reader(*v, "gripper.base"));
        cfg.gripper.aperture_mm = g.number("aperture_mm", cfg.gripper.aperture_mm);
        check(cfg.gripper.aperture_mm >= 0.0, "gripper.aperture_mm", "must be >= 0");
        g.finish();
    }
    if (const json* v = r.find("objects")) {
        if (!v->is_array())
            throw ValidationError("objects", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i)
            cfg.objects.push_back(read_object(Reader((*v)[i], at_index("objects", i)), i));
    }
    if (const json* v = r.find("fabric"); v && !v->is_null())
        cfg.fabric = read_fabric(Reader(*v, "fabric"));
    cfg.friction = r.number("friction", cfg.friction);
    check(cfg.friction >= 0.0, "friction", "must be >= 0");
    if (const json* v = r.find("commands")) {
        if (!v->is_array())
            throw ValidationError("commands", "expected an array");
        for (std::size_t i = 0; i < v->size(); ++i)
            cfg.commands.push_back(
                read_command(Reader((*v)[i], at_index("commands", i)), cfg.finger.elastomer.thickness));
    }
    cfg.dt_s = r.number("dt_s", cfg.dt_s);
    check(cfg.dt_s > 0.0 && cfg.dt_s <= 0.1, "dt_s", "must lie in (0, 0.1]");
    if (const json* v = r.find("output"))
        cfg.output = read_output(Reader(*v, "output"));
    r.finish();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError(path.string(), "cannot open scenario file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

namespace {

template <int N>
ordered_json arr(const Eigen::Matrix<double, N, 1>& v)
{
    ordered_json a = ordered_json::array();
    for (int i = 0; i < N; ++i)
        a.push_back(v(i));
    return a;
}

ordered_json pose_json(const PoseConfig& p)
{
    return {{"position_mm", arr<3>(p.position_mm)}, {"rpy_deg", arr<3>(p.rpy_deg)}};
}

ordered_json shape_json(const ObjectShape& s)
{
    return std::visit(
        [](const auto& v) -> ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>)
                return {{"type", "sphere"}, {"radius_mm", v.radius}};
            else if constexpr (std::is_same_v<T, Cylinder>)
                return {{"type", "cylinder"}, {"radius_mm", v.radius}, {"height_mm", v.height}};
            else if constexpr (std::is_same_v<T, Box>)
                return {{"type", "box"}, {"size_mm", arr<3>(Vec3(v.wx, v.wy, v.wz))}};
            else
                return {{"type", "halfspace"}, {"normal", arr<3>(v.normal)}, {"offset_mm", v.offset}};
        },
        s);
}

ordered_json command_json(const PrimitiveCommand& c)
{
    return std::visit(
        [](const auto& v) -> ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SpinCommand>)
                return {{"type", "spin"}, {"omega_deg_s", v.omega_deg_s}, {"duration_s", v.duration_s}};
            else if constexpr (std::is_same_v<T, TranslateCommand>)
                return {{"type", "translate"}, {"omega_deg_s", v.omega_deg_s}, {"duration_s", v.duration_s}};
            else if constexpr (std::is_same_v<T, RollGraspCommand>)
                return {{"type", "rollgrasp"},
                        {"press_depth_mm", v.press_depth_mm},
                        {"roll_angle_deg", v.roll_angle_deg},
                        {"roll_speed_deg_s", v.roll_speed_deg_s}};
            else if constexpr (std::is_same_v<T, CloseCommand>)
                return {{"type", "close"}, {"aperture_mm", v.aperture_mm}};
            else
                return {{"type", "move_base"},
                        {"position_mm", arr<3>(v.position_mm)},
                        {"rpy_deg", arr<3>(v.rpy_deg)},
                        {"duration_s", v.duration_s}};
        },
        c);
}

} // namespace

std::string serialize_scenario(const ScenarioConfig& cfg)
{
    const FingerConfig& f = cfg.finger;
    ordered_json leds = ordered_json::array();
    for (const Led& l : f.lighting.leds)
        leds.push_back({{"position_mm", arr<3>(l.position)}, {"color", arr<3>(l.color)}, {"intensity", l.intensity}});

    ordered_json mapping;
    if (const auto* fe = std::get_if<FisheyeMapping>(&f.mapping))
        mapping = {{"type", "fisheye"},
                   {"focal_px", fe->focal_px},
                   {"width", fe->width},
                   {"height", fe->height},
                   {"camera_z_mm", fe->camera_z}};
    else
        mapping = {{"type", "unwrapped"}};

    ordered_json doc;
    doc["finger"] = {
        {"tip", f.shape.tip == TipShape::Flat ? "flat" : "hemisphere"},
        {"radius_mm", f.shape.radius},
        {"body_length_mm", f.shape.body_length},
        {"sensing_arclength_mm", f.shape.sensing_arclength},
        {"transmission",
         {{"gear_num", f.transmission.gear_num},
          {"gear_den", f.transmission.gear_den},
          {"counts_per_rev", f.transmission.counts_per_rev},
          {"max_speed_deg_s", f.transmission.max_speed}}},
        {"lighting",
         {{"diffuser", f.lighting.diffuser},
          {"k_d", f.lighting.k_d},
          {"k_s", f.lighting.k_s},
          {"phong_exp", f.lighting.phong_exp},
          {"ambient", f.lighting.ambient},
          {"attenuation_mm", f.lighting.attenuation_length},
          {"leds", leds}}},
        {"mapping", mapping},
        {"elastomer",
         {{"thickness_mm", f.elastomer.thickness}, {"smoothing_sigma_mm", f.elastomer.smoothing_sigma}}}};
    doc["gripper"] = {{"base", pose_json(cfg.gripper.base)}, {"aperture_mm", cfg.gripper.aperture_mm}};
    ordered_json objects = ordered_json::array();
    for (const ObjectConfig& o : cfg.objects)
        objects.push_back({{"name", o.name},
                           {"shape", shape_json(o.shape)},
                           {"pose", pose_json(o.pose)},
                           {"constraint", tag_name(o.constraint)}});
    doc["objects"] = objects;
    if (cfg.fabric) {
        const FabricConfig& fb = *cfg.fabric;
        doc["fabric"] = {{"pin_mm", arr<2>(fb.pin_mm)},
                         {"plane_y_mm", fb.plane_y_mm},
                         {"segments", fb.segments},
                         {"segment_length_mm", fb.segment_length_mm},
                         {"bend_stiffness", fb.bend_stiffness},
                         {"friction", fb.friction}};
    }
    doc["friction"] = cfg.friction;
    ordered_json commands = ordered_json::array();
    for (const PrimitiveCommand& c : cfg.commands)
        commands.push_back(command_json(c));
    doc["commands"] = commands;
    doc["dt_s"] = cfg.dt_s;
    doc["output"] = {{"frame_period_s", cfg.output.frame_period_s},
                     {"image_format", cfg.output.image_format},
                     {"out_dir", cfg.output.out_dir}};
    return doc.dump(2) + "\n";
}

World make_world(const ScenarioConfig& cfg)
{
    World w;
    w.gripper.base_pose = cfg.gripper.base.transform();
    w.gripper.base_target = w.gripper.base_pose;
    w.gripper.aperture = cfg.gripper.aperture_mm;
    w.gripper.aperture_target = cfg.gripper.aperture_mm;
    for (FingerUnit& u : w.gripper.fingers) {
        u.transmission = cfg.finger.transmission;
        u.shape = cfg.finger.shape;
    }
    for (const ObjectConfig& o : cfg.objects)
        w.objects.push_back({o.name, o.shape, o.pose.transform(), {}, o.constraint});
    if (cfg.fabric) {
        FabricChain c;
        c.pin = cfg.fabric->pin_mm;
        c.plane_y = cfg.fabric->plane_y_mm;
        c.seg_len = cfg.fabric->segment_length_mm;
        c.angles.assign(static_cast<std::size_t>(cfg.fabric->segments), 0.0);
        c.bend_stiffness = cfg.fabric->bend_stiffness;
        c.friction = cfg.fabric->friction;
        w.fabric = c;
    }
    w.params.friction = cfg.friction;
    w.params.elastomer = cfg.finger.elastomer;
    return w;
}

} // namespace rotip
