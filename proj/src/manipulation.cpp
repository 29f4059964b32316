#include "rotip/manipulation.hpp"

#include "rotip/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rotip {

RigidTransform finger_pose(const GripperState& g, int finger)
{
    const FingerUnit& u = g.fingers[static_cast<std::size_t>(finger)];
    const double x = (u.side == MountSide::A ? -0.5 : 0.5) * g.aperture;
    const double theta = finger_angle(u.actuator, u.transmission).accumulated * kDegToRad;
    return g.base_pose * RigidTransform::from_translation({x, 0.0, 0.0}) *
           RigidTransform::from_axis_angle(Vec3::UnitX(), kPi) * RigidTransform::from_axis_angle(Vec3::UnitZ(), theta);
}

// ---------------------------------------------------------------------------
// Solver

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<int> tag_columns(ConstraintTag tag)
{
    // Unknown order: ωx ωy ωz (rad/s), vx vy vz (mm/s).
    switch (tag) {
    case ConstraintTag::Free:
        return {0, 1, 2, 3, 4, 5};
    case ConstraintTag::OnTable:
        return {2, 3, 4};
    case ConstraintTag::GraspedVertical:
        return {2, 5};
    case ConstraintTag::Fixed:
        return {};
    }
    return {};
}

// Minimal-norm least-squares solution with a relative rank cutoff.
VectorXd pinv_solve(const MatrixXd& a, const VectorXd& b)
{
    if (a.rows() == 0 || a.cols() == 0)
        return VectorXd::Zero(a.cols());
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-6 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    VectorXd ub = svd.matrixU().transpose() * b;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        ub(i) = sv(i) > cutoff ? ub(i) / sv(i) : 0.0;
    return svd.matrixV() * ub;
}

// Orthonormal basis of the null space of a (columns).
MatrixXd null_space(const MatrixXd& a)
{
    const Eigen::Index n = a.cols();
    if (a.rows() == 0)
        return MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-6 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff)
        ++rank;
    return svd.matrixV().rightCols(n - rank);
}

} // namespace

TwistSolution solve_object_twist(std::span<const SolverContact> contacts, const Vec3& origin, ConstraintTag tag,
                                 double mu)
{
    if (contacts.empty())
        throw NoContact("no contacts to solve against");

    const std::vector<int> cols = tag_columns(tag);
    const auto k = static_cast<Eigen::Index>(cols.size());
    const auto m = static_cast<Eigen::Index>(contacts.size());
    const bool tangential = mu > 0.0;

    // d·(v + ω×r) = (r×d)·ω + d·v
    auto row = [&](const Vec3& r, const Vec3& d) {
        Eigen::Matrix<double, 6, 1> full;
        full << r.cross(d), d;
        Eigen::RowVectorXd out(k);
        for (Eigen::Index c = 0; c < k; ++c)
            out(c) = full(cols[static_cast<std::size_t>(c)]);
        return out;
    };

    MatrixXd n_mat(m, k), t_mat(2 * m, k);
    VectorXd n_rhs(m), t_rhs(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const SolverContact& c = contacts[static_cast<std::size_t>(i)];
        const Vec3 n = c.normal.normalized();
        const Vec3 t1 = n.unitOrthogonal();
        const Vec3 t2 = n.cross(t1);
        const Vec3 r = c.object_point - origin;
        n_mat.row(i) = row(r, n);
        n_rhs(i) = n.dot(c.finger_velocity);
        t_mat.row(2 * i) = row(r, t1);
        t_mat.row(2 * i + 1) = row(r, t2);
        t_rhs(2 * i) = t1.dot(c.finger_velocity);
        t_rhs(2 * i + 1) = t2.dot(c.finger_velocity);
    }

    VectorXd x = VectorXd::Zero(k);
    if (k > 0) {
        x = pinv_solve(n_mat, n_rhs);
        if (tangential) {
            const MatrixXd z = null_space(n_mat);
            if (z.cols() > 0)
                x += z * pinv_solve(t_mat * z, t_rhs - t_mat * x);
        }
    }

    Eigen::Matrix<double, 6, 1> full = Eigen::Matrix<double, 6, 1>::Zero();
    for (Eigen::Index c = 0; c < k; ++c)
        full(cols[static_cast<std::size_t>(c)]) = x(c);

    TwistSolution sol;
    sol.twist.angular = full.head<3>() * kRadToDeg;
    sol.twist.linear = full.tail<3>();
    const VectorXd resid = (k > 0 ? VectorXd(t_mat * x) : VectorXd::Zero(2 * m)) - t_rhs;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double s = std::hypot(resid(2 * i), resid(2 * i + 1));
        sol.slip.push_back(s);
        sol.modes.push_back(s > 1e-6 ? ContactMode::Sliding : ContactMode::Sticking);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Contacts

namespace {

bool is_movable(const ObjectState& o)
{
    return o.tag != ConstraintTag::Fixed;
}

} // namespace

std::vector<ContactRecord> find_contacts(const World& w)
{
    std::vector<ContactRecord> out;
    for (int k = 0; k < 2; ++k) {
        const FingerShape& f = w.gripper.fingers[static_cast<std::size_t>(k)].shape;
        const RigidTransform pose = finger_pose(w.gripper, k);
        // Every sensing point lies within this distance of the finger origin.
        const double reach = std::hypot(f.radius, f.tip_height());
        std::vector<PosedObject> near;
        std::vector<int> index;
        for (std::size_t i = 0; i < w.objects.size(); ++i) {
            const ObjectState& o = w.objects[i];
            if (sdf(o.shape, o.pose, pose.translation()) > reach)
                continue;
            near.push_back({o.shape, o.pose});
            index.push_back(static_cast<int>(i));
        }
        if (near.empty())
            continue;
        const PenetrationField field = penetration_field(f, pose, near, w.params.grid);
        for (const ContactPatch& patch : extract_patches(field, w.params.min_depth, w.params.min_area)) {
            const PosedObject& obj = near[static_cast<std::size_t>(patch.object_id)];
            const ContactPatch refined = refine_contact(f, pose, obj, patch);
            ContactRecord rec;
            rec.finger = k;
            rec.object = index[static_cast<std::size_t>(patch.object_id)];
            rec.point = refined.point;
            rec.normal = refined.normal;
            rec.penetration = refined.max_penetration;
            out.push_back(rec);
        }
    }
    return out;
}

double max_penetration(const World& w)
{
    double best = 0.0;
    for (const ContactRecord& c : find_contacts(w))
        if (is_movable(w.objects[static_cast<std::size_t>(c.object)]))
            best = std::max(best, c.penetration);
    return best;
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

RigidTransform integrate_pose(const RigidTransform& pose, const Twist& tw, double dt)
{
    const Vec3 w = tw.angular * kDegToRad;
    const double angle = w.norm() * dt;
    Quat q = pose.rotation();
    if (angle > 0.0)
        q = Quat(Eigen::AngleAxisd(angle, w.normalized())) * q;
    return {q, pose.translation() + tw.linear * dt};
}

std::vector<ContactRecord> cached_contacts(World& w)
{
    auto key_matches = [&](const ContactCache& c) {
        if (!(c.base_pose == w.gripper.base_pose) || c.aperture != w.gripper.aperture ||
            c.object_poses.size() != w.objects.size())
            return false;
        for (std::size_t i = 0; i < w.objects.size(); ++i)
            if (!(c.object_poses[i] == w.objects[i].pose))
                return false;
        return true;
    };
    if (!w.cache || !key_matches(*w.cache)) {
        ContactCache c;
        c.base_pose = w.gripper.base_pose;
        c.aperture = w.gripper.aperture;
        for (const ObjectState& o : w.objects)
            c.object_poses.push_back(o.pose);
        c.contacts = find_contacts(w);
        w.cache = std::move(c);
    }
    return w.cache->contacts;
}

void move_base(GripperState& g, double dt)
{
    const double max_step = kBaseSpeed * dt;
    const Vec3 d = g.base_target.translation() - g.base_pose.translation();
    const double dist = d.norm();
    if (dist <= max_step) {
        g.base_pose = g.base_target;
    } else {
        const double frac = max_step / dist;
        g.base_pose = RigidTransform(g.base_pose.rotation().slerp(frac, g.base_target.rotation()),
                                     g.base_pose.translation() + d * frac);
    }
    const double da = g.aperture_target - g.aperture;
    g.aperture = std::abs(da) <= max_step ? g.aperture_target : g.aperture + std::copysign(max_step, da);
}

// Finger nodes of the fabric strip currently inside each finger.
void update_chain_contacts(FabricChain& chain, const GripperState& g)
{
    const std::vector<Vec2> nodes = chain.nodes();
    for (int k = 0; k < 2; ++k) {
        const FingerShape& f = g.fingers[static_cast<std::size_t>(k)].shape;
        const RigidTransform inv = finger_pose(g, k).inverse();
        int deepest = -1;
        double best = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const double d = finger_sdf(f, inv.apply(chain.node_world(nodes[i])));
            if (d < best) {
                best = d;
                deepest = static_cast<int>(i);
            }
        }
        int& locked = chain.contact_node[k];
        if (deepest < 0)
            locked = -1;
        else if (locked < 0)
            locked = deepest;
    }
}

} // namespace

World step_world(const World& w, double dt, StepReport* report)
{
    if (!(dt > 0.0 && dt <= 0.1))
        throw InvalidCommand("dt must lie in (0, 0.1]");

    World n = w;
    std::array<Vec3, 2> old_origin;
    std::array<double, 2> spin{};
    for (int k = 0; k < 2; ++k) {
        FingerUnit& u = n.gripper.fingers[static_cast<std::size_t>(k)];
        old_origin[static_cast<std::size_t>(k)] = finger_pose(w.gripper, k).translation();
        const double before = finger_angle(u.actuator, u.transmission).accumulated;
        u.actuator = step_actuator(u.actuator, u.transmission, dt);
        spin[static_cast<std::size_t>(k)] = (finger_angle(u.actuator, u.transmission).accumulated - before) / dt;
    }
    move_base(n.gripper, dt);

    std::array<RigidTransform, 2> poses{finger_pose(n.gripper, 0), finger_pose(n.gripper, 1)};
    std::array<RigidMotion, 2> motion;
    for (std::size_t k = 0; k < 2; ++k) {
        motion[k] = finger_motion(poses[k], spin[k]);
        motion[k].twist.linear = (poses[k].translation() - old_origin[k]) / dt;
    }

    std::vector<ContactRecord> contacts = cached_contacts(n);
    StepReport rep;
    rep.finger_poses = poses;
    rep.spin_deg_s = spin;
    for (const ObjectState& o : n.objects)
        rep.object_poses.push_back(o.pose);

    for (std::size_t i = 0; i < n.objects.size(); ++i) {
        ObjectState& obj = n.objects[i];
        obj.twist = Twist{};
        if (!is_movable(obj))
            continue;
        std::vector<SolverContact> sc;
        std::vector<std::size_t> which;
        for (std::size_t c = 0; c < contacts.size(); ++c) {
            if (contacts[c].object != static_cast<int>(i))
                continue;
            const ContactRecord& rec = contacts[c];
            const std::size_t k = static_cast<std::size_t>(rec.finger);
            sc.push_back({rec.point, project_to_surface(obj.shape, obj.pose, rec.point), rec.normal,
                          motion[k].velocity_at(rec.point)});
            which.push_back(c);
        }
        if (sc.empty())
            continue;
        const TwistSolution sol = solve_object_twist(sc, obj.pose.translation(), obj.tag, n.params.friction);
        obj.twist = sol.twist;
        for (std::size_t j = 0; j < which.size(); ++j) {
            contacts[which[j]].mode = sol.modes[j];
            contacts[which[j]].slip = sol.slip[j];
        }
    }
    for (const ObjectState& o : n.objects)
        rep.object_twists.push_back(o.twist);
    rep.contacts = contacts;

    for (ObjectState& o : n.objects)
        if (is_movable(o))
            o.pose = integrate_pose(o.pose, o.twist, dt);

    if (n.fabric) {
        update_chain_contacts(*n.fabric, n.gripper);
        std::vector<ChainContact> cc;
        for (int k = 0; k < 2; ++k) {
            const int node = n.fabric->contact_node[k];
            if (node < 1)
                continue;
            const FingerUnit& u = n.gripper.fingers[static_cast<std::size_t>(k)];
            const double sense = u.side == MountSide::B ? 1.0 : -1.0;
            cc.push_back({node, sense * spin[static_cast<std::size_t>(k)] * kDegToRad * u.shape.radius});
        }
        n.fabric = step_fabric(*n.fabric, cc, dt);
    }

    // Push objects back out where the step left them too deep.
    const double limit = n.params.elastomer.thickness + 0.1;
    std::vector<ContactRecord> after = cached_contacts(n);
    bool pushed = false;
    for (const ContactRecord& c : after) {
        ObjectState& o = n.objects[static_cast<std::size_t>(c.object)];
        if (!is_movable(o) || c.penetration <= limit)
            continue;
        o.pose = RigidTransform(o.pose.rotation(), o.pose.translation() + c.normal * (c.penetration - limit));
        pushed = true;
    }
    if (pushed)
        after = cached_contacts(n);

    // Squeezed from both sides the push cancels out; the gripper stalls instead.
    const bool gripper_moved =
        !(n.gripper.base_pose == w.gripper.base_pose) || n.gripper.aperture != w.gripper.aperture;
    if (gripper_moved) {
        bool stuck = false;
        for (const ContactRecord& c : after)
            stuck = stuck || (is_movable(n.objects[static_cast<std::size_t>(c.object)]) && c.penetration > limit);
        if (stuck) {
            n.gripper.base_pose = w.gripper.base_pose;
            n.gripper.aperture = w.gripper.aperture;
            after = cached_contacts(n);
        }
    }

    n.time = w.time + dt;
    if (report) {
        rep.t = n.time;
        rep.max_penetration = 0.0;
        for (const ContactRecord& c : after)
            rep.max_penetration = std::max(rep.max_penetration, c.penetration);
        *report = std::move(rep);
    }
    return n;
}

// ---------------------------------------------------------------------------
// Primitives

LogRecord make_log_record(const World& w, int n_contacts)
{
    LogRecord r;
    r.t = w.time;
    const GripperState& g = w.gripper;
    r.finger_a_deg = finger_angle(g.fingers[0].actuator, g.fingers[0].transmission).accumulated;
    r.finger_b_deg = finger_angle(g.fingers[1].actuator, g.fingers[1].transmission).accumulated;
    r.aperture = g.aperture;
    for (const ObjectState& o : w.objects) {
        if (!is_movable(o))
            continue;
        r.obj_position = o.pose.translation();
        r.obj_yaw_deg = o.pose.yaw_deg();
        break;
    }
    r.n_contacts = n_contacts;
    if (w.fabric)
        r.fabric_tip = w.fabric->tip();
    return r;
}

namespace {

// Runs `steps` world steps, logging each.
void run_steps(PrimitiveResult& res, long steps, double dt, const StepObserver& obs)
{
    for (long i = 0; i < steps; ++i) {
        StepReport rep;
        res.world = step_world(res.world, dt, &rep);
        LogRecord rec = make_log_record(res.world, static_cast<int>(rep.contacts.size()));
        rec.max_penetration = rep.max_penetration;
        res.log.push_back(rec);
        if (obs)
            obs(res.world, rep);
    }
}

long step_count(double duration_s, double dt)
{
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
        throw InvalidCommand("duration must be > 0");
    return std::max(1L, std::lround(duration_s / dt));
}

void set_finger_rate(World& w, int k, double finger_deg_s)
{
    FingerUnit& u = w.gripper.fingers[static_cast<std::size_t>(k)];
    u.actuator = set_command(u.actuator, VelocityCommand{actuator_rate_for_finger(finger_deg_s, u.transmission)},
                             u.transmission);
}

template <typename Shape>
void require_grasp(const World& w, const char* what)
{
    const std::vector<ContactRecord> contacts = find_contacts(w);
    for (std::size_t i = 0; i < w.objects.size(); ++i) {
        const ObjectState& o = w.objects[i];
        if (!is_movable(o) || !std::holds_alternative<Shape>(o.shape))
            continue;
        bool by[2] = {false, false};
        for (const ContactRecord& c : contacts)
            if (c.object == static_cast<int>(i))
                by[c.finger] = true;
        if (by[0] && by[1])
            return;
    }
    throw NotGrasped(std::string("no ") + what + " held by both fingers");
}

PrimitiveResult rotate_both(const World& w, double omega_a, double omega_b, double duration_s, double dt,
                            const StepObserver& obs)
{
    if (!std::isfinite(omega_a) || !std::isfinite(omega_b))
        throw InvalidCommand("rate must be finite");
    const long steps = step_count(duration_s, dt);
    PrimitiveResult res{w, {}, {}};
    set_finger_rate(res.world, 0, omega_a);
    set_finger_rate(res.world, 1, omega_b);
    run_steps(res, steps, dt, obs);
    set_finger_rate(res.world, 0, 0.0);
    set_finger_rate(res.world, 1, 0.0);
    return res;
}

} // namespace

PrimitiveResult primitive_spin(const World& w, double omega_deg_s, double duration_s, double dt,
                               const StepObserver& obs)
{
    require_grasp<Cylinder>(w, "cylinder");
    return rotate_both(w, omega_deg_s, omega_deg_s, duration_s, dt, obs);
}

PrimitiveResult primitive_translate(const World& w, double omega_deg_s, double duration_s, double dt,
                                    const StepObserver& obs)
{
    require_grasp<Box>(w, "box");
    return rotate_both(w, omega_deg_s, -omega_deg_s, duration_s, dt, obs);
}

PrimitiveResult primitive_close(const World& w, double aperture_mm, double dt, const StepObserver& obs)
{
    if (!(aperture_mm >= 0.0) || !std::isfinite(aperture_mm))
        throw InvalidCommand("aperture must be >= 0");
    PrimitiveResult res{w, {}, {}};
    res.world.gripper.aperture_target = aperture_mm;
    const double travel = std::abs(aperture_mm - w.gripper.aperture);
    const long steps = std::max(1L, static_cast<long>(std::ceil(travel / (kBaseSpeed * dt) - 1e-9)));
    run_steps(res, steps, dt, obs);
    return res;
}

PrimitiveResult primitive_move_base(const World& w, const MoveBaseCommand& cmd, double dt, const StepObserver& obs)
{
    const long steps = step_count(cmd.duration_s, dt);
    PrimitiveResult res{w, {}, {}};
    res.world.gripper.base_target = RigidTransform::from_rpy_deg(cmd.rpy_deg, cmd.position_mm);
    run_steps(res, steps, dt, obs);
    return res;
}

PrimitiveResult primitive_rollgrasp(const World& w, const RollGraspCommand& cmd, double dt, const StepObserver& obs)
{
    if (!w.fabric)
        throw NoFabric("roll-grasp needs a fabric strip");
    const double t_el = w.params.elastomer.thickness;
    if (!(cmd.press_depth_mm > 0.0 && cmd.press_depth_mm <= t_el))
        throw InvalidCommand("press depth must lie in (0, elastomer thickness]");
    if (!std::isfinite(cmd.roll_angle_deg))
        throw InvalidCommand("roll angle must be finite");
    if (!(cmd.roll_speed_deg_s > 0.0) || !std::isfinite(cmd.roll_speed_deg_s))
        throw InvalidCommand("roll speed must be > 0");

    PrimitiveResult res{w, {}, {}};
    World& cur = res.world;

    // (1) lower the base until finger A's pole sits press_depth below the strip.
    {
        const FingerShape& fa = cur.gripper.fingers[0].shape;
        const Vec3 pole = finger_pose(cur.gripper, 0).apply({0.0, 0.0, fa.tip_height()});
        const std::vector<Vec2> nodes = cur.fabric->nodes();
        std::size_t nearest = 0;
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (std::abs(nodes[i].x() - pole.x()) < std::abs(nodes[nearest].x() - pole.x()))
                nearest = i;
        const double dz = nodes[nearest].y() - cmd.press_depth_mm - pole.z();
        cur.gripper.base_target = RigidTransform(cur.gripper.base_pose.rotation(),
                                                 cur.gripper.base_pose.translation() + Vec3(0.0, 0.0, dz));
        cur.gripper.aperture_target = cur.gripper.aperture;
        const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(dz) / (kBaseSpeed * dt) - 1e-9)));
        run_steps(res, steps, dt, obs);
    }

    // (2) finger B rolls the corner.
    {
        const long steps = std::lround(std::abs(cmd.roll_angle_deg) / (cmd.roll_speed_deg_s * dt));
        set_finger_rate(cur, 1, std::copysign(cmd.roll_speed_deg_s, cmd.roll_angle_deg));
        run_steps(res, steps, dt, obs);
        set_finger_rate(cur, 1, 0.0);
    }

    // (3) close onto the rolled corner, leaving room for the cloth.
    {
        const double target = 2.0 * cur.gripper.fingers[0].shape.radius + 2.0;
        PrimitiveResult closed = primitive_close(cur, target, dt, obs);
        cur = std::move(closed.world);
        res.log.insert(res.log.end(), closed.log.begin(), closed.log.end());
    }

    const Vec2 tip = cur.fabric->tip();
    const Vec3 local = cur.gripper.base_pose.inverse().apply(cur.fabric->node_world(tip));
    res.success = std::abs(local.x()) < 0.5 * cur.gripper.aperture + t_el;
    if (!res.log.empty())
        res.log.back().success = res.success;
    return res;
}

PrimitiveResult execute(const World& w, const PrimitiveCommand& cmd, double dt, const StepObserver& obs)
{
    return std::visit(
        [&](const auto& c) -> PrimitiveResult {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, SpinCommand>)
                return primitive_spin(w, c.omega_deg_s, c.duration_s, dt, obs);
            else if constexpr (std::is_same_v<T, TranslateCommand>)
                return primitive_translate(w, c.omega_deg_s, c.duration_s, dt, obs);
            else if constexpr (std::is_same_v<T, RollGraspCommand>)
                return primitive_rollgrasp(w, c, dt, obs);
            else if constexpr (std::is_same_v<T, CloseCommand>)
                return primitive_close(w, c.aperture_mm, dt, obs);
            else
                return primitive_move_base(w, c, dt, obs);
        },
        cmd);
}

} // namespace rotip
