#include "rotip/render.hpp"

#include "rotip/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rotip {

namespace {

std::vector<Led> led_ring(const std::vector<Vec3>& colors)
{
    std::vector<Led> leds;
    const int n = static_cast<int>(colors.size());
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * kPi * k / n;
        leds.push_back({Vec3(10.0 * std::cos(a), 10.0 * std::sin(a), 0.0), colors[k], 1.0});
    }
    return leds;
}

} // namespace

LightingConfig default_lighting()
{
    const Vec3 r(1, 0, 0), g(0, 1, 0), b(0, 0, 1);
    LightingConfig cfg;
    cfg.leds = led_ring({r, g, b, r, g, b});
    return cfg;
}

LightingConfig white_ring_lighting()
{
    LightingConfig cfg = default_lighting();
    // Same total power per channel as the tri-color ring.
    for (auto& led : cfg.leds)
        led.color = Vec3::Constant(1.0 / 3.0);
    return cfg;
}

void LightingConfig::validate() const
{
    if (leds.empty())
        throw ValidationError("lighting.leds", "at least one LED is required");
    for (std::size_t k = 0; k < leds.size(); ++k) {
        const auto& c = leds[k].color;
        if ((c.array() < 0.0).any() || (c.array() > 1.0).any())
            throw ValidationError("lighting.leds[" + std::to_string(k) + "].color", "channels must be in [0, 1]");
        if (!(leds[k].intensity >= 0.0))
            throw ValidationError("lighting.leds[" + std::to_string(k) + "].intensity", "must be >= 0");
    }
    if (!(k_d >= 0.0))
        throw ValidationError("lighting.k_d", "must be >= 0");
    if (!(k_s >= 0.0))
        throw ValidationError("lighting.k_s", "must be >= 0");
    if (!(ambient >= 0.0))
        throw ValidationError("lighting.ambient", "must be >= 0");
    if (!(phong_exp >= 1.0))
        throw ValidationError("lighting.phong_exp", "must be >= 1");
    if (!(attenuation_length > 0.0))
        throw ValidationError("lighting.attenuation_mm", "must be > 0");
}

void ElastomerConfig::validate() const
{
    if (!(thickness > 0.0))
        throw ValidationError("elastomer.thickness_mm", "must be > 0");
    if (!(smoothing_sigma >= 0.0))
        throw ValidationError("elastomer.smoothing_sigma_mm", "must be >= 0");
}

double FisheyeMapping::field_of_view_deg() const
{
    return 2.0 * (0.5 * std::hypot(width, height) / focal_px) * kRadToDeg;
}

void validate(const CameraMapping& mapping)
{
    if (const auto* fe = std::get_if<FisheyeMapping>(&mapping)) {
        if (fe->width <= 0 || fe->height <= 0)
            throw ValidationError("mapping.width", "dimensions must be positive");
        if (!(fe->focal_px > 0.0))
            throw ValidationError("mapping.focal_px", "must be > 0");
        if (fe->field_of_view_deg() > 200.0)
            throw ValidationError("mapping.focal_px", "field of view exceeds 200 degrees");
    }
}

Vec3 camera_position(const CameraMapping& mapping)
{
    if (const auto* fe = std::get_if<FisheyeMapping>(&mapping))
        return Vec3(0.0, 0.0, fe->camera_z);
    return Vec3::Zero();
}

double TactileImage::max_channel(int x, int y) const
{
    return std::max({at(x, y, 0), at(x, y, 1), at(x, y, 2)});
}

double TactileImage::intensity(int x, int y) const
{
    return (at(x, y, 0) + at(x, y, 1) + at(x, y, 2)) / 3.0;
}

// ---------------------------------------------------------------------------
// Elastomer deformation

namespace {

// Gaussian taps folded onto a ring of n cells spaced `spacing` mm apart.
std::vector<double> periodic_kernel(int n, double spacing, double sigma)
{
    std::vector<double> w(n, 0.0);
    if (spacing <= 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / n);
        return w;
    }
    const long reach = static_cast<long>(std::ceil(4.0 * sigma / spacing));
    for (long k = -reach; k <= reach; ++k) {
        const double x = k * spacing / sigma;
        w[static_cast<std::size_t>(((k % n) + n) % n)] += std::exp(-0.5 * x * x);
    }
    double total = 0.0;
    for (double v : w)
        total += v;
    for (double& v : w)
        v /= total;
    return w;
}

} // namespace

DepthMap zero_depth(const FingerShape& f, const ChartGrid& grid)
{
    return {grid, f, std::vector<double>(grid.cells(), 0.0)};
}

DepthMap deformation_map(const PenetrationField& field, double thickness, double sigma)
{
    if (!(thickness > 0.0))
        throw InvalidCommand("elastomer thickness must be > 0");
    if (!(sigma >= 0.0))
        throw InvalidCommand("smoothing sigma must be >= 0");

    const ChartGrid& g = field.grid;
    const FingerShape& f = field.finger;
    DepthMap out{g, f, std::vector<double>(g.cells(), 0.0)};
    for (std::size_t k = 0; k < g.cells(); ++k)
        out.depth[k] = std::clamp(field.depth[k], 0.0, thickness);
    if (sigma == 0.0)
        return out;

    // Azimuth pass: the ring spacing shrinks toward the tip pole.
    std::vector<double> row(g.n_phi);
    for (int j = 0; j < g.n_s; ++j) {
        double* r = &out.depth[g.index(0, j)];
        if (std::all_of(r, r + g.n_phi, [](double v) { return v == 0.0; }))
            continue;
        const double spacing = surface_radius(f, g.s_mm(f, j)) * g.dphi_deg() * kDegToRad;
        const std::vector<double> w = periodic_kernel(g.n_phi, spacing, sigma);
        std::copy(r, r + g.n_phi, row.begin());
        for (int i = 0; i < g.n_phi; ++i) {
            double acc = 0.0;
            for (int k = 0; k < g.n_phi; ++k) {
                if (w[k] == 0.0)
                    continue;
                acc += w[k] * row[(i - k + g.n_phi) % g.n_phi];
            }
            r[i] = acc;
        }
    }

    // Arclength pass with edge replication.
    const double ds = g.ds(f);
    const int reach = static_cast<int>(std::ceil(4.0 * sigma / ds));
    std::vector<double> taps(2 * reach + 1);
    double total = 0.0;
    for (int k = -reach; k <= reach; ++k) {
        const double x = k * ds / sigma;
        taps[k + reach] = std::exp(-0.5 * x * x);
        total += taps[k + reach];
    }
    for (double& t : taps)
        t /= total;

    std::vector<double> col(g.n_s);
    for (int i = 0; i < g.n_phi; ++i) {
        bool any = false;
        for (int j = 0; j < g.n_s; ++j) {
            col[j] = out.depth[g.index(i, j)];
            any = any || col[j] != 0.0;
        }
        if (!any)
            continue;
        for (int j = 0; j < g.n_s; ++j) {
            double acc = 0.0;
            for (int k = -reach; k <= reach; ++k)
                acc += taps[k + reach] * col[std::clamp(j + k, 0, g.n_s - 1)];
            out.depth[g.index(i, j)] = std::min(acc, thickness);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shading

namespace {

struct ShadingParams
{
    double k_d, k_s, ambient;
};

ShadingParams effective_params(const LightingConfig& light)
{
    // The diffuser trades specular glints for a uniform lift.
    if (light.diffuser)
        return {light.k_d, light.k_s * 0.15, light.ambient + 0.15};
    return {light.k_d, light.k_s, light.ambient};
}

TactileImage shade_chart(const DepthMap& depth, const FingerShape& f, const LightingConfig& light,
                         const Vec3& camera)
{
    const ChartGrid& g = depth.grid;
    const ShadingParams sp = effective_params(light);
    const double a2 = light.attenuation_length * light.attenuation_length;

    std::vector<Vec3> nominal_n(g.cells());
    std::vector<Vec3> deformed(g.cells());
    for (int j = 0; j < g.n_s; ++j) {
        for (int i = 0; i < g.n_phi; ++i) {
            const SurfacePoint s = surface_point(f, {g.phi_deg(i), g.s_mm(f, j)});
            nominal_n[g.index(i, j)] = s.normal;
            deformed[g.index(i, j)] = s.point - depth.at(i, j) * s.normal;
        }
    }

    TactileImage img(g.n_phi, g.n_s);
    for (int j = 0; j < g.n_s; ++j) {
        const bool degenerate_row = surface_radius(f, g.s_mm(f, j)) < 1e-9;
        const int j_lo = std::max(j - 1, 0), j_hi = std::min(j + 1, g.n_s - 1);
        for (int i = 0; i < g.n_phi; ++i) {
            const std::size_t idx = g.index(i, j);
            const Vec3& p = deformed[idx];
            const Vec3 inward = -nominal_n[idx];

            // Shading normal faces the camera side (inside the shell).
            Vec3 n = inward;
            if (!degenerate_row) {
                const Vec3 t_phi =
                    deformed[g.index((i + 1) % g.n_phi, j)] - deformed[g.index((i + g.n_phi - 1) % g.n_phi, j)];
                const Vec3 t_s = deformed[g.index(i, j_hi)] - deformed[g.index(i, j_lo)];
                const Vec3 c = t_phi.cross(t_s);
                if (c.norm() > 1e-12) {
                    n = c.normalized();
                    if (n.dot(inward) < 0.0)
                        n = -n;
                }
            }

            const Vec3 view = (camera - p).normalized();
            Vec3 color = Vec3::Constant(sp.ambient);
            for (const Led& led : light.leds) {
                const Vec3 to_led = led.position - p;
                const double dist2 = to_led.squaredNorm();
                const Vec3 l = to_led / std::sqrt(dist2);
                const double ndl = n.dot(l);
                if (ndl <= 0.0)
                    continue;
                const Vec3 r = 2.0 * ndl * n - l;
                const double rv = std::max(0.0, r.dot(view));
                const double spec = rv > 0.0 ? std::pow(rv, light.phong_exp) : 0.0;
                const double atten = led.intensity / (1.0 + dist2 / a2);
                color += led.color * ((sp.k_d * ndl + sp.k_s * spec) * atten);
            }
            for (int c = 0; c < 3; ++c)
                img.at(i, j, c) = std::clamp(color[c], 0.0, 1.0);
        }
    }
    return img;
}

} // namespace

Vec3 sample_chart_image(const TactileImage& chart_img, const FingerShape& f, const SurfaceCoord& c)
{
    const int w = chart_img.width, h = chart_img.height;
    const double x = c.phi_deg / (360.0 / w);
    const double y = std::clamp(c.s_mm / (f.sensing_arclength / h), 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = std::min(static_cast<int>(std::floor(y)), h - 1);
    const double fx = x - x0, fy = y - y0;
    const int xa = ((x0 % w) + w) % w, xb = (xa + 1) % w;
    const int ya = y0, yb = std::min(y0 + 1, h - 1);
    Vec3 out;
    for (int ch = 0; ch < 3; ++ch) {
        const double top = (1.0 - fx) * chart_img.at(xa, ya, ch) + fx * chart_img.at(xb, ya, ch);
        const double bot = (1.0 - fx) * chart_img.at(xa, yb, ch) + fx * chart_img.at(xb, yb, ch);
        out[ch] = (1.0 - fy) * top + fy * bot;
    }
    return out;
}

std::optional<SurfaceCoord> fisheye_pixel_to_surface(const FisheyeMapping& m, const FingerShape& f, double x,
                                                     double y)
{
    const double dx = x - 0.5 * m.width, dy = y - 0.5 * m.height;
    const double theta = std::hypot(dx, dy) / m.focal_px;
    if (theta >= kPi)
        return std::nullopt;
    const double psi = std::atan2(dy, dx);
    const Vec3 dir(std::sin(theta) * std::cos(psi), std::sin(theta) * std::sin(psi), std::cos(theta));
    const Vec3 origin(0.0, 0.0, m.camera_z);
    const double R = f.radius, L = f.body_length, cap = f.cap_meridian();
    const double phi = theta < 1e-12 ? 0.0 : psi * kRadToDeg;

    // Ray leaves the shell either through the wall or through the tip.
    if (std::sin(theta) > 1e-12) {
        const double t = R / std::sin(theta);
        const double z = m.camera_z + t * std::cos(theta);
        if (z <= L) {
            const double s = cap + (L - z);
            if (s > f.sensing_arclength)
                return std::nullopt;
            return make_surface_coord(f, phi, s);
        }
    }
    if (f.tip == TipShape::Hemisphere) {
        const Vec3 w = origin - Vec3(0.0, 0.0, L);
        const double b = dir.dot(w);
        const double disc = b * b - w.squaredNorm() + R * R;
        if (disc < 0.0)
            return std::nullopt;
        const Vec3 q = origin + (-b + std::sqrt(disc)) * dir;
        const double polar = std::atan2(std::hypot(q.x(), q.y()), q.z() - L);
        const double s = R * polar;
        if (s > f.sensing_arclength)
            return std::nullopt;
        return make_surface_coord(f, polar < 1e-12 ? 0.0 : phi, s);
    }
    if (std::cos(theta) <= 0.0)
        return std::nullopt;
    const double t = (L - m.camera_z) / std::cos(theta);
    const double rho = t * std::sin(theta);
    if (rho > std::min(R, f.sensing_arclength))
        return std::nullopt;
    return make_surface_coord(f, rho < 1e-12 ? 0.0 : phi, rho);
}

Vec2 fisheye_project(const FisheyeMapping& m, const Vec3& p)
{
    const Vec3 d = p - Vec3(0.0, 0.0, m.camera_z);
    const double theta = std::atan2(std::hypot(d.x(), d.y()), d.z());
    const double psi = std::atan2(d.y(), d.x());
    const double r = m.focal_px * theta;
    return {0.5 * m.width + r * std::cos(psi), 0.5 * m.height + r * std::sin(psi)};
}

TactileImage render(const DepthMap& depth, const FingerShape& f, const LightingConfig& light,
                    const CameraMapping& mapping)
{
    if (!(depth.finger == f) || depth.depth.size() != depth.grid.cells())
        throw GridMismatch("depth map does not belong to this finger's chart");

    const TactileImage chart = shade_chart(depth, f, light, camera_position(mapping));
    const auto* fe = std::get_if<FisheyeMapping>(&mapping);
    if (!fe)
        return chart;

    TactileImage img(fe->width, fe->height);
    for (int y = 0; y < fe->height; ++y) {
        for (int x = 0; x < fe->width; ++x) {
            const auto c = fisheye_pixel_to_surface(*fe, f, x + 0.5, y + 0.5);
            if (!c)
                continue;
            const Vec3 rgb = sample_chart_image(chart, f, *c);
            for (int ch = 0; ch < 3; ++ch)
                img.at(x, y, ch) = rgb[ch];
        }
    }
    return img;
}

TactileImage diff(const TactileImage& img, const TactileImage& ref)
{
    if (img.width != ref.width || img.height != ref.height)
        throw DimensionMismatch("images differ in size");
    TactileImage out(img.width, img.height);
    for (std::size_t k = 0; k < img.pixels.size(); ++k)
        out.pixels[k] = std::abs(img.pixels[k] - ref.pixels[k]);
    return out;
}

TactileImage quantize8(const TactileImage& img)
{
    TactileImage out = img;
    for (double& v : out.pixels)
        v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    return out;
}

} // namespace rotip
