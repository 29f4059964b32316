#include "rotip/perception.hpp"

#include "rotip/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace rotip {

std::size_t BinaryMask::count() const
{
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

BinaryMask binarize(const TactileImage& diff_img, double tau)
{
    if (!(tau > 0.0 && tau < 1.0))
        throw InvalidCommand("threshold must lie in (0, 1)");
    BinaryMask mask{diff_img.width, diff_img.height,
                    std::vector<std::uint8_t>(static_cast<std::size_t>(diff_img.width) * diff_img.height, 0)};
    for (int y = 0; y < diff_img.height; ++y)
        for (int x = 0; x < diff_img.width; ++x)
            mask.cells[static_cast<std::size_t>(y) * diff_img.width + x] = diff_img.max_channel(x, y) > tau ? 1 : 0;
    return mask;
}

namespace {

// Max-channel difference on the chart grid, row-major (row = s).
std::vector<double> chart_difference(const TactileImage& d, const CameraMapping& mapping, const FingerShape& f,
                                     const ChartGrid& chart)
{
    std::vector<double> out(chart.cells(), 0.0);
    const auto* fe = std::get_if<FisheyeMapping>(&mapping);
    if (!fe) {
        for (int j = 0; j < chart.n_s; ++j)
            for (int i = 0; i < chart.n_phi; ++i)
                out[chart.index(i, j)] = d.max_channel(i, j);
        return out;
    }
    for (int j = 0; j < chart.n_s; ++j) {
        for (int i = 0; i < chart.n_phi; ++i) {
            const Vec2 uv = fisheye_project(*fe, surface_point(f, {chart.phi_deg(i), chart.s_mm(f, j)}).point);
            const double x = uv.x() - 0.5, y = uv.y() - 0.5;
            const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
            if (x0 < 0 || y0 < 0 || x0 + 1 >= d.width || y0 + 1 >= d.height)
                continue;
            const double fx = x - x0, fy = y - y0;
            double best = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double v = (1 - fx) * (1 - fy) * d.at(x0, y0, c) + fx * (1 - fy) * d.at(x0 + 1, y0, c) +
                                 (1 - fx) * fy * d.at(x0, y0 + 1, c) + fx * fy * d.at(x0 + 1, y0 + 1, c);
                best = std::max(best, v);
            }
            out[chart.index(i, j)] = best;
        }
    }
    return out;
}

} // namespace

std::vector<ContactDetection> perceive(const TactileImage& img, const TactileImage& ref, double tau,
                                       double min_area, const CameraMapping& mapping, const FingerShape& f,
                                       const ChartGrid& chart)
{
    if (const auto* fe = std::get_if<FisheyeMapping>(&mapping)) {
        if (img.width != fe->width || img.height != fe->height)
            throw DimensionMismatch("image size does not match the fisheye mapping");
    } else if (img.width != chart.n_phi || img.height != chart.n_s) {
        throw DimensionMismatch("image size does not match the unwrapped chart");
    }
    const TactileImage d = diff(img, ref);
    const BinaryMask unused = binarize(d, tau); // validates tau
    (void)unused;

    const std::vector<double> mag = chart_difference(d, mapping, f, chart);
    const std::size_t n = chart.cells();

    // Per-row radius and height of the undeformed surface.
    std::vector<double> rho(chart.n_s), z(chart.n_s);
    for (int j = 0; j < chart.n_s; ++j) {
        const Vec3 p = surface_point(f, {0.0, chart.s_mm(f, j)}).point;
        rho[j] = std::hypot(p.x(), p.y());
        z[j] = p.z();
    }

    std::vector<std::size_t> parent(n);
    for (std::size_t k = 0; k < n; ++k)
        parent[k] = k;
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    };

    // Cells closer than the gap along the surface chord belong to one contact.
    const double dphi = chart.dphi_deg() * kDegToRad;
    const int ks = static_cast<int>(std::ceil(kLobeMergeGapMm / chart.ds(f)));
    for (int j = 0; j < chart.n_s; ++j)
        for (int i = 0; i < chart.n_phi; ++i) {
            const std::size_t a = chart.index(i, j);
            if (mag[a] <= tau)
                continue;
            for (int j2 = j; j2 <= std::min(chart.n_s - 1, j + ks); ++j2) {
                const double rm = std::min(rho[j], rho[j2]);
                const double half = rm > 0.5 * kLobeMergeGapMm ? std::asin(0.5 * kLobeMergeGapMm / rm) : kPi / 2;
                const int kp = std::min(chart.n_phi / 2, static_cast<int>(std::ceil(2 * half / dphi)));
                for (int di = -kp; di <= kp; ++di) {
                    if (j2 == j && di <= 0)
                        continue;
                    const int i2 = ((i + di) % chart.n_phi + chart.n_phi) % chart.n_phi;
                    const std::size_t b = chart.index(i2, j2);
                    if (mag[b] <= tau)
                        continue;
                    const double dz = z[j] - z[j2];
                    const double chord2 = dz * dz + rho[j] * rho[j] + rho[j2] * rho[j2] -
                                          2 * rho[j] * rho[j2] * std::cos(di * dphi);
                    if (chord2 <= kLobeMergeGapMm * kLobeMergeGapMm)
                        unite(a, b);
                }
            }
        }

    struct Group
    {
        double area = 0, w = 0, wc = 0, wsn = 0, peak = 0;
        Vec3 centroid = Vec3::Zero();
        std::vector<std::size_t> cells;
    };
    std::vector<Group> groups;
    std::vector<int> slot(n, -1);
    for (std::size_t k = 0; k < n; ++k) {
        if (mag[k] <= tau)
            continue;
        const std::size_t r = find(k);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        Group& g = groups[static_cast<std::size_t>(slot[r])];
        const int i = static_cast<int>(k % chart.n_phi), j = static_cast<int>(k / chart.n_phi);
        const double m = mag[k], a = chart.cell_area(f, j), phi = chart.phi_deg(i) * kDegToRad;
        g.area += a;
        g.w += m;
        g.wc += m * std::cos(phi);
        g.wsn += m * std::sin(phi);
        g.peak = std::max(g.peak, m);
        g.centroid += a * surface_point(f, {chart.phi_deg(i), chart.s_mm(f, j)}).point;
        g.cells.push_back(k);
    }

    std::vector<ContactDetection> found;
    for (Group& g : groups) {
        if (g.area < min_area)
            continue;
        // s from the midpoint of the group's extent in the tangent plane at its centroid.
        const SurfaceCoord c0 = surface_param_of(f, g.centroid / g.area);
        const SurfacePoint p0 = surface_point(f, c0);
        Vec3 e2 = surface_tangents(f, c0).second;
        Vec3 e1;
        if (e2.norm() < 1e-9) {
            e1 = Vec3::UnitX();
            e2 = Vec3::UnitY();
        } else {
            e2.normalize();
            e1 = p0.normal.cross(e2).normalized();
        }
        double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
        for (std::size_t k : g.cells) {
            const int i = static_cast<int>(k % chart.n_phi), j = static_cast<int>(k / chart.n_phi);
            const Vec3 q = surface_point(f, {chart.phi_deg(i), chart.s_mm(f, j)}).point - p0.point;
            lo1 = std::min(lo1, q.dot(e1));
            hi1 = std::max(hi1, q.dot(e1));
            lo2 = std::min(lo2, q.dot(e2));
            hi2 = std::max(hi2, q.dot(e2));
        }
        const Vec3 mid = p0.point + 0.5 * (lo1 + hi1) * e1 + 0.5 * (lo2 + hi2) * e2;

        ContactDetection det;
        const double phi_c = (g.wc == 0.0 && g.wsn == 0.0) ? 0.0 : std::atan2(g.wsn, g.wc) * kRadToDeg;
        det.centroid = make_surface_coord(f, phi_c, surface_param_of(f, mid).s_mm);
        det.area = g.area;
        det.peak_diff = g.peak;
        det.low_confidence_phi = det.centroid.s_mm < 0.5;
        found.push_back(det);
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const ContactDetection& a, const ContactDetection& b) { return a.area > b.area; });
    return found;
}

std::string to_json_line(const ContactDetection& d)
{
    nlohmann::ordered_json j;
    j["phi_deg"] = d.centroid.phi_deg;
    j["s_mm"] = d.centroid.s_mm;
    j["area_mm2"] = d.area;
    j["peak"] = d.peak_diff;
    return j.dump();
}

} // namespace rotip
