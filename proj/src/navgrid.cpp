#include "tabsa/navgrid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "tabsa/crowd.hpp"

namespace tabsa {

void OccupancyView::clear_dynamic() {
    std::fill(dynamic_.begin(), dynamic_.end(), 0);
}

int OccupancyView::dynamic_blocked_count() const {
    return static_cast<int>(std::count(dynamic_.begin(), dynamic_.end(), 1));
}

void OccupancyView::embed_pedestrians(const std::vector<PedestrianState>& pedestrians) {
    clear_dynamic();
    const double res = map_->resolution;
    for (const PedestrianState& p : pedestrians) {
        if (!p.active) continue;
        int x0 = std::max(0, static_cast<int>((p.position.x - p.radius) / res));
        int x1 = std::min(map_->width_cells - 1,
                          static_cast<int>((p.position.x + p.radius) / res));
        int y0 = std::max(0, static_cast<int>((p.position.y - p.radius) / res));
        int y1 = std::min(map_->height_cells - 1,
                          static_cast<int>((p.position.y + p.radius) / res));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                // Disc-square intersection: clamp the disc center to the cell.
                double cx = std::clamp(p.position.x, x * res, (x + 1) * res);
                double cy = std::clamp(p.position.y, y * res, (y + 1) * res);
                double dx = p.position.x - cx;
                double dy = p.position.y - cy;
                if (dx * dx + dy * dy <= p.radius * p.radius) {
                    dynamic_[static_cast<std::size_t>(y) * map_->width_cells + x] = 1;
                }
            }
        }
    }
}

namespace {

struct AStarScratch {
    std::vector<double> g;
    std::vector<int> parent;
    std::vector<std::uint8_t> closed;
    std::size_t size = 0;

    void reset(std::size_t n) {
        if (size != n) {
            g.assign(n, kUnreachable);
            parent.assign(n, -1);
            closed.assign(n, 0);
            size = n;
        } else {
            std::fill(g.begin(), g.end(), kUnreachable);
            std::fill(parent.begin(), parent.end(), -1);
            std::fill(closed.begin(), closed.end(), 0);
        }
    }
};

thread_local AStarScratch scratch;

double octile(int dx, int dy, double res) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    int lo = std::min(dx, dy);
    int hi = std::max(dx, dy);
    return res * (hi - lo) + res * std::sqrt(2.0) * lo;
}

} // namespace

std::optional<PlannedPath> plan_path(const OccupancyView& view, const Vec2& start,
                                     const Vec2& goal) {
    const EnvironmentMap& map = view.map();
    Cell sc = map.cell_of(start);
    Cell gc = map.cell_of(goal);
    if (!map.in_bounds(sc) || !map.in_bounds(gc)) return std::nullopt;
    if (!view.traversable(sc) || !view.traversable(gc)) return std::nullopt;

    const int W = map.width_cells;
    const int H = map.height_cells;
    const double res = map.resolution;
    const int start_idx = map.index(sc);
    const int goal_idx = map.index(gc);

    if (start_idx == goal_idx) {
        PlannedPath p;
        p.waypoints = {map.cell_center(sc)};
        p.length = 0.0;
        return p;
    }

    scratch.reset(map.grid.size());
    auto& g = scratch.g;
    auto& parent = scratch.parent;
    auto& closed = scratch.closed;

    using Entry = std::tuple<double, double, int>; // f, h, cell index
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;

    g[static_cast<std::size_t>(start_idx)] = 0.0;
    double h0 = octile(gc.x - sc.x, gc.y - sc.y, res);
    open.emplace(h0, h0, start_idx);

    static const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const double diag = res * std::sqrt(2.0);

    while (!open.empty()) {
        auto [f, h, idx] = open.top();
        open.pop();
        if (closed[static_cast<std::size_t>(idx)]) continue;
        closed[static_cast<std::size_t>(idx)] = 1;
        if (idx == goal_idx) break;

        int cx = idx % W;
        int cy = idx / W;
        double gc_cur = g[static_cast<std::size_t>(idx)];
        for (int k = 0; k < 8; ++k) {
            int nx = cx + dx[k];
            int ny = cy + dy[k];
            if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
            int nidx = ny * W + nx;
            if (closed[static_cast<std::size_t>(nidx)]) continue;
            if (!view.traversable({nx, ny})) continue;
            double ng = gc_cur + (k < 4 ? res : diag);
            if (ng < g[static_cast<std::size_t>(nidx)]) {
                g[static_cast<std::size_t>(nidx)] = ng;
                parent[static_cast<std::size_t>(nidx)] = idx;
                double nh = octile(gc.x - nx, gc.y - ny, res);
                open.emplace(ng + nh, nh, nidx);
            }
        }
    }

    if (!closed[static_cast<std::size_t>(goal_idx)]) return std::nullopt;

    PlannedPath path;
    for (int idx = goal_idx; idx != -1; idx = parent[static_cast<std::size_t>(idx)]) {
        path.waypoints.push_back(map.cell_center({idx % W, idx / W}));
    }
    std::reverse(path.waypoints.begin(), path.waypoints.end());
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
        path.length += distance(path.waypoints[i - 1], path.waypoints[i]);
    }
    return path;
}

double path_length(const OccupancyView& view, const Vec2& a, const Vec2& b) {
    auto path = plan_path(view, a, b);
    return path ? path->length : kUnreachable;
}

std::vector<double> distances_to_targets(const OccupancyView& view, const Vec2& start,
                                         const std::vector<Cell>& targets) {
    const EnvironmentMap& map = view.map();
    std::vector<double> out(targets.size(), kUnreachable);
    Cell sc = map.cell_of(start);
    if (!view.traversable(sc)) return out;

    const int W = map.width_cells;
    const int H = map.height_cells;
    const double res = map.resolution;

    scratch.reset(map.grid.size());
    auto& g = scratch.g;
    auto& closed = scratch.closed;

    // Mark how many distinct target cells remain unsettled.
    std::vector<int> target_index(map.grid.size(), -1);
    int pending = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!map.in_bounds(targets[i])) continue;
        int idx = map.index(targets[i]);
        if (target_index[static_cast<std::size_t>(idx)] < 0) {
            target_index[static_cast<std::size_t>(idx)] = static_cast<int>(i);
            ++pending;
        }
    }

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    g[static_cast<std::size_t>(map.index(sc))] = 0.0;
    open.emplace(0.0, map.index(sc));

    static const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const double diag = res * std::sqrt(2.0);

    while (!open.empty() && pending > 0) {
        auto [d, idx] = open.top();
        open.pop();
        if (closed[static_cast<std::size_t>(idx)]) continue;
        closed[static_cast<std::size_t>(idx)] = 1;
        if (target_index[static_cast<std::size_t>(idx)] >= 0) --pending;

        int cx = idx % W;
        int cy = idx / W;
        for (int k = 0; k < 8; ++k) {
            int nx = cx + dx[k];
            int ny = cy + dy[k];
            if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
            int nidx = ny * W + nx;
            if (closed[static_cast<std::size_t>(nidx)]) continue;
            if (!view.traversable({nx, ny})) continue;
            double nd = d + (k < 4 ? res : diag);
            if (nd < g[static_cast<std::size_t>(nidx)]) {
                g[static_cast<std::size_t>(nidx)] = nd;
                open.emplace(nd, nidx);
            }
        }
    }

    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!map.in_bounds(targets[i])) continue;
        std::size_t idx = static_cast<std::size_t>(map.index(targets[i]));
        if (closed[idx]) out[i] = g[idx];
    }
    return out;
}

PathAdvance advance_along(const PlannedPath& path, const Vec2& from, double dist) {
    PathAdvance out;
    out.position = from;
    if (path.waypoints.empty()) {
        out.reached_end = true;
        return out;
    }
    Vec2 pos = from;
    std::size_t next = 0;
    // Skip waypoints already passed: find the first waypoint we have not
    // reached. The engine replans from the current position each step, so
    // `from` normally precedes waypoint 0 or equals it.
    while (next < path.waypoints.size() && distance(pos, path.waypoints[next]) == 0.0) {
        ++next;
    }
    double remaining = dist;
    while (next < path.waypoints.size() && remaining > 0.0) {
        double seg = distance(pos, path.waypoints[next]);
        if (seg <= remaining) {
            pos = path.waypoints[next];
            remaining -= seg;
            out.traveled += seg;
            ++next;
        } else {
            double t = remaining / seg;
            pos = pos + (path.waypoints[next] - pos) * t;
            out.traveled += remaining;
            remaining = 0.0;
        }
    }
    out.position = pos;
    out.next_waypoint = next;
    out.reached_end = next >= path.waypoints.size();
    return out;
}

} // namespace tabsa
