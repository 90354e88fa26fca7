#include "tabsa/worldgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <nlohmann/json.hpp>

namespace tabsa {

namespace {

int to_cells(double meters, double resolution) {
    return std::max(1, static_cast<int>(std::lround(meters / resolution)));
}

struct Grid {
    int w = 0, h = 0;
    std::vector<CellType>* cells = nullptr;

    CellType& at(int x, int y) { return (*cells)[static_cast<std::size_t>(y) * w + x]; }
    CellType get(int x, int y) const { return (*cells)[static_cast<std::size_t>(y) * w + x]; }
};

// Free cells reachable from `start`, 4-connectivity.
int flood_count(const std::vector<CellType>& grid, int w, int h, Cell start) {
    std::vector<std::uint8_t> seen(grid.size(), 0);
    std::deque<Cell> queue{start};
    seen[static_cast<std::size_t>(start.y) * w + start.x] = 1;
    int count = 0;
    while (!queue.empty()) {
        Cell c = queue.front();
        queue.pop_front();
        ++count;
        const int dx[4] = {1, -1, 0, 0};
        const int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            int nx = c.x + dx[k], ny = c.y + dy[k];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
            if (seen[idx] || grid[idx] != CellType::Free) continue;
            seen[idx] = 1;
            queue.push_back({nx, ny});
        }
    }
    return count;
}

int count_free(const std::vector<CellType>& grid) {
    return static_cast<int>(std::count(grid.begin(), grid.end(), CellType::Free));
}

bool free_space_connected(const std::vector<CellType>& grid, int w, int h) {
    int total = count_free(grid);
    if (total == 0) return false;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (grid[static_cast<std::size_t>(y) * w + x] == CellType::Free) {
                return flood_count(grid, w, h, {x, y}) == total;
            }
        }
    }
    return false;
}

struct RoomNode {
    CellRect rect;
    int depth = 0;
};

} // namespace

void EnvParams::validate() const {
    if (width_m <= 0 || height_m <= 0 || resolution <= 0 || min_room_m <= 0 ||
        door_width_m <= 0 || furniture_min_m <= 0 || furniture_max_m < furniture_min_m) {
        throw std::invalid_argument("EnvParams: dimensions must be positive");
    }
    if (min_room_m < 2.0 * door_width_m) {
        throw std::invalid_argument("EnvParams: min_room_m must be >= 2 * door_width_m");
    }
    if (max_depth < 0 || furniture_per_room < 0 || furniture_retry_limit < 0 ||
        objects_per_furniture < 0) {
        throw std::invalid_argument("EnvParams: counts must be non-negative");
    }
    for (double w : spawn_weights.room) {
        if (w < 0) throw std::invalid_argument("EnvParams: spawn weights must be >= 0");
    }
    if (spawn_weights.door < 0 || spawn_weights.entrance < 0 || spawn_weights.room.empty()) {
        throw std::invalid_argument("EnvParams: spawn weights must be >= 0");
    }
}

EnvironmentMap generate_environment(const EnvParams& params, std::uint64_t seed) {
    params.validate();

    EnvironmentMap map;
    map.width_m = params.width_m;
    map.height_m = params.height_m;
    map.resolution = params.resolution;
    map.width_cells = to_cells(params.width_m, params.resolution);
    map.height_cells = to_cells(params.height_m, params.resolution);

    const int W = map.width_cells;
    const int H = map.height_cells;
    const int min_room_c = to_cells(params.min_room_m, params.resolution);
    const int door_c = to_cells(params.door_width_m, params.resolution);

    if (W - 2 < min_room_c || H - 2 < min_room_c) {
        throw GenerationFailed("map interior smaller than minimum room dimension");
    }

    map.grid.assign(static_cast<std::size_t>(W) * H, CellType::Free);
    Grid g{W, H, &map.grid};
    for (int x = 0; x < W; ++x) {
        g.at(x, 0) = CellType::Wall;
        g.at(x, H - 1) = CellType::Wall;
    }
    for (int y = 0; y < H; ++y) {
        g.at(0, y) = CellType::Wall;
        g.at(W - 1, y) = CellType::Wall;
    }

    RandomStream rng(split(seed, "worldgen"));

    // Recursive division: repeatedly split the largest splittable room with
    // a one-cell wall at a random valid offset and punch one door through it.
    std::vector<RoomNode> rooms{{CellRect{1, 1, W - 2, H - 2}, 0}};
    while (true) {
        int best = -1;
        for (std::size_t i = 0; i < rooms.size(); ++i) {
            const RoomNode& r = rooms[i];
            if (r.depth >= params.max_depth) continue;
            bool can_v = r.rect.w >= 2 * min_room_c + 1;
            bool can_h = r.rect.h >= 2 * min_room_c + 1;
            if (!can_v && !can_h) continue;
            if (best < 0 || r.rect.area() > rooms[static_cast<std::size_t>(best)].rect.area()) {
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;

        RoomNode node = rooms[static_cast<std::size_t>(best)];
        const CellRect r = node.rect;
        bool can_v = r.w >= 2 * min_room_c + 1;
        bool can_h = r.h >= 2 * min_room_c + 1;
        bool vertical;
        if (can_v && can_h) {
            vertical = r.w > r.h ? true : (r.h > r.w ? false : rng.bernoulli(0.5));
        } else {
            vertical = can_v;
        }

        RoomNode a, b;
        a.depth = b.depth = node.depth + 1;
        if (vertical) {
            int wall_x = rng.uniform_int(r.x + min_room_c, r.x + r.w - 1 - min_room_c);
            for (int y = r.y; y < r.y + r.h; ++y) g.at(wall_x, y) = CellType::Wall;
            int door_y = rng.uniform_int(r.y, r.y + r.h - door_c);
            Door door;
            for (int y = door_y; y < door_y + door_c; ++y) {
                g.at(wall_x, y) = CellType::Free;
                door.cells.push_back({wall_x, y});
            }
            map.doors.push_back(std::move(door));
            a.rect = {r.x, r.y, wall_x - r.x, r.h};
            b.rect = {wall_x + 1, r.y, r.x + r.w - wall_x - 1, r.h};
        } else {
            int wall_y = rng.uniform_int(r.y + min_room_c, r.y + r.h - 1 - min_room_c);
            for (int x = r.x; x < r.x + r.w; ++x) g.at(x, wall_y) = CellType::Wall;
            int door_x = rng.uniform_int(r.x, r.x + r.w - door_c);
            Door door;
            for (int x = door_x; x < door_x + door_c; ++x) {
                g.at(x, wall_y) = CellType::Free;
                door.cells.push_back({x, wall_y});
            }
            map.doors.push_back(std::move(door));
            a.rect = {r.x, r.y, r.w, wall_y - r.y};
            b.rect = {r.x, wall_y + 1, r.w, r.y + r.h - wall_y - 1};
        }
        rooms[static_cast<std::size_t>(best)] = a;
        rooms.insert(rooms.begin() + best + 1, b);
    }
    map.rooms.reserve(rooms.size());
    for (const RoomNode& r : rooms) map.rooms.push_back(Room{r.rect});

    // Map entrance: one door-width opening in the outer boundary whose
    // interior-adjacent cells are all free.
    {
        struct Span {
            std::vector<Cell> cells;
        };
        std::vector<Span> candidates;
        auto try_horizontal = [&](int y, int iy) {
            for (int x = 1; x + door_c <= W - 1; ++x) {
                bool ok = true;
                for (int k = 0; k < door_c; ++k) {
                    if (g.get(x + k, iy) != CellType::Free) { ok = false; break; }
                }
                if (ok) {
                    Span s;
                    for (int k = 0; k < door_c; ++k) s.cells.push_back({x + k, y});
                    candidates.push_back(std::move(s));
                }
            }
        };
        auto try_vertical = [&](int x, int ix) {
            for (int y = 1; y + door_c <= H - 1; ++y) {
                bool ok = true;
                for (int k = 0; k < door_c; ++k) {
                    if (g.get(ix, y + k) != CellType::Free) { ok = false; break; }
                }
                if (ok) {
                    Span s;
                    for (int k = 0; k < door_c; ++k) s.cells.push_back({x, y + k});
                    candidates.push_back(std::move(s));
                }
            }
        };
        try_horizontal(0, 1);
        try_horizontal(H - 1, H - 2);
        try_vertical(0, 1);
        try_vertical(W - 1, W - 2);
        if (candidates.empty()) {
            throw GenerationFailed("no valid position for the map entrance");
        }
        const Span& pick = candidates[rng.uniform_index(candidates.size())];
        Door entrance;
        entrance.entrance = true;
        for (const Cell& c : pick.cells) {
            g.at(c.x, c.y) = CellType::Free;
            entrance.cells.push_back(c);
        }
        map.doors.push_back(std::move(entrance));
    }

    // Door clearance lookup: no furniture cell may come within the Chebyshev
    // clearance radius of any door cell.
    const int clearance_c = to_cells(params.door_clearance_m, params.resolution);
    std::vector<std::uint8_t> near_door(map.grid.size(), 0);
    for (const Door& d : map.doors) {
        for (const Cell& c : d.cells) {
            for (int y = std::max(0, c.y - clearance_c); y <= std::min(H - 1, c.y + clearance_c); ++y) {
                for (int x = std::max(0, c.x - clearance_c); x <= std::min(W - 1, c.x + clearance_c); ++x) {
                    near_door[static_cast<std::size_t>(y) * W + x] = 1;
                }
            }
        }
    }

    // Furniture: rejection-sampled rectangles per room. A placement is
    // rejected if it overlaps anything, violates door clearance, or would
    // disconnect the free space; a piece that exhausts its retries is
    // skipped.
    const int fmin_c = to_cells(params.furniture_min_m, params.resolution);
    const int fmax_c = std::max(fmin_c, to_cells(params.furniture_max_m, params.resolution));
    for (int room_id = 0; room_id < static_cast<int>(map.rooms.size()); ++room_id) {
        const CellRect room = map.rooms[static_cast<std::size_t>(room_id)].rect;
        for (int piece = 0; piece < params.furniture_per_room; ++piece) {
            bool placed = false;
            for (int attempt = 0; attempt < params.furniture_retry_limit && !placed; ++attempt) {
                int fw = rng.uniform_int(fmin_c, fmax_c);
                int fh = rng.uniform_int(fmin_c, fmax_c);
                if (fw > room.w || fh > room.h) continue;
                int fx = rng.uniform_int(room.x, room.x + room.w - fw);
                int fy = rng.uniform_int(room.y, room.y + room.h - fh);
                bool ok = true;
                for (int y = fy; y < fy + fh && ok; ++y) {
                    for (int x = fx; x < fx + fw && ok; ++x) {
                        std::size_t idx = static_cast<std::size_t>(y) * W + x;
                        if (map.grid[idx] != CellType::Free || near_door[idx]) ok = false;
                    }
                }
                if (!ok) continue;
                for (int y = fy; y < fy + fh; ++y) {
                    for (int x = fx; x < fx + fw; ++x) g.at(x, y) = CellType::Furniture;
                }
                if (!free_space_connected(map.grid, W, H)) {
                    for (int y = fy; y < fy + fh; ++y) {
                        for (int x = fx; x < fx + fw; ++x) g.at(x, y) = CellType::Free;
                    }
                    continue;
                }
                map.furniture.push_back(FurniturePiece{{fx, fy, fw, fh}, room_id});
                placed = true;
            }
        }
    }

    // A fixed number of manipulation objects on each furniture piece, at
    // distinct cells where the footprint allows.
    int object_id = 0;
    for (int fid = 0; fid < static_cast<int>(map.furniture.size()); ++fid) {
        const CellRect fr = map.furniture[static_cast<std::size_t>(fid)].rect;
        std::vector<int> cells(static_cast<std::size_t>(fr.area()));
        for (int i = 0; i < fr.area(); ++i) cells[static_cast<std::size_t>(i)] = i;
        for (int k = 0; k < params.objects_per_furniture; ++k) {
            int remaining = fr.area() - k;
            int local;
            if (remaining > 0) {
                int j = k + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(remaining)));
                std::swap(cells[static_cast<std::size_t>(k)], cells[static_cast<std::size_t>(j)]);
                local = cells[static_cast<std::size_t>(k)];
            } else {
                local = cells[rng.uniform_index(cells.size())];
            }
            Cell c{fr.x + local % fr.w, fr.y + local / fr.w};
            map.objects.push_back(ManipObject{object_id++, map.cell_center(c), fid});
        }
    }

    map.spawn = build_spawn_probability(map, params.spawn_weights);
    return map;
}

SpawnDistribution build_spawn_probability(const EnvironmentMap& map,
                                          const SpawnWeights& weights) {
    for (double w : weights.room) {
        if (w < 0) throw std::invalid_argument("spawn weights must be >= 0");
    }
    if (weights.door < 0 || weights.entrance < 0 || weights.room.empty()) {
        throw std::invalid_argument("spawn weights must be >= 0");
    }

    auto room_weight = [&](int room_id) {
        if (weights.room.size() == 1) return weights.room[0];
        std::size_t i = static_cast<std::size_t>(room_id);
        return i < weights.room.size() ? weights.room[i] : weights.room.back();
    };

    SpawnDistribution dist;
    dist.weight.assign(map.grid.size(), 0.0);

    std::vector<std::int8_t> door_class(map.grid.size(), 0); // 1 door, 2 entrance
    for (const Door& d : map.doors) {
        for (const Cell& c : d.cells) {
            door_class[static_cast<std::size_t>(map.index(c))] = d.entrance ? 2 : 1;
        }
    }

    double total = 0.0;
    for (int y = 0; y < map.height_cells; ++y) {
        for (int x = 0; x < map.width_cells; ++x) {
            Cell c{x, y};
            std::size_t idx = static_cast<std::size_t>(map.index(c));
            if (map.grid[idx] != CellType::Free) continue;
            double w = 0.0;
            if (door_class[idx] == 2) {
                w = weights.entrance;
            } else if (door_class[idx] == 1) {
                w = weights.door;
            } else {
                for (int room_id = 0; room_id < static_cast<int>(map.rooms.size()); ++room_id) {
                    if (map.rooms[static_cast<std::size_t>(room_id)].rect.contains(c)) {
                        w = room_weight(room_id);
                        break;
                    }
                }
            }
            dist.weight[idx] = w;
            total += w;
        }
    }
    if (total <= 0.0) throw AllZeroWeights();

    double cum = 0.0;
    for (std::size_t i = 0; i < dist.weight.size(); ++i) {
        if (dist.weight[i] <= 0.0) continue;
        dist.weight[i] /= total;
        cum += dist.weight[i];
        dist.support.push_back(static_cast<int>(i));
        dist.cdf.push_back(cum);
    }
    if (!dist.cdf.empty()) dist.cdf.back() = 1.0;
    return dist;
}

Cell sample_spawn(const EnvironmentMap& map, const SpawnDistribution& dist,
                  RandomStream& stream) {
    double u = stream.uniform01();
    auto it = std::upper_bound(dist.cdf.begin(), dist.cdf.end(), u);
    std::size_t k = std::min(static_cast<std::size_t>(it - dist.cdf.begin()),
                             dist.support.size() - 1);
    int idx = dist.support[k];
    return {idx % map.width_cells, idx / map.width_cells};
}

std::string map_to_json(const EnvironmentMap& map) {
    nlohmann::json j;
    j["width_m"] = map.width_m;
    j["height_m"] = map.height_m;
    j["resolution"] = map.resolution;
    j["width_cells"] = map.width_cells;
    j["height_cells"] = map.height_cells;

    nlohmann::json rle = nlohmann::json::array();
    std::size_t i = 0;
    while (i < map.grid.size()) {
        std::size_t run = i;
        while (run < map.grid.size() && map.grid[run] == map.grid[i]) ++run;
        rle.push_back({static_cast<int>(map.grid[i]), run - i});
        i = run;
    }
    j["grid_rle"] = std::move(rle);

    j["rooms"] = nlohmann::json::array();
    for (const Room& r : map.rooms) {
        j["rooms"].push_back({r.rect.x, r.rect.y, r.rect.w, r.rect.h});
    }
    j["doors"] = nlohmann::json::array();
    for (const Door& d : map.doors) {
        nlohmann::json cells = nlohmann::json::array();
        for (const Cell& c : d.cells) cells.push_back({c.x, c.y});
        j["doors"].push_back({{"cells", cells}, {"entrance", d.entrance}});
    }
    j["furniture"] = nlohmann::json::array();
    for (const FurniturePiece& f : map.furniture) {
        j["furniture"].push_back(
            {{"rect", {f.rect.x, f.rect.y, f.rect.w, f.rect.h}}, {"room", f.room_id}});
    }
    j["objects"] = nlohmann::json::array();
    for (const ManipObject& o : map.objects) {
        j["objects"].push_back(
            {{"id", o.id}, {"x", o.position.x}, {"y", o.position.y}, {"furniture", o.furniture_id}});
    }
    nlohmann::json spawn_rle = nlohmann::json::array();
    i = 0;
    while (i < map.spawn.weight.size()) {
        std::size_t run = i;
        while (run < map.spawn.weight.size() && map.spawn.weight[run] == map.spawn.weight[i]) ++run;
        spawn_rle.push_back({map.spawn.weight[i], run - i});
        i = run;
    }
    j["spawn_rle"] = std::move(spawn_rle);
    return j.dump();
}

EnvironmentMap map_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    EnvironmentMap map;
    map.width_m = j.at("width_m").get<double>();
    map.height_m = j.at("height_m").get<double>();
    map.resolution = j.at("resolution").get<double>();
    map.width_cells = j.at("width_cells").get<int>();
    map.height_cells = j.at("height_cells").get<int>();

    for (const auto& run : j.at("grid_rle")) {
        CellType v = static_cast<CellType>(run[0].get<int>());
        map.grid.insert(map.grid.end(), run[1].get<std::size_t>(), v);
    }
    for (const auto& r : j.at("rooms")) {
        map.rooms.push_back(Room{{r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), r[3].get<int>()}});
    }
    for (const auto& d : j.at("doors")) {
        Door door;
        door.entrance = d.at("entrance").get<bool>();
        for (const auto& c : d.at("cells")) door.cells.push_back({c[0].get<int>(), c[1].get<int>()});
        map.doors.push_back(std::move(door));
    }
    for (const auto& f : j.at("furniture")) {
        const auto& r = f.at("rect");
        map.furniture.push_back(FurniturePiece{
            {r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), r[3].get<int>()}, f.at("room").get<int>()});
    }
    for (const auto& o : j.at("objects")) {
        map.objects.push_back(ManipObject{o.at("id").get<int>(),
                                          {o.at("x").get<double>(), o.at("y").get<double>()},
                                          o.at("furniture").get<int>()});
    }
    for (const auto& run : j.at("spawn_rle")) {
        map.spawn.weight.insert(map.spawn.weight.end(), run[1].get<std::size_t>(),
                                run[0].get<double>());
    }
    double cum = 0.0;
    for (std::size_t i = 0; i < map.spawn.weight.size(); ++i) {
        if (map.spawn.weight[i] <= 0.0) continue;
        cum += map.spawn.weight[i];
        map.spawn.support.push_back(static_cast<int>(i));
        map.spawn.cdf.push_back(cum);
    }
    if (!map.spawn.cdf.empty()) map.spawn.cdf.back() = 1.0;
    return map;
}

std::string map_to_svg(const EnvironmentMap& map) {
    const double s = 4.0; // pixels per cell
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  static_cast<int>(map.width_cells * s), static_cast<int>(map.height_cells * s),
                  static_cast<int>(map.width_cells * s), static_cast<int>(map.height_cells * s));
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    double max_w = 0.0;
    for (double w : map.spawn.weight) max_w = std::max(max_w, w);
    for (int y = 0; y < map.height_cells; ++y) {
        for (int x = 0; x < map.width_cells; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * map.width_cells + x;
            const char* fill = nullptr;
            double alpha = 1.0;
            if (map.grid[idx] == CellType::Wall) {
                fill = "#000000";
            } else if (map.grid[idx] == CellType::Furniture) {
                fill = "#2060c0";
            } else if (max_w > 0 && map.spawn.weight[idx] > 0) {
                fill = "#1a8a1a";
                alpha = 0.15 + 0.85 * (map.spawn.weight[idx] / max_w);
            }
            if (!fill) continue;
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                          "fill=\"%s\" fill-opacity=\"%.3f\"/>\n",
                          x * s, y * s, s, s, fill, alpha);
            out += buf;
        }
    }
    for (const ManipObject& o : map.objects) {
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"%.1f\" fill=\"#10306a\"/>\n",
                      o.position.x / map.resolution * s, o.position.y / map.resolution * s,
                      s * 0.6);
        out += buf;
    }
    out += "</svg>\n";
    return out;
}

} // namespace tabsa
