#pragma once

#include <cmath>
#include <cstdint>

namespace tabsa {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Integer grid cell. (0,0) is the top-left cell; x grows right, y grows down.
struct Cell {
    int x = 0;
    int y = 0;

    bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
    bool operator!=(const Cell& o) const { return !(*this == o); }
};

inline int chebyshev(const Cell& a, const Cell& b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

/// Axis-aligned cell rectangle, [x, x+w) x [y, y+h).
struct CellRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool contains(const Cell& c) const {
        return c.x >= x && c.x < x + w && c.y >= y && c.y < y + h;
    }
    int area() const { return w * h; }
    bool operator==(const CellRect& o) const {
        return x == o.x && y == o.y && w == o.w && h == o.h;
    }
};

inline bool rects_overlap(const CellRect& a, const CellRect& b) {
    return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

} // namespace tabsa
