#pragma once

#include <algorithm>

#include "image.hpp"

namespace lectureseg {

struct Hsv {
    double h = 0.0;  // degrees [0, 360)
    double s = 0.0;  // [0, 1]
    double v = 0.0;  // [0, 1]
};

inline Hsv to_hsv(Rgb p) {
    const int mx = std::max({p.r, p.g, p.b});
    const int mn = std::min({p.r, p.g, p.b});
    Hsv out;
    out.v = mx / 255.0;
    out.s = mx == 0 ? 0.0 : double(mx - mn) / mx;
    if (mx == mn) return out;
    const double d = mx - mn;
    double h;
    if (mx == p.r)
        h = 60.0 * ((p.g - p.b) / d);
    else if (mx == p.g)
        h = 60.0 * ((p.b - p.r) / d) + 120.0;
    else
        h = 60.0 * ((p.r - p.g) / d) + 240.0;
    if (h < 0) h += 360.0;
    out.h = h;
    return out;
}

/// Colour classes used by the classifier and the board/sheet filters.
struct PixelPredicates {
    double green_hue_min = 70.0;
    double green_hue_max = 170.0;
    double green_sat_min = 0.15;
    double green_val_min = 0.10;
    double green_val_max = 0.85;
    double white_val_min = 0.70;
    double white_sat_max = 0.20;
    double gray_val_min = 0.50;
    double gray_sat_max = 0.15;

    bool green(Rgb p) const {
        const Hsv c = to_hsv(p);
        return c.h >= green_hue_min && c.h <= green_hue_max && c.s >= green_sat_min && c.v >= green_val_min &&
               c.v <= green_val_max;
    }
    bool white(Rgb p) const {
        const Hsv c = to_hsv(p);
        return c.v >= white_val_min && c.s <= white_sat_max;
    }
    bool light_gray(Rgb p) const {
        const Hsv c = to_hsv(p);
        return c.v >= gray_val_min && c.v < white_val_min && c.s <= gray_sat_max;
    }
    static bool skin(Rgb p) {
        const int mx = std::max({p.r, p.g, p.b});
        const int mn = std::min({p.r, p.g, p.b});
        return p.r > 95 && p.g > 40 && p.b > 20 && p.r > p.g && p.r > p.b && (mx - mn) > 15;
    }
    bool light(Rgb p) const { return white(p) || light_gray(p) || skin(p); }
};

}  // namespace lectureseg
