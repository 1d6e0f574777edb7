#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace dshell {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = -inf;
    double hi = inf;

    bool contains(double x) const { return lo <= x && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

// Closed intervals (endpoints may be infinite) plus isolated points, kept normalized:
// intervals sorted and disjoint, touching ones merged, points outside every interval.
class SpectrumSet {
public:
    SpectrumSet() = default;
    SpectrumSet(std::vector<Interval> intervals, std::vector<double> points = {})
        : intervals_(std::move(intervals)), points_(std::move(points)) {
        normalize();
    }

    static SpectrumSet empty() { return {}; }
    static SpectrumSet real_line() { return SpectrumSet({{-inf, inf}}); }
    static SpectrumSet rays(double left_end, double right_start) {
        return SpectrumSet({{-inf, left_end}, {right_start, inf}});
    }

    const std::vector<Interval>& intervals() const { return intervals_; }
    const std::vector<double>& points() const { return points_; }
    bool is_empty() const { return intervals_.empty() && points_.empty(); }

    bool contains(double x) const {
        for (const auto& iv : intervals_)
            if (iv.contains(x)) return true;
        return std::binary_search(points_.begin(), points_.end(), x);
    }

    // True when some interval of positive length meets the open interval (a, b).
    bool has_interval_inside(double a, double b) const {
        for (const auto& iv : intervals_)
            if (iv.hi > iv.lo && std::max(iv.lo, a) < std::min(iv.hi, b)) return true;
        return false;
    }

    SpectrumSet unite(const SpectrumSet& o) const {
        auto iv = intervals_;
        iv.insert(iv.end(), o.intervals_.begin(), o.intervals_.end());
        auto pt = points_;
        pt.insert(pt.end(), o.points_.begin(), o.points_.end());
        return SpectrumSet(std::move(iv), std::move(pt));
    }

    friend bool operator==(const SpectrumSet&, const SpectrumSet&) = default;

    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        auto end = [&](double x) {
            if (x == inf) os << "inf";
            else if (x == -inf) os << "-inf";
            else os << x;
        };
        bool first = true;
        for (const auto& iv : intervals_) {
            if (!first) os << " U ";
            first = false;
            os << (iv.lo == -inf ? "(" : "[");
            end(iv.lo);
            os << ", ";
            end(iv.hi);
            os << (iv.hi == inf ? ")" : "]");
        }
        for (double p : points_) {
            if (!first) os << " U ";
            first = false;
            os << "{" << p << "}";
        }
        return first ? "{}" : os.str();
    }

private:
    void normalize() {
        for (const auto& iv : intervals_)
            if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi)
                fail(ErrorKind::Domain, "invalid interval in spectrum set");
        for (double p : points_)
            if (!std::isfinite(p)) fail(ErrorKind::Domain, "isolated spectrum points must be finite");
        std::vector<Interval> iv;
        for (const auto& x : intervals_) {
            if (x.lo == x.hi && std::isfinite(x.lo)) points_.push_back(x.lo);
            else iv.push_back(x);
        }
        std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) {
            return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
        });
        intervals_.clear();
        for (const auto& x : iv) {
            if (!intervals_.empty() && x.lo <= intervals_.back().hi)
                intervals_.back().hi = std::max(intervals_.back().hi, x.hi);
            else intervals_.push_back(x);
        }
        std::sort(points_.begin(), points_.end());
        points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
        std::erase_if(points_, [&](double p) {
            for (const auto& x : intervals_)
                if (x.contains(p)) return true;
            return false;
        });
    }

    std::vector<Interval> intervals_;
    std::vector<double> points_;
};

inline SpectrumSet spectrum_union(const SpectrumSet& a, const SpectrumSet& b) { return a.unite(b); }

} // namespace dshell
