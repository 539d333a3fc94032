#pragma once

// Exact area arithmetic on axis-aligned rectangles via coordinate
// compression. Areas are continuous (no pixel counting).

#include <span>
#include <vector>

namespace fform {

struct Rect {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double area() const { return (x2 > x1 && y2 > y1) ? (x2 - x1) * (y2 - y1) : 0.0; }
  bool overlaps(const Rect& o) const { return x1 < o.x2 && o.x1 < x2 && y1 < o.y2 && o.y1 < y2; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// A rectangle minus the union of its holes.
struct Region {
  Rect rect;
  std::vector<Rect> holes;
};

/// |union over regions of (rect \ union(holes))|.
double region_union_area(std::span<const Region> regions);

/// |union(rects)|.
double union_area(std::span<const Rect> rects);

/// |target \ union(covers)|.
double uncovered_area(const Rect& target, std::span<const Rect> covers);

}  // namespace fform
