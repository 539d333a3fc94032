#include "fform/rect_area.hpp"

#include <algorithm>
#include <cstdint>

namespace fform {

namespace {

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Index range [lo, hi) of compressed cells covered by [a, b].
std::pair<std::size_t, std::size_t> cell_range(const std::vector<double>& coords, double a, double b) {
  const auto lo = static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), a) - coords.begin());
  const auto hi = static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), b) - coords.begin());
  return {lo, hi};
}

}  // namespace

double region_union_area(std::span<const Region> regions) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : regions) {
    if (r.rect.area() <= 0.0) continue;
    xs.push_back(r.rect.x1);
    xs.push_back(r.rect.x2);
    ys.push_back(r.rect.y1);
    ys.push_back(r.rect.y2);
    for (const auto& h : r.holes) {
      if (!h.overlaps(r.rect)) continue;
      // clip so every hole edge lands inside the compressed span
      xs.push_back(std::clamp(h.x1, r.rect.x1, r.rect.x2));
      xs.push_back(std::clamp(h.x2, r.rect.x1, r.rect.x2));
      ys.push_back(std::clamp(h.y1, r.rect.y1, r.rect.y2));
      ys.push_back(std::clamp(h.y2, r.rect.y1, r.rect.y2));
    }
  }
  if (xs.empty()) return 0.0;
  sort_unique(xs);
  sort_unique(ys);

  const std::size_t nx = xs.size() - 1;
  const std::size_t ny = ys.size() - 1;
  std::vector<std::uint8_t> covered(nx * ny, 0);
  std::vector<std::uint8_t> visible;

  for (const auto& r : regions) {
    if (r.rect.area() <= 0.0) continue;
    const auto [ix0, ix1] = cell_range(xs, r.rect.x1, r.rect.x2);
    const auto [iy0, iy1] = cell_range(ys, r.rect.y1, r.rect.y2);
    const std::size_t w = ix1 - ix0;
    visible.assign(w * (iy1 - iy0), 1);
    for (const auto& h : r.holes) {
      if (!h.overlaps(r.rect)) continue;
      const auto [hx0, hx1] = cell_range(xs, std::clamp(h.x1, r.rect.x1, r.rect.x2), std::clamp(h.x2, r.rect.x1, r.rect.x2));
      const auto [hy0, hy1] = cell_range(ys, std::clamp(h.y1, r.rect.y1, r.rect.y2), std::clamp(h.y2, r.rect.y1, r.rect.y2));
      for (std::size_t j = hy0; j < hy1; ++j) {
        for (std::size_t i = hx0; i < hx1; ++i) visible[(j - iy0) * w + (i - ix0)] = 0;
      }
    }
    for (std::size_t j = iy0; j < iy1; ++j) {
      for (std::size_t i = ix0; i < ix1; ++i) covered[j * nx + i] |= visible[(j - iy0) * w + (i - ix0)];
    }
  }

  double area = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      if (covered[j * nx + i]) row += xs[i + 1] - xs[i];
    }
    area += row * (ys[j + 1] - ys[j]);
  }
  return area;
}

double union_area(std::span<const Rect> rects) {
  std::vector<Region> regions;
  regions.reserve(rects.size());
  for (const auto& r : rects) regions.push_back({r, {}});
  return region_union_area(regions);
}

double uncovered_area(const Rect& target, std::span<const Rect> covers) {
  const Region region{target, std::vector<Rect>(covers.begin(), covers.end())};
  return region_union_area(std::span<const Region>(&region, 1));
}

}  // namespace fform
