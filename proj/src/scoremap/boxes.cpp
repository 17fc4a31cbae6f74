#include "rwt/scoremap/boxes.hpp"

#include <algorithm>

namespace rwt::scoremap {

std::vector<Box> extract_boxes(const ScoreMap& map, float threshold) {
  const int h = map.height(), w = map.width();
  std::vector<char> seen(static_cast<std::size_t>(h) * w, 0);
  std::vector<Box> boxes;
  std::vector<std::pair<int, int>> stack;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (seen[i * w + j] || !(map.region(i, j) > threshold)) continue;
      int r0 = i, r1 = i, c0 = j, c1 = j;
      stack.assign(1, {i, j});
      seen[i * w + j] = 1;
      while (!stack.empty()) {
        auto [r, c] = stack.back();
        stack.pop_back();
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            if (seen[rr * w + cc] || !(map.region(rr, cc) > threshold)) continue;
            seen[rr * w + cc] = 1;
            stack.emplace_back(rr, cc);
          }
      }
      boxes.push_back({2 * c0, 2 * r0, 2 * (c1 - c0 + 1), 2 * (r1 - r0 + 1)});
    }
  }
  return boxes;
}

nlohmann::json to_json(const Box& box) {
  return {{"x", box.x}, {"y", box.y}, {"width", box.width}, {"height", box.height}};
}

}  // namespace rwt::scoremap
