#pragma once

#include <cmath>
#include <limits>

#include "tstcnn/core/error.hpp"
#include "tstcnn/core/parallel.hpp"
#include "tstcnn/core/tensor.hpp"

namespace tstcnn::flow {

struct BlockMatchingOptions {
  std::size_t block = 8;
  std::size_t search_radius = 4;
};

/// Exhaustive SAD block matching between two (H, W) gray frames. For each block at p the
/// displacement d minimizes sum |next(p + d) - prev(p)| over candidates whose displaced
/// block stays inside the frame; ties go to the smallest |d|^2, then to the smallest
/// (dx, dy). Output is (2, H, W) with (v_x, v_y) broadcast over each block.
inline Tensorf estimate_flow_block_matching(const Tensorf& prev, const Tensorf& next,
                                            const BlockMatchingOptions& opt = {}) {
  tstcnn::detail::require(opt.block >= 1 && opt.search_radius >= 1, "block and search radius must be >= 1");
  tstcnn::detail::require_shape(prev.rank() == 2 && prev.shape() == next.shape(),
                                "frames differ in size: " + prev.shape().str() + " vs " + next.shape().str());
  const long H = long(prev.dim(0)), W = long(prev.dim(1)), bs = long(opt.block), R = long(opt.search_radius);
  Tensorf flow(Shape{2, std::size_t(H), std::size_t(W)});
  const long blocks_y = (H + bs - 1) / bs, blocks_x = (W + bs - 1) / bs;
  parallel_for(std::size_t(blocks_y * blocks_x), [&](std::size_t b) {
    const long y0 = long(b) / blocks_x * bs, x0 = long(b) % blocks_x * bs;
    const long y1 = std::min(H, y0 + bs), x1 = std::min(W, x0 + bs);
    double best = std::numeric_limits<double>::infinity();
    long best_dx = 0, best_dy = 0;
    for (long dx = -R; dx <= R; ++dx)
      for (long dy = -R; dy <= R; ++dy) {
        if (y0 + dy < 0 || y1 + dy > H || x0 + dx < 0 || x1 + dx > W) continue;
        double sad = 0.0;
        for (long y = y0; y < y1; ++y)
          for (long x = x0; x < x1; ++x)
            sad += std::abs(double(next[std::size_t((y + dy) * W + x + dx)]) - double(prev[std::size_t(y * W + x)]));
        const long mag = dx * dx + dy * dy, best_mag = best_dx * best_dx + best_dy * best_dy;
        const bool better = sad < best || (sad == best && (mag < best_mag ||
                                                           (mag == best_mag && std::pair(dx, dy) < std::pair(best_dx, best_dy))));
        if (better) best = sad, best_dx = dx, best_dy = dy;
      }
    for (long y = y0; y < y1; ++y)
      for (long x = x0; x < x1; ++x) {
        flow[std::size_t(y * W + x)] = float(best_dx);
        flow[std::size_t(H * W + y * W + x)] = float(best_dy);
      }
  });
  return flow;
}

}  // namespace tstcnn::flow
