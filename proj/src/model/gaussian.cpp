#include "rwt/model/gaussian.hpp"

#include <cmath>

#include "rwt/datamodel/types.hpp"

namespace rwt::model {

std::vector<double> gaussian_kernel(int k, double sigma) {
  if (k <= 0 || k % 2 == 0) throw Error("gaussian kernel size must be odd and positive");
  if (!(sigma > 0.0)) throw Error("gaussian sigma must be positive");
  const int r = k / 2;
  std::vector<double> out(static_cast<std::size_t>(k) * k);
  double sum = 0.0;
  for (int y = 0; y < k; ++y)
    for (int x = 0; x < k; ++x) {
      const double dy = y - r, dx = x - r;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      out[static_cast<std::size_t>(y) * k + x] = v;
      sum += v;
    }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace rwt::model
