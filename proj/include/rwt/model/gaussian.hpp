#pragma once

#include <vector>

namespace rwt::model {

// k x k isotropic Gaussian centred on the middle cell, normalised to sum 1,
// row-major. k must be odd and sigma positive.
std::vector<double> gaussian_kernel(int k, double sigma);

}  // namespace rwt::model
