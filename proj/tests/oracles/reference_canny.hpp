#ifndef FKP_TESTS_REFERENCE_CANNY_HPP_
#define FKP_TESTS_REFERENCE_CANNY_HPP_

#include "fkp/image.hpp"
#include "fkp/preprocess.hpp"

namespace fkp_tests {

// Straightforward desk implementation of Canny, written independently of the
// library pipeline and kept deliberately naive. It follows the same documented
// conventions (dense 2D Gaussian with radius ceil(3*sigma) and replicate
// border, row-major kernel accumulation, interior-only 3x3 Sobel,
// sqrt(gx^2+gy^2) magnitudes, four gradient sectors with >= ties, thresholds
// relative to the maximum gradient, 8-connected hysteresis) so agreement is
// expected pixel for pixel.
fkp::EdgeMap reference_canny(const fkp::GrayImage& img, double sigma, double low, double high);

}  // namespace fkp_tests

#endif  // FKP_TESTS_REFERENCE_CANNY_HPP_
