#ifndef FKP_TESTS_NAIVE_DFT_HPP_
#define FKP_TESTS_NAIVE_DFT_HPP_

#include <complex>
#include <vector>

namespace fkp_tests {

// Textbook O(n^2)-per-axis 2D DFT, independent of the FFT library used by the
// pipeline. sign = -1 forward, +1 inverse (inverse includes the 1/N factor).
std::vector<std::complex<double>> naive_dft_2d(const std::vector<std::complex<double>>& data,
                                               int width, int height, int sign);

}  // namespace fkp_tests

#endif  // FKP_TESTS_NAIVE_DFT_HPP_
