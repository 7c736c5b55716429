#include "oracles/counting_metrics.hpp"

namespace fkp_tests {

std::pair<double, double> brute_far_gar(const std::vector<double>& genuine,
                                        const std::vector<double>& impostor, double threshold) {
  int accepted_impostor = 0;
  for (const double s : impostor)
    if (s >= threshold) ++accepted_impostor;
  int accepted_genuine = 0;
  for (const double s : genuine)
    if (s >= threshold) ++accepted_genuine;
  return {static_cast<double>(accepted_impostor) / impostor.size(),
          static_cast<double>(accepted_genuine) / genuine.size()};
}

}  // namespace fkp_tests
