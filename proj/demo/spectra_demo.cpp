// Eigenvalue spread of random Hermitian observables as the dimension grows.

#include <algorithm>
#include <cstdio>

#include "qrc/qrc.hpp"

int main() {
  const std::vector<std::size_t> dims{2, 8, 32, 128};
  const auto table = qrc::spectrum_study(dims, {1.0}, 50, 2024);
  std::printf("dim  min       max       spread\n");
  for (auto d : dims) {
    const auto ev = table.cell(d, 1.0);
    const auto [mn, mx] = std::minmax_element(ev.begin(), ev.end());
    std::printf("%-4zu %+8.4f %+8.4f %8.4f\n", d, *mn, *mx, *mx - *mn);
  }
  return 0;
}
