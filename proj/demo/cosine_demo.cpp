// Drives a five-spin chain with a cosine and predicts one sample ahead.

#include <cstdio>

#include "qrc/qrc.hpp"

int main() {
  auto cfg = qrc::default_config(qrc::Task::cosine);
  cfg.seed = 7;
  const auto report = qrc::run_experiment(cfg);
  std::printf("cosine one-step prediction: pearson train %.6f, test %.6f (%zu test points)\n",
              *report.pearson_train, *report.pearson_test, report.n_test);
  for (std::size_t i = 0; i < 5 && i < report.n_test; ++i)
    std::printf("  k=%zu target %+.5f prediction %+.5f\n", report.test_index[i], report.targets[i],
                report.predictions[i]);
  return 0;
}
