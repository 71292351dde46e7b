// Generates a deterministic synthetic ECG-like dataset for demos and testing.
#include <iostream>

#include <CLI11.hpp>

#include "cfx/dataset_io.hpp"
#include "cfx/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic beat-train dataset generator"};
  std::string out;
  cfx::SynthConfig cfg;
  app.add_option("--out", out, "output dataset directory")->required();
  app.add_option("--classes", cfg.n_classes, "number of classes (2..6)");
  app.add_option("--per-class", cfg.per_class, "records per class");
  app.add_option("--t", cfg.t, "timesteps per record");
  app.add_option("--c", cfg.c, "channels per record");
  app.add_option("--seed", cfg.seed, "rng seed");
  CLI11_PARSE(app, argc, argv);

  try {
    cfx::Dataset d = cfx::make_synthetic_dataset(cfg);
    cfx::write_dataset(out, d);
    std::cout << "dataset: " << out << " (" << d.size() << " records, T=" << d.n_timesteps()
              << ", C=" << d.n_channels() << ", classes=" << d.class_names.size() << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
