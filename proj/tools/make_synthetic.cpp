// Writes the generated SPR-style dataset as train/dev/test.jsonl.
//   make_synthetic <out-dir> [instances] [seed]

#include <filesystem>
#include <iostream>
#include <string>

#include "sprl/sprl.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_synthetic <out-dir> [instances] [seed]\n";
    return 1;
  }
  const std::filesystem::path out = argv[1];
  const std::size_t n = argc > 2 ? std::stoul(argv[2]) : 5000;
  const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 2024;
  std::filesystem::create_directories(out);
  const auto d = sprl::synthetic_dataset(n, seed);
  sprl::write_instances((out / "train.jsonl").string(), d.train);
  sprl::write_instances((out / "dev.jsonl").string(), d.dev);
  sprl::write_instances((out / "test.jsonl").string(), d.test);
  std::cout << d.train.size() << " / " << d.dev.size() << " / " << d.test.size() << " instances in " << out.string()
            << "\n";
}
