// Copyright 2026 The lipcert Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Writes a randomly initialized model and a synthetic nominal input.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "lipcert/model_io.hpp"
#include "lipcert/zoo.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a random MNIST-Net model and input", "lipcert-mknet"};
  std::string out;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--seed", seed, "Weight and input seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const lipcert::NetworkSpec net = lipcert::mnist_net(seed);
    lipcert::save_model(net, out);
    lipcert::save_input(lipcert::synthetic_image(net.input_shape(), seed + 1),
                        std::filesystem::path(out) / "input.bin");
    std::cout << "wrote " << out << "/model.json and " << out << "/input.bin\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
