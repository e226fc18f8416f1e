// Copyright 2026 The smcdiv Authors
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

#include "smcdiv/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "smcdiv/error.hpp"

namespace smcdiv {

std::vector<std::vector<double>> read_dataset(std::istream& in, std::size_t columns,
                                              const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::kConstruction, source + ":" + std::to_string(line_no) +
                                                  ": '" + token + "' is not a finite real");
      }
      row.push_back(v);
    }
    if (row.size() != columns) {
      throw Error(ErrorKind::kConstruction,
                  source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(columns) + " values, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<double>> load_dataset(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kConstruction, "cannot open dataset '" + path + "'");
  }
  return read_dataset(in, columns, path);
}

}  // namespace smcdiv
