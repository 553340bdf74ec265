//------------------------------------------------------------------------------
//
//   Copyright 2025-2026 The transitchoice authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "transitchoice/engine.hpp"

#include <fstream>
#include <sstream>

namespace tc {

// Text checkpoint, one tensor per section. Values are hexfloats so the
// round-trip is bit-exact. Layout:
//   tcckpt 1
//   meta <key> <value to end of line>
//   tensor <name> <rows> <cols> <frozen: none|mask>
//   <cols hexfloats per row line>
//   <0/1 frozen mask row lines when frozen=mask>
//   end

void save_checkpoint(const std::string& path, const std::map<std::string, std::string>& meta,
                     const std::vector<const Param*>& tensors) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << "tcckpt 1\n";
  for (const auto& [k, v] : meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw StructuralError("checkpoint meta keys/values must be single-line");
    }
    out << "meta " << k << " " << v << "\n";
  }
  for (const Param* p : tensors) {
    out << "tensor " << p->name << " " << p->value.rows() << " " << p->value.cols() << " "
        << (p->frozen.empty() ? "none" : "mask") << "\n";
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        out << (c ? " " : "") << hexdouble(p->value(r, c));
      }
      out << "\n";
    }
    if (!p->frozen.empty()) {
      for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
        for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
          out << static_cast<int>(p->frozen[static_cast<size_t>(r * p->value.cols() + c)]);
        }
        out << "\n";
      }
    }
  }
  out << "end\n";
  if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "tcckpt 1") {
    throw DataError("not a checkpoint file (bad header): " + path);
  }
  Checkpoint ck;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "end") {
      saw_end = true;
      break;
    }
    if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ck.meta[key] = value;
      continue;
    }
    if (tag != "tensor") throw DataError("unexpected checkpoint line: " + line);
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    std::string frozen_tag;
    ls >> name >> rows >> cols >> frozen_tag;
    if (rows < 0 || cols < 0 || name.empty() ||
        (frozen_tag != "none" && frozen_tag != "mask")) {
      throw DataError("malformed tensor header: " + line);
    }
    Param p;
    p.init(name, rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw DataError("truncated tensor payload: " + name);
      std::istringstream vs(line);
      std::string tok;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(vs >> tok)) throw DataError("short tensor row: " + name);
        p.value(r, c) = parse_hexdouble(tok);
      }
    }
    if (frozen_tag == "mask") {
      p.frozen.assign(static_cast<size_t>(rows * cols), 0);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw DataError("truncated frozen mask: " + name);
        if (static_cast<Eigen::Index>(line.size()) < cols) {
          throw DataError("short frozen mask row: " + name);
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
          p.frozen[static_cast<size_t>(r * cols + c)] = line[static_cast<size_t>(c)] == '1';
        }
      }
    }
    ck.tensors.push_back(std::move(p));
  }
  if (!saw_end) throw DataError("checkpoint missing end marker: " + path);
  return ck;
}

}  // namespace tc
