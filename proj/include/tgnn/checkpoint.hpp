#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tgnn/io_util.hpp"
#include "tgnn/tensor.hpp"

namespace tgnn {

// Self-describing text checkpoint: a version tag, a block of key=value
// metadata, then one line per tensor (name, shape, values). Doubles are
// written with enough digits to round-trip exactly.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw std::runtime_error("checkpoint: no tensor named " + name);
  }
  std::string meta_at(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw std::runtime_error("checkpoint: missing meta key " + key);
    return it->second;
  }
};

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ostringstream os;
  os << "tgnn-checkpoint v1\n";
  os << "meta " << ckpt.meta.size() << "\n";
  for (const auto& [k, v] : ckpt.meta) os << k << "=" << v << "\n";
  os << "tensors " << ckpt.tensors.size() << "\n";
  for (const auto& [name, t] : ckpt.tensors) {
    os << name << " " << t.rows() << " " << t.cols();
    for (double v : t.value()) os << " " << format_double(v);
    os << "\n";
  }
  write_text_file(path, os.str());
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "tgnn-checkpoint v1")
    throw std::runtime_error("checkpoint: bad or missing version tag in " + path);

  Checkpoint ckpt;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated meta header");
  std::istringstream mh(line);
  std::string word;
  size_t count = 0;
  mh >> word >> count;
  if (word != "meta") throw std::runtime_error("checkpoint: expected meta header");
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated meta block");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed meta line: " + line);
    ckpt.meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated tensor header");
  std::istringstream th(line);
  th >> word >> count;
  if (word != "tensors") throw std::runtime_error("checkpoint: expected tensor header");
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated tensor block");
    std::istringstream ts(line);
    std::string name;
    int rows = 0, cols = 0;
    if (!(ts >> name >> rows >> cols)) throw std::runtime_error("checkpoint: malformed tensor line");
    std::vector<double> vals(static_cast<size_t>(rows) * cols);
    for (auto& v : vals)
      if (!(ts >> v)) throw std::runtime_error("checkpoint: short value list for " + name);
    ckpt.tensors.emplace_back(name, Tensor(rows, cols, std::move(vals)));
  }
  return ckpt;
}

// Copies values from a loaded checkpoint into live parameter tensors by name.
inline void restore_named(const Checkpoint& ckpt,
                          const std::vector<std::pair<std::string, Tensor>>& live) {
  for (const auto& [name, t] : live) {
    const Tensor& src = ckpt.tensor(name);
    if (src.rows() != t.rows() || src.cols() != t.cols())
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    Tensor dst = t;
    dst.value() = src.value();
  }
}

}  // namespace tgnn
