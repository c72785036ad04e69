#pragma once

#include <filesystem>
#include <fstream>
#include <map>

#include "tstcnn/core/tensor_io.hpp"
#include "tstcnn/model/tstcnn.hpp"

namespace tstcnn::model {

/// Parameters then buffers (batch-norm running statistics), in definition order.
template <typename T>
io::NamedTensors export_state(Tstcnn<T>& model) {
  io::NamedTensors out;
  auto set = model.parameters();
  for (auto& p : set.params) out.emplace_back(p.name, p.param->value.template cast<float>());
  for (auto& b : set.buffers) out.emplace_back(b.name, b.tensor->template cast<float>());
  return out;
}

template <typename T>
void import_state(Tstcnn<T>& model, const io::NamedTensors& state) {
  std::map<std::string, const Tensorf*> by_name;
  for (const auto& [name, t] : state) by_name[name] = &t;
  auto assign = [&](const std::string& name, Tensor<T>& into) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ValidationError("checkpoint is missing tensor " + name);
    if (it->second->shape() != into.shape())
      throw ValidationError("checkpoint tensor " + name + " has shape " +
                            it->second->shape().str() + ", model expects " + into.shape().str());
    into = it->second->template cast<T>();
  };
  auto set = model.parameters();
  for (auto& p : set.params) assign(p.name, p.param->value);
  for (auto& b : set.buffers) assign(b.name, *b.tensor);
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  return p.replace_extension(".json");
}

/// Writes `<path>` (tensors) and `<path stem>.json` (ModelConfig).
template <typename T>
void save_model(const std::filesystem::path& path, Tstcnn<T>& model) {
  io::save_checkpoint(path, export_state(model));
  std::ofstream out(sidecar_path(path));
  if (!out) throw std::runtime_error("cannot write " + sidecar_path(path).string());
  out << to_json(model.config()).dump(2) << '\n';
}

inline ModelConfig load_model_config(const std::filesystem::path& checkpoint) {
  std::ifstream in(sidecar_path(checkpoint));
  if (!in) throw ValidationError("missing model sidecar " + sidecar_path(checkpoint).string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed model sidecar: " + std::string(e.what()));
  }
  return model_config_from_json(j);
}

template <typename T = float>
Tstcnn<T> load_model(const std::filesystem::path& path) {
  Tstcnn<T> model(load_model_config(path));
  import_state(model, io::load_checkpoint(path));
  return model;
}

}  // namespace tstcnn::model
